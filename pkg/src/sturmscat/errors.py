"""Exception hierarchy.

Everything raised for a numerical (as opposed to input) failure derives from
:class:`NumericalError`; the command line maps those to exit code 3 and
:class:`ConfigError` to exit code 2.
"""

from __future__ import annotations


class NumericalError(ArithmeticError):
    """Base class for failures of a numerical procedure."""


class BandEdgeError(NumericalError):
    """The Floquet multipliers collide (|D(z)^2 - 4| below threshold)."""


class DegenerateMonodromyError(NumericalError):
    """Both off-diagonal monodromy entries vanish; no eigenvector normalization."""


class NormalizationError(NumericalError):
    """phi_+(0, z) is too close to zero to form p phi'_+ / phi_+."""


class DependentSolutionsError(NumericalError):
    """The Floquet solutions are numerically linearly dependent."""


class LimitCircleSuspectedError(NumericalError):
    """Weyl disc radii stopped shrinking before the truncation limit."""


class PoleCrossingError(NumericalError):
    """Moebius propagation of an m-function hit a vanishing denominator."""


class BracketError(NumericalError):
    """A scaling equation has no solution on the representable domain."""


class LogBranchError(NumericalError):
    """A logarithm could not be continued along the grid."""


class DomainExhaustionError(NumericalError):
    """A monotone map ran out of represented range."""


class PreconditionError(RuntimeError):
    """A verification was requested for a problem that fails its gate."""


class ConfigError(ValueError):
    """An input document or configuration is malformed; ``field`` names the culprit."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field
