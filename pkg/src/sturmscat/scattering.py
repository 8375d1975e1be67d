"""Scattering of a compactly supported perturbation against a periodic background.

The modified Jost solution equals the Floquet solution ``phi_+`` left of the
perturbation and ``a phi_+ + b phi_-`` to the right of ``D``.  With a free
background and the normalization ``v_pm = (1, +-ik)`` the pair ``(a, b)``
reduces to the classical plane-wave coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coefficients import PeriodicBackground, Perturbation, PerturbedCoefficients, perturb
from .errors import DependentSolutionsError, NumericalError
from .floquet import StabilityInterval, floquet_data, floquet_solution
from .propagator import transfer, wronskian

__all__ = [
    "ScatteringProblem",
    "ScatteringSample",
    "jost_state",
    "scattering_coefficients",
    "reflection_scan",
    "is_reflectionless",
    "wronskian_conservation_diagnostic",
    "contour_integral_b",
]


@dataclass(frozen=True, eq=False)
class ScatteringProblem:
    background: PeriodicBackground
    perturbation: Perturbation

    @property
    def D(self) -> float:
        return self.perturbation.support

    @property
    def coefficients(self) -> PerturbedCoefficients:
        return perturb(self.background, self.perturbation)

    def unperturbed(self) -> "ScatteringProblem":
        return ScatteringProblem(self.background, Perturbation.none(self.D))


@dataclass(frozen=True)
class ScatteringSample:
    z: complex
    a: complex
    b: complex
    wronskian_drift: float = float("nan")
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    @property
    def transmission(self) -> complex:
        """Physicists' ``t = 1/a``."""
        return 1.0 / self.a

    @property
    def reflection(self) -> complex:
        """Physicists' ``r = b/a``."""
        return self.b / self.a


def jost_state(problem: ScatteringProblem, z: complex, data=None) -> np.ndarray:
    """``(u_+, p u_+')`` at ``x = D``: the perturbed transfer over ``[0, D]`` applied to ``v_+``."""
    fd = data if data is not None else floquet_data(problem.background, z)
    return transfer(problem.coefficients, 0.0, problem.D, fd.z) @ fd.v_plus


def _solve_ab(problem, z, fd):
    u = jost_state(problem, z, fd)
    phi_p = floquet_solution(problem.background, z, problem.D, +1, fd)
    phi_m = floquet_solution(problem.background, z, problem.D, -1, fd)
    det = phi_p[0] * phi_m[1] - phi_m[0] * phi_p[1]
    if abs(det) < 1e-12:
        raise DependentSolutionsError(f"Floquet solutions dependent at z={z} (det={det:.3g})")
    a = (u[0] * phi_m[1] - phi_m[0] * u[1]) / det
    b = (phi_p[0] * u[1] - u[0] * phi_p[1]) / det
    return complex(a), complex(b)


def scattering_coefficients(problem: ScatteringProblem, z: complex) -> ScatteringSample:
    """Periodic scattering coefficients ``(a_p(z), b_p(z))``.

    Real ``z`` must lie inside a stability interval; the Floquet labels are
    then fixed by continuation from the upper half plane and the Wronskian
    drift of the Jost solution is attached as a diagnostic.
    """
    z = complex(z)
    fd = floquet_data(problem.background, z)
    a, b = _solve_ab(problem, z, fd)
    drift = wronskian_conservation_diagnostic(problem, z, fd) if z.imag == 0 else float("nan")
    return ScatteringSample(z, a, b, drift)


def reflection_scan(
    problem: ScatteringProblem,
    interval: StabilityInterval,
    n: int = 64,
    eta: float = 0.0,
    margin: float = 1e-6,
) -> list[ScatteringSample]:
    """Samples of ``(a, b)`` on a uniform grid strictly inside ``interval``.

    Failures at individual points are recorded on the sample, not raised.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    if eta < 0:
        raise ValueError("eta must be nonnegative")
    out = []
    for lam in interval.interior_grid(n, margin):
        z = complex(lam, eta)
        try:
            out.append(scattering_coefficients(problem, z))
        except NumericalError as exc:
            out.append(ScatteringSample(z, complex("nan"), complex("nan"), float("nan"), str(exc)))
    return out


def is_reflectionless(problem, interval, n: int = 64, tol: float = 1e-6, eta: float = 0.0):
    """``(flag, max|b|)`` over a scan of ``interval``; failed samples count as reflecting."""
    samples = reflection_scan(problem, interval, n, eta)
    if any(not s.ok for s in samples):
        return False, float("inf")
    max_b = max(abs(s.b) for s in samples)
    return bool(max_b <= tol), float(max_b)


def wronskian_conservation_diagnostic(problem: ScatteringProblem, z: complex, data=None) -> float:
    """Relative change of ``[u_+, u_+]`` between ``x = -1`` and ``x = D + 1``.

    For real ``z`` the bracket of any solution with itself is constant.
    """
    z = complex(z)
    if z.imag != 0:
        raise ValueError("the bracket [u, u] is conserved only for real z")
    fd = data if data is not None else floquet_data(problem.background, z)
    left = floquet_solution(problem.background, z, -1.0, +1, fd)
    right = transfer(problem.coefficients, 0.0, problem.D + 1.0, z) @ fd.v_plus
    w_left = wronskian(left, left)
    w_right = wronskian(right, right)
    scale = max(abs(w_left), np.finfo(float).tiny)
    return float(abs(w_right - w_left) / scale)


def contour_integral_b(problem: ScatteringProblem, center: complex, radius: float, n: int = 64) -> complex:
    """Trapezoid approximation of the contour integral of ``b_p`` on a circle.

    Vanishes for a circle inside the strip over a stability interval, where
    ``b_p`` is analytic.
    """
    theta = 2 * math.pi * np.arange(n) / n
    zs = center + radius * np.exp(1j * theta)
    bs = np.array([_solve_ab(problem, z, floquet_data(problem.background, z))[1] for z in zs])
    dz = 1j * radius * np.exp(1j * theta) * (2 * math.pi / n)
    return complex(np.sum(bs * dz))
