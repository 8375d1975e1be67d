"""Piecewise-constant coefficient models for -(p u')' + q u = z u.

All coefficient objects store ``1/p`` (``inv_p``) and ``q`` as cell values on a
breakpoint grid, so every integral of the coefficients is a finite sum and the
ODE has a closed-form propagator on each cell.  Evaluation is right-continuous
at breakpoints.

Four concrete models share the :class:`Coefficients` interface:

* :class:`PiecewiseCoefficients`: finitely many cells, extended to the whole
  line by the values of the first and last cell.
* :class:`PeriodicBackground`: one cell block on ``[0, 1]`` repeated with
  period 1.
* :class:`PerturbedCoefficients`: a periodic background plus compactly
  supported profiles ``f`` (added to ``1/p``) and ``g`` (added to ``q``).
* ``RescaledCoefficients`` (see :mod:`sturmscat.asymptotics`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

__all__ = [
    "Coefficients",
    "PiecewiseCoefficients",
    "Profile",
    "PeriodicBackground",
    "Perturbation",
    "PerturbedCoefficients",
    "perturb",
    "evaluate",
    "l1_norm",
    "l1_distance",
    "sample_smooth",
    "sample_coefficients",
    "mollify_sequence",
]


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True).reshape(-1)
    arr.setflags(write=False)
    return arr


def _check_grid(breakpoints: np.ndarray, n_values: int, what: str) -> None:
    if breakpoints.size < 2:
        raise ValueError(f"{what}: need at least two breakpoints")
    if not np.all(np.isfinite(breakpoints)):
        raise ValueError(f"{what}: breakpoints must be finite")
    if np.any(np.diff(breakpoints) <= 0):
        raise ValueError(f"{what}: breakpoints must be strictly increasing")
    if n_values != breakpoints.size - 1:
        raise ValueError(
            f"{what}: expected {breakpoints.size - 1} cell values, got {n_values}"
        )


class Coefficients:
    """Interface for piecewise-constant ``(1/p, q)`` on the real line.

    Subclasses implement :meth:`evaluate` and :meth:`breakpoints_in`; the
    cell decomposition of any bounded interval then follows.
    """

    def evaluate(self, x):
        """Return ``(inv_p, q)`` at ``x`` (scalar or array), right-continuous."""
        raise NotImplementedError

    def breakpoints_in(self, a: float, b: float) -> np.ndarray:
        """Sorted breakpoints strictly inside ``(a, b)``."""
        raise NotImplementedError

    def segments(self, a: float, b: float):
        """Decompose ``[a, b]`` into cells of constant coefficients.

        Returns ``(edges, inv_p, q)`` with ``len(edges) == len(inv_p) + 1``.
        An empty interval gives zero cells.
        """
        if b < a:
            raise ValueError("segments requires a <= b")
        if b == a:
            return np.array([a, b], dtype=float)[:1], np.empty(0), np.empty(0)
        inner = self.breakpoints_in(a, b)
        edges = np.concatenate(([a], inner, [b])).astype(float)
        mids = 0.5 * (edges[:-1] + edges[1:])
        inv_p, q = self.evaluate(mids)
        return edges, np.asarray(inv_p, dtype=float), np.asarray(q, dtype=float)

    def is_breakpoint(self, x: float) -> bool:
        eps = 1e-12 * max(1.0, abs(x))
        return self.breakpoints_in(x - eps, x + eps).size > 0


@dataclass(frozen=True, eq=False)
class PiecewiseCoefficients(Coefficients):
    """Cell values of ``1/p`` and ``q`` on ``breakpoints[0] < ... < breakpoints[N]``.

    Outside the grid the first (last) cell value is continued to ``-inf``
    (``+inf``), which makes every instance limit point at both ends.
    """

    breakpoints: np.ndarray
    inv_p: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        bp = _frozen(self.breakpoints)
        inv_p = _frozen(self.inv_p)
        q = _frozen(self.q)
        _check_grid(bp, inv_p.size, "PiecewiseCoefficients")
        if q.size != inv_p.size:
            raise ValueError("inv_p and q must have the same number of cells")
        if not (np.all(np.isfinite(inv_p)) and np.all(np.isfinite(q))):
            raise ValueError("coefficient values must be finite")
        if np.any(inv_p <= 0):
            raise ValueError("inv_p must be strictly positive on every cell")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "inv_p", inv_p)
        object.__setattr__(self, "q", q)

    @classmethod
    def constant(cls, inv_p: float = 1.0, q: float = 0.0, a: float = 0.0, b: float = 1.0):
        return cls([a, b], [inv_p], [q])

    @property
    def n_cells(self) -> int:
        return self.inv_p.size

    def _index(self, x):
        idx = np.searchsorted(self.breakpoints, x, side="right") - 1
        return np.clip(idx, 0, self.n_cells - 1)

    def evaluate(self, x):
        idx = self._index(x)
        if np.ndim(idx) == 0:
            return float(self.inv_p[idx]), float(self.q[idx])
        return self.inv_p[idx], self.q[idx]

    def breakpoints_in(self, a, b):
        bp = self.breakpoints
        return bp[(bp > a) & (bp < b)]

    def same_as(self, other: "PiecewiseCoefficients") -> bool:
        return (
            isinstance(other, PiecewiseCoefficients)
            and np.array_equal(self.breakpoints, other.breakpoints)
            and np.array_equal(self.inv_p, other.inv_p)
            and np.array_equal(self.q, other.q)
        )


@dataclass(frozen=True, eq=False)
class Profile:
    """A single piecewise-constant function, zero outside its breakpoint range."""

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        bp = _frozen(self.breakpoints)
        v = _frozen(self.values)
        _check_grid(bp, v.size, "Profile")
        if not np.all(np.isfinite(v)):
            raise ValueError("Profile: values must be finite")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", v)

    @classmethod
    def zero(cls, a: float = 0.0, b: float = 1.0) -> "Profile":
        return cls([a, b], [0.0])

    @classmethod
    def indicator(cls, a: float, b: float, height: float = 1.0) -> "Profile":
        return cls([a, b], [height])

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        bp = self.breakpoints
        idx = np.searchsorted(bp, x, side="right") - 1
        inside = (idx >= 0) & (idx < self.values.size)
        out = np.where(inside, self.values[np.clip(idx, 0, self.values.size - 1)], 0.0)
        return float(out) if out.ndim == 0 else out

    def breakpoints_in(self, a, b):
        bp = self.breakpoints
        return bp[(bp > a) & (bp < b)]

    def support(self) -> tuple[float, float] | None:
        """Smallest closed interval outside of which the profile vanishes."""
        nz = np.flatnonzero(self.values != 0.0)
        if nz.size == 0:
            return None
        return float(self.breakpoints[nz[0]]), float(self.breakpoints[nz[-1] + 1])

    def is_zero(self) -> bool:
        return not np.any(self.values != 0.0)


@dataclass(frozen=True, eq=False)
class PeriodicBackground(Coefficients):
    """1-periodic extension of a cell block given on ``[0, 1]``."""

    cell: PiecewiseCoefficients
    period: float = field(default=1.0, init=False)

    def __post_init__(self):
        bp = self.cell.breakpoints
        if bp[0] != 0.0 or bp[-1] != 1.0:
            raise ValueError("periodic cell must span exactly [0, 1]")

    def evaluate(self, x):
        return self.cell.evaluate(np.mod(x, 1.0))

    def breakpoints_in(self, a, b):
        inner = self.cell.breakpoints[:-1]
        shifts = np.arange(math.floor(a), math.floor(b) + 1, dtype=float)
        bp = (shifts[:, None] + inner[None, :]).ravel()
        return np.unique(bp[(bp > a) & (bp < b)])

    def is_free(self) -> bool:
        return bool(np.all(self.cell.inv_p == 1.0) and np.all(self.cell.q == 0.0))


@dataclass(frozen=True, eq=False)
class Perturbation:
    """Compactly supported perturbation: ``1/p = 1/p0 + f`` and ``q = q0 + g``.

    ``support`` is the radius ``D``; both profiles must vanish outside
    ``[0, D]``.
    """

    f: Profile
    g: Profile
    support: float

    def __post_init__(self):
        if not (self.support > 0 and math.isfinite(self.support)):
            raise ValueError("support radius D must be positive and finite")
        if np.any(self.f.values < 0):
            raise ValueError("f must be nonnegative on every cell")
        for name, prof in (("f", self.f), ("g", self.g)):
            sup = prof.support()
            if sup is not None and (sup[0] < 0 or sup[1] > self.support):
                raise ValueError(f"{name} is not supported in [0, D={self.support}]")

    @classmethod
    def none(cls, support: float = 1.0) -> "Perturbation":
        return cls(Profile.zero(0.0, support), Profile.zero(0.0, support), support)

    def is_trivial(self) -> bool:
        return self.f.is_zero() and self.g.is_zero()


@dataclass(frozen=True, eq=False)
class PerturbedCoefficients(Coefficients):
    background: Coefficients
    perturbation: Perturbation

    def evaluate(self, x):
        inv_p, q = self.background.evaluate(x)
        return inv_p + self.perturbation.f(x), q + self.perturbation.g(x)

    def breakpoints_in(self, a, b):
        parts = [
            self.background.breakpoints_in(a, b),
            self.perturbation.f.breakpoints_in(a, b),
            self.perturbation.g.breakpoints_in(a, b),
        ]
        return np.unique(np.concatenate(parts))


def evaluate(coeffs: Coefficients, x):
    return coeffs.evaluate(x)


def perturb(background: Coefficients, perturbation: Perturbation) -> PerturbedCoefficients:
    """Coefficients ``(1/p0 + f, q0 + g)`` on the merged breakpoint grid."""
    if np.any(perturbation.f.values < 0):
        raise ValueError("f must be nonnegative")
    return PerturbedCoefficients(background, perturbation)


Field = Union[str, Callable]


def _field_values(obj, a, b, field: Field):
    if isinstance(obj, Profile):
        inner = obj.breakpoints_in(a, b)
        edges = np.concatenate(([a], inner, [b]))
        return edges, obj(0.5 * (edges[:-1] + edges[1:]))
    edges, inv_p, q = obj.segments(a, b)
    if field == "q":
        return edges, q
    if field == "inv_p":
        return edges, inv_p
    return edges, field(inv_p, q)


def l1_norm(obj, interval, field: Field = "q") -> float:
    """Exact ``int_I |h(t)| dt`` for a profile or a coefficient field.

    ``field`` selects ``"q"``, ``"inv_p"`` or a callable ``(inv_p, q) -> values``
    (e.g. ``lambda ip, q: ip + q - z``).
    """
    a, b = map(float, interval)
    if b < a:
        a, b = b, a
    if a == b:
        return 0.0
    edges, vals = _field_values(obj, a, b, field)
    return float(np.sum(np.abs(vals) * np.diff(edges)))


def l1_distance(c1, c2, interval, field: str = "q") -> float:
    """``int_I |h1 - h2|`` over the merged grid of two coefficient sets."""
    a, b = map(float, interval)
    if b < a:
        a, b = b, a
    if a == b:
        return 0.0
    bp = np.unique(np.concatenate((c1.breakpoints_in(a, b), c2.breakpoints_in(a, b))))
    edges = np.concatenate(([a], bp, [b]))
    mids = 0.5 * (edges[:-1] + edges[1:])
    i1, q1 = c1.evaluate(mids)
    i2, q2 = c2.evaluate(mids)
    diff = (q1 - q2) if field == "q" else (i1 - i2)
    return float(np.sum(np.abs(diff) * np.diff(edges)))


def sample_smooth(profile, domain, n_cells: int) -> Profile:
    """Midpoint-sample ``profile`` on a uniform grid of ``n_cells`` cells."""
    if n_cells < 1:
        raise ValueError("n_cells must be >= 1")
    a, b = map(float, domain)
    edges = np.linspace(a, b, n_cells + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    if callable(profile):
        vals = np.asarray(np.vectorize(profile, otypes=[float])(mids), dtype=float)
    else:
        vals = np.full(n_cells, float(profile))
    if not np.all(np.isfinite(vals)):
        raise ValueError("profile produced non-finite samples")
    return Profile(edges, vals)


def sample_coefficients(inv_p, q, domain, n_cells: int) -> PiecewiseCoefficients:
    """Midpoint discretization of smooth ``1/p`` and ``q`` (callables or constants)."""
    ip = sample_smooth(inv_p, domain, n_cells)
    qq = sample_smooth(q, domain, n_cells)
    if np.any(ip.values <= 0):
        raise ValueError("sampled 1/p must be positive")
    return PiecewiseCoefficients(ip.breakpoints, ip.values, qq.values)


def _cumulative(bp: np.ndarray, vals: np.ndarray):
    """Antiderivative of a constant-extended step function, as a callable."""
    cum = np.concatenate(([0.0], np.cumsum(vals * np.diff(bp))))

    def F(x):
        x = np.asarray(x, dtype=float)
        idx = np.clip(np.searchsorted(bp, x, side="right") - 1, 0, vals.size - 1)
        return cum[idx] + vals[idx] * (x - bp[idx])

    return F


def mollify_sequence(target: PiecewiseCoefficients, n: int, ramp_cells: int = 8) -> PiecewiseCoefficients:
    """Moving average of ``target`` over windows of width ``1/n``.

    The average of a step function is piecewise linear with kinks at the
    original breakpoints shifted by half a window; each linear piece is split
    into ``ramp_cells`` cells holding exact cell averages.  Windows that fit
    inside one cell reproduce that cell's value bit for bit.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    w = 1.0 / n
    bp = target.breakpoints
    if np.all(target.inv_p == target.inv_p[0]) and np.all(target.q == target.q[0]):
        return target
    knots = np.unique(np.concatenate((bp - w / 2, bp, bp + w / 2)))
    # shifted knots that coincide in exact arithmetic may differ by an ulp
    tiny = 1e-12 * max(1.0, float(np.abs(knots).max()))
    knots = knots[np.concatenate(([True], np.diff(knots) > tiny))]
    pieces = []
    for left, right in zip(knots[:-1], knots[1:]):
        jumps = bp[(bp > left - w / 2) & (bp < right + w / 2)]
        # a piece is linear (not constant) iff some jump lies within half a window
        k = ramp_cells if jumps.size else 1
        pieces.append(np.linspace(left, right, k + 1)[:-1])
    edges = np.concatenate(pieces + [knots[-1:]])
    mids = 0.5 * (edges[:-1] + edges[1:])

    def smoothed(vals):
        F = _cumulative(bp, vals)
        out = (F(mids + w / 2) - F(mids - w / 2)) / w
        lo = np.searchsorted(bp, mids - w / 2, side="right")
        hi = np.searchsorted(bp, mids + w / 2, side="left")
        inside = lo >= hi  # no breakpoint strictly inside the window
        idx = np.clip(np.searchsorted(bp, mids, side="right") - 1, 0, vals.size - 1)
        return np.where(inside, vals[idx], out)

    return PiecewiseCoefficients(edges, smoothed(target.inv_p), smoothed(target.q))
