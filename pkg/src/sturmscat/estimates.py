"""A-priori inequalities for solutions and m-functions, checked on concrete data.

Every checker accepts optional precomputed states so that a deliberately
corrupted trajectory can be fed in and shown to violate the bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coefficients import Coefficients, l1_distance, l1_norm
from .propagator import solution_l2, transfer
from .weyl import m_disc, weyl_disc

__all__ = [
    "BoundReport",
    "growth_rate_integral",
    "check_growth_bound",
    "check_difference_bound",
    "FloorReport",
    "check_local_l2_floor",
    "DiscBoundsReport",
    "check_disc_bounds",
]

SLACK = 1e-12


@dataclass(frozen=True)
class BoundReport:
    lhs: float
    rhs: float
    satisfied: bool
    margin: float

    @classmethod
    def of(cls, lhs: float, rhs: float) -> "BoundReport":
        return cls(float(lhs), float(rhs), bool(lhs <= rhs + SLACK), float(rhs - lhs))

    def to_dict(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "satisfied": self.satisfied, "margin": self.margin}


def _R(state) -> float:
    return float(abs(state[0]) ** 2 + abs(state[1]) ** 2)


def growth_rate_integral(coeffs: Coefficients, z: complex, a: float, b: float) -> float:
    """``int_I |1/p + q - z|`` over the interval between ``a`` and ``b``."""
    return l1_norm(coeffs, (a, b), field=lambda ip, q: ip + q - z)


def check_growth_bound(coeffs: Coefficients, z: complex, x: float, y: float, init, states=None) -> BoundReport:
    """``R(x) <= R(y) exp(int_I |1/p + q - z|)`` with ``R = |u|^2 + |pu'|^2``.

    The solution carries state ``init`` at ``x``.  ``states=(U(x), U(y))``
    replaces the computed pair.
    """
    z = complex(z)
    if states is None:
        ux = np.asarray(init, dtype=complex)
        uy = transfer(coeffs, x, y, z) @ ux
    else:
        ux, uy = (np.asarray(s, dtype=complex) for s in states)
    rate = growth_rate_integral(coeffs, z, x, y)
    return BoundReport.of(_R(ux), _R(uy) * math.exp(rate))


def check_difference_bound(c1: Coefficients, c2: Coefficients, z: complex, y: float, x: float, init, states=None) -> BoundReport:
    """``|U_1(x) - U_2(x)| <= C R(y)^{1/2} exp(sum_i int_I (1/p_i + |q_i - z|))``.

    Both solutions start from ``init`` at ``y``; ``C**2`` is the sum of the
    squared ``L^1`` distances of ``1/p`` and of ``q`` over ``I``.  ``states``
    may supply ``(U_1(x), U_2(x))``.
    """
    z = complex(z)
    init = np.asarray(init, dtype=complex)
    if states is None:
        u1 = transfer(c1, y, x, z) @ init
        u2 = transfer(c2, y, x, z) @ init
    else:
        u1, u2 = (np.asarray(s, dtype=complex) for s in states)
    lhs = float(np.linalg.norm(u1 - u2))
    I = (x, y)
    C = math.hypot(l1_distance(c1, c2, I, "inv_p"), l1_distance(c1, c2, I, "q"))
    expo = sum(l1_norm(c, I, field=lambda ip, q: ip + np.abs(q - z)) for c in (c1, c2))
    rhs = C * math.sqrt(_R(init)) * math.exp(expo) if C > 0 else 0.0
    return BoundReport.of(lhs, rhs)


@dataclass(frozen=True)
class FloorReport:
    min_ratio: float
    refined_min_ratio: float
    ratios: np.ndarray
    satisfied: bool
    stable: bool

    def to_dict(self) -> dict:
        return {
            "min_ratio": self.min_ratio,
            "refined_min_ratio": self.refined_min_ratio,
            "satisfied": self.satisfied,
            "stable": self.stable,
        }


def _floor_ratio(coeffs, x, z, init, length):
    init = np.asarray(init, dtype=complex)
    return solution_l2(coeffs, x, x + length, init, z) / _R(init)


def _refine(grid):
    grid = np.asarray(grid)
    if grid.size < 2:
        return grid
    mids = 0.5 * (grid[:-1] + grid[1:])
    return np.sort(np.concatenate((grid, mids)))


def check_local_l2_floor(
    coeffs: Coefficients,
    z_grid,
    x_grid,
    init=(0.0, 1.0),
    length: float = 2.0,
    ratio_fn=None,
) -> FloorReport:
    """``int_x^{x+2} |u|^2 / (|u(x)|^2 + |pu'(x)|^2)`` over ``z_grid x x_grid``.

    The default data ``(0, 1)`` is the solution ``theta_x``.  The minimum is
    recomputed on grids refined by midpoint insertion and must stay within a
    factor 2.  ``ratio_fn(x, z)`` overrides the computed ratio.
    """
    fn = ratio_fn if ratio_fn is not None else (lambda x, z: _floor_ratio(coeffs, x, z, init, length))

    def table(zs, xs):
        return np.array([[fn(float(x), complex(z)) for x in xs] for z in zs])

    ratios = table(z_grid, x_grid)
    refined = table(_refine(z_grid), _refine(x_grid))
    lo, lo_ref = float(ratios.min()), float(refined.min())
    stable = lo > 0 and lo_ref > 0 and 0.5 <= lo_ref / lo <= 2.0
    return FloorReport(lo, lo_ref, ratios, bool(lo > 0 and stable), bool(stable))


@dataclass(frozen=True)
class DiscBoundsReport:
    im_floor: float
    box: dict
    max_radius_im_lambda: float
    all_inside: bool
    satisfied: bool

    def to_dict(self) -> dict:
        return {
            "im_floor": self.im_floor,
            "box": self.box,
            "max_radius_im_lambda": self.max_radius_im_lambda,
            "all_inside": self.all_inside,
            "satisfied": self.satisfied,
        }


def check_disc_bounds(coeff_seq, x_grid, lam_grid, span: float = 2.0, tol: float = 1e-10, m_fn=None) -> DiscBoundsReport:
    """Uniform bounds on the discs ``D^{x+span}`` and on ``m_n`` over a coefficient sequence.

    Reports the smallest ``Im m_n``, a box containing every disc, the largest
    ``radius * Im lam`` and whether each ``m_n`` lies in its disc.  ``m_fn(c,
    x, lam)`` overrides the m-function.
    """
    fn = m_fn if m_fn is not None else (lambda c, x, lam: m_disc(c, x, lam, tol))
    re_lo = im_lo = math.inf
    re_hi = im_hi = -math.inf
    im_floor = math.inf
    rad = 0.0
    inside = True
    for c in coeff_seq:
        for x in x_grid:
            for lam in lam_grid:
                lam = complex(lam)
                d = weyl_disc(c, float(x), lam, float(x) + span)
                m = complex(fn(c, float(x), lam))
                re_lo = min(re_lo, d.center.real - d.radius)
                re_hi = max(re_hi, d.center.real + d.radius)
                im_lo = min(im_lo, d.center.imag - d.radius)
                im_hi = max(im_hi, d.center.imag + d.radius)
                im_floor = min(im_floor, m.imag)
                rad = max(rad, d.radius * lam.imag)
                inside = inside and d.contains(m, slack=1e-10 * max(1.0, abs(m)))
    box = {"re_min": re_lo, "re_max": re_hi, "im_min": im_lo, "im_max": im_hi}
    finite = all(math.isfinite(v) for v in box.values())
    ok = finite and im_floor > 0 and inside
    return DiscBoundsReport(float(im_floor), box, float(rad), bool(inside), bool(ok))
