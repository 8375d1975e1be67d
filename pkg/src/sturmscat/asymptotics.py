"""High-energy behaviour of the m-function through a coefficient rescaling.

With ``P_x(t) = int_x^t 1/p`` and ``W_x(t) = t - x`` the pair ``(t, r)``
solving ``r P_x(t) W_x(t) = 1`` defines ``f_x(r) = P_x(t)`` and
``s = t - x = 1 / (r f_x(r))``.  Substituting ``y = s t + x`` turns the
equation at energy ``r mu`` into one with coefficients

    q_r(t) = q(s t + x) / r,     1/p_r(t) = (s / f_x(r)) / p(s t + x)

at energy ``mu``, whose m-function at 0 is ``f_x(r) m(x, r mu)``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .coefficients import Coefficients, PiecewiseCoefficients
from .errors import BracketError, LogBranchError
from .propagator import cell_transfers, gauss_nodes, substeps
from .weyl import m_disc

__all__ = [
    "ScalingBundle",
    "scaling_bundle",
    "RescaledCoefficients",
    "rescaled_problem",
    "rescaled_m",
    "AsymptoticsRow",
    "m_asymptotics_probe",
    "GrowthRow",
    "weyl_solution_growth",
    "growth_asymptotics",
    "sqrt_inv_p_integral",
]

_GL_X, _GL_W = gauss_nodes(10)
_MAX_PHASE = 1.0
_SPAN_LIMIT = 1e12


def _P(coeffs: Coefficients, x: float, t: float) -> float:
    if t == x:
        return 0.0
    lo, hi = (x, t) if t > x else (t, x)
    edges, ip, _ = coeffs.segments(lo, hi)
    val = float(np.dot(ip, np.diff(edges)))
    return val if t > x else -val


@dataclass(frozen=True, eq=False)
class ScalingBundle:
    coeffs: Coefficients = field(repr=False)
    x: float
    r: float
    s: float
    f_x_r: float
    t_tilde: float

    def P(self, t: float) -> float:
        """``int_x^t 1/p``."""
        return _P(self.coeffs, self.x, t)

    def W(self, t: float) -> float:
        return t - self.x

    def P_inv(self, tau: float) -> float:
        """Exact inverse of :meth:`P` for ``tau >= 0``."""
        if tau < 0:
            raise ValueError("P_inv defined here for tau >= 0")
        span = 1.0
        while True:
            edges, ip, _ = self.coeffs.segments(self.x, self.x + span)
            cum = np.concatenate(([0.0], np.cumsum(ip * np.diff(edges))))
            if cum[-1] >= tau:
                k = min(int(np.searchsorted(cum, tau, side="right")) - 1, ip.size - 1)
                return float(edges[k] + (tau - cum[k]) / ip[k])
            span *= 2.0
            if span > _SPAN_LIMIT:
                raise BracketError(f"P_x does not reach {tau}")

    def f_tilde(self, tau: float) -> float:
        """``1 / (tau W_x(P_x^{-1}(tau)))``, strictly decreasing in ``tau > 0``."""
        return 1.0 / (tau * self.W(self.P_inv(tau)))

    def identity_residual(self) -> float:
        """``|r P_x(t) W_x(t) - 1|`` at the returned ``t``."""
        return abs(self.r * self.P(self.t_tilde) * self.W(self.t_tilde) - 1.0)


def scaling_bundle(coeffs: Coefficients, x: float, r: float) -> ScalingBundle:
    """Solve ``r P_x(t) (t - x) = 1`` for ``t > x``.

    ``P_x`` is piecewise linear, so on the cell containing the root the
    equation is a quadratic in ``w = t - x`` and is solved in closed form.
    """
    if not (np.isfinite(r) and r > 0):
        raise BracketError(f"r={r!r} is outside the range (0, inf) of f~_x")
    x = float(x)
    span = 1.0
    while True:
        edges, ip, _ = coeffs.segments(x, x + span)
        w_edges = edges - x
        P_edges = np.concatenate(([0.0], np.cumsum(ip * np.diff(edges))))
        g = r * P_edges * w_edges
        if g[-1] >= 1.0:
            break
        span *= 2.0
        if x + span - x > _SPAN_LIMIT:
            raise BracketError(f"no t with r P_x(t)(t - x) = 1 for r={r:g} within the domain")
    k = min(max(int(np.searchsorted(g, 1.0)) - 1, 0), ip.size - 1)
    a = ip[k]
    A = r * a
    B = r * (P_edges[k] - a * w_edges[k])
    w = 2.0 / (B + math.sqrt(B * B + 4.0 * A))
    w = min(max(w, w_edges[k]), w_edges[k + 1])
    f = float(P_edges[k] + a * (w - w_edges[k]))
    return ScalingBundle(coeffs, x, float(r), float(w), f, x + float(w))


class RescaledCoefficients(Coefficients):
    """Lazy view of ``(1/p_r, q_r)`` on the whole line."""

    def __init__(self, base: Coefficients, bundle: ScalingBundle):
        self.base = base
        self.bundle = bundle
        self._ratio = bundle.s / bundle.f_x_r

    def _pull(self, t):
        return self.bundle.s * np.asarray(t, dtype=float) + self.bundle.x

    def evaluate(self, t):
        ip, q = self.base.evaluate(self._pull(t))
        return self._ratio * ip, q / self.bundle.r

    def breakpoints_in(self, a, b):
        bp = self.base.breakpoints_in(float(self._pull(a)), float(self._pull(b)))
        t = (bp - self.bundle.x) / self.bundle.s
        return t[(t > a) & (t < b)]

    def energy(self, mu: complex) -> complex:
        """Energy of the original problem that corresponds to ``mu``."""
        return self.bundle.r * complex(mu)

    def materialize(self, c: float) -> PiecewiseCoefficients:
        """Stored cell data of the rescaled coefficients on ``[0, c]``."""
        if not c > 0:
            raise ValueError("need c > 0")
        edges, ip, q = self.segments(0.0, c)
        return PiecewiseCoefficients(edges, ip, q)


def rescaled_problem(coeffs: Coefficients, x: float, r: float):
    """``(coeffs_r, mu_map)`` with ``mu_map(mu) = r mu`` the original energy."""
    rc = RescaledCoefficients(coeffs, scaling_bundle(coeffs, x, r))
    return rc, rc.energy


def rescaled_m(coeffs: Coefficients, x: float, r: float, mu: complex, tol: float = 1e-10) -> complex:
    """``f_x(r) m(x, r mu)``, the m-function of the rescaled problem at 0."""
    b = scaling_bundle(coeffs, x, r)
    return b.f_x_r * m_disc(coeffs, x, r * complex(mu), tol)


@dataclass(frozen=True)
class AsymptoticsRow:
    r: float
    ratio: complex
    target: complex
    deviation: float


def _strictly_decreasing(values) -> bool:
    return all(b < a for a, b in zip(values[:-1], values[1:]))


def m_asymptotics_probe(coeffs: Coefficients, x: float, mu: complex, r_grid, tol: float = 1e-10):
    """Rows ``(r, m(x, r mu)/sqrt(r), i sqrt(mu) sqrt(p(x)), |difference|)``.

    ``x`` must not be a breakpoint, where ``p`` has two one-sided values.
    Returns ``(rows, strictly_decreasing)``.
    """
    if coeffs.is_breakpoint(x):
        raise ValueError(f"x={x} is a breakpoint of the coefficients")
    mu = complex(mu)
    ip, _ = coeffs.evaluate(x)
    target = 1j * cmath.sqrt(mu) / math.sqrt(float(ip))
    rows = []
    for r in r_grid:
        ratio = m_disc(coeffs, x, r * mu, tol) / math.sqrt(r)
        rows.append(AsymptoticsRow(float(r), ratio, target, abs(ratio - target)))
    return rows, _strictly_decreasing([row.deviation for row in rows])


def sqrt_inv_p_integral(coeffs: Coefficients, a: float, b: float) -> float:
    """``int_a^b sqrt(1/p)``, exact for piecewise-constant ``p``."""
    if a == b:
        return 0.0
    lo, hi = (a, b) if b > a else (b, a)
    edges, ip, _ = coeffs.segments(lo, hi)
    val = float(np.dot(np.sqrt(ip), np.diff(edges)))
    return val if b > a else -val


@dataclass(frozen=True)
class GrowthRow:
    x: float
    log_direct: complex
    log_exponential: complex

    @property
    def relative_gap(self) -> float:
        return abs(self.log_direct - self.log_exponential) / max(1.0, abs(self.log_direct))


def _pieces(coeffs, points, lam):
    edges, ips, qs, marks = [np.array([points[0]])], [], [], [0]
    for a, b in zip(points[:-1], points[1:]):
        if b == a:
            marks.append(marks[-1])
            continue
        e, ip, q = substeps(coeffs, a, b, lam, _MAX_PHASE)
        edges.append(e[1:])
        ips.append(ip)
        qs.append(q)
        marks.append(marks[-1] + ip.size)
    return np.concatenate(edges), np.concatenate(ips), np.concatenate(qs), marks


def weyl_solution_growth(coeffs: Coefficients, lam: complex, x_grid, tol: float = 1e-10) -> list[GrowthRow]:
    """``ln(psi(x)/psi(0))`` for the Weyl solution ``psi`` by two routes.

    The direct route propagates the state ``(psi, p psi')`` backwards from the
    largest grid point, where it is seeded with the Weyl m-function, and
    accumulates logarithms step by step.  The exponential route integrates
    ``(1/p) m`` with ``m`` obtained from the Riccati flow.  Backward
    propagation keeps both routes stable for large ``|lam|``, since ``psi``
    decays to the right.
    """
    lam = complex(lam)
    xs = [float(v) for v in x_grid]
    points = sorted(set(xs) | {0.0})
    edges, ip, q, marks = _pieces(coeffs, points, lam)
    h = np.diff(edges)
    n = h.size
    T = cell_transfers(ip, q, lam, h)
    m_right = m_disc(coeffs, points[-1], lam, tol)

    # direct: propagate (u, pu) leftwards, one log per step
    log_u = np.zeros(n + 1, dtype=complex)
    u, pu = 1.0 + 0j, m_right
    m_edges = np.empty(n + 1, dtype=complex)
    m_edges[n] = m_right
    for k in range(n - 1, -1, -1):
        t11, t12, t21, t22 = T[k, 0, 0], T[k, 0, 1], T[k, 1, 0], T[k, 1, 1]
        u_new, pu_new = t22 * u - t12 * pu, -t21 * u + t11 * pu
        step = cmath.log(u_new / u)
        if abs(step.imag) > 3.0:
            raise LogBranchError(f"phase step {step.imag:.3g} near x={edges[k]:g}; refine the grid")
        log_u[k] = log_u[k + 1] + step
        scale = abs(u_new)
        u, pu = u_new / scale, pu_new / scale
        m_edges[k] = pu / u

    # exponential: Gauss-Legendre on (1/p) m with m carried back from each right edge
    span = (1.0 - _GL_X)[None, :] * h[:, None]
    Tn = cell_transfers(ip[:, None], q[:, None], lam, span)
    mr = m_edges[1:, None]
    m_nodes = (-Tn[..., 1, 0] + Tn[..., 0, 0] * mr) / (Tn[..., 1, 1] - Tn[..., 0, 1] * mr)
    pieces = h * ip * (m_nodes @ _GL_W)
    cum = np.concatenate(([0.0], np.cumsum(pieces)))

    idx = {p: marks[i] for i, p in enumerate(points)}
    i0 = idx[0.0]
    # both log_u and cum are anchored at one end, so differences give ln(psi(x)/psi(0))
    return [GrowthRow(x, complex(log_u[idx[x]] - log_u[i0]), complex(cum[idx[x]] - cum[i0])) for x in xs]


def growth_asymptotics(coeffs: Coefficients, mu: complex, x_grid, r_grid, tol: float = 1e-10):
    """Deviation of ``ln(psi(x)/psi(0)) / (i sqrt(r))`` from ``sqrt(mu) int_0^x sqrt(1/p)``.

    Returns ``(rows, worst_gap, decreasing)`` where each row is
    ``(r, x, scaled_log, target, deviation)``, ``worst_gap`` is the largest
    direct/exponential disagreement seen, and ``decreasing`` says whether the
    deviation strictly decreases in ``r`` at every ``x``.
    """
    mu = complex(mu)
    xs = [float(v) for v in x_grid]
    targets = {x: cmath.sqrt(mu) * sqrt_inv_p_integral(coeffs, 0.0, x) for x in xs}
    rows, gap = [], 0.0
    for r in r_grid:
        for g in weyl_solution_growth(coeffs, r * mu, xs, tol):
            scaled = g.log_direct / (1j * math.sqrt(r))
            rows.append((float(r), g.x, scaled, targets[g.x], abs(scaled - targets[g.x])))
            gap = max(gap, g.relative_gap)
    decreasing = all(
        _strictly_decreasing([row[4] for row in rows if row[1] == x]) for x in xs
    )
    return rows, gap, decreasing
