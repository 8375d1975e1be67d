"""Liouville transforms between two diffusion coefficients and the reflectionless test chain.

For ``t_i(x) = int_0^x sqrt(1/p_i)`` the map ``t = t_2^{-1} o t_1`` and the
weight ``s = sqrt(t')`` give the unitary operator ``(F v)(x) = s(x) v(t(x))``
from ``L^2`` on the ``p_2`` side to ``L^2`` on the ``p_1`` side.  With
piecewise-constant ``1/p_i`` both ``t_i`` are piecewise linear, so ``t`` is an
exact piecewise-linear map with a constant weight on every piece.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .coefficients import Coefficients, PeriodicBackground, l1_norm
from .errors import DomainExhaustionError, PreconditionError
from .floquet import StabilityInterval, m0_floquet
from .scattering import ScatteringProblem, is_reflectionless
from .weyl import m_disc

__all__ = [
    "LiouvilleMap",
    "build_map",
    "apply_transform",
    "l2_norm_squared",
    "unitarity_residual",
    "unitarity_battery",
    "reflectionless_q_from_p",
    "EquivalenceReport",
    "verify_equivalence",
    "RigidityReport",
    "verify_f_zero_rigidity",
]

_EXPAND_LIMIT = 2.0**30


@dataclass(frozen=True, eq=False)
class LiouvilleMap:
    """Piecewise-linear ``t`` on ``[0, window]`` with a constant weight per piece.

    ``knots`` and ``images`` hold ``x_k`` and ``t(x_k)``; ``weights[k]`` is ``s``
    on ``[x_k, x_{k+1})``.  The identity map evaluates ``t`` as ``x`` and ``s``
    as 1 without arithmetic.
    """

    knots: np.ndarray
    images: np.ndarray
    weights: np.ndarray
    identity: bool = False

    @property
    def window(self) -> float:
        return float(self.knots[-1])

    def _check(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x < self.knots[0]) or np.any(x > self.knots[-1]):
            raise ValueError("point outside the window of the map")
        return x

    def t(self, x):
        x = self._check(x)
        if self.identity:
            return x.copy()
        return np.interp(x, self.knots, self.images)

    def s(self, x):
        x = self._check(x)
        if self.identity:
            return np.ones_like(x)
        k = np.clip(np.searchsorted(self.knots, x, side="right") - 1, 0, self.weights.size - 1)
        return self.weights[k]

    def t_inv(self, y):
        y = np.asarray(y, dtype=float)
        if self.identity:
            return y.copy()
        return np.interp(y, self.images, self.knots)

    def slopes(self) -> np.ndarray:
        return np.diff(self.images) / np.diff(self.knots)

    def inverse(self) -> "LiouvilleMap":
        """The inverse transform ``w -> w(t^{-1}) / s(t^{-1})``, again a Liouville map."""
        return LiouvilleMap(self.images, self.knots, 1.0 / self.weights, self.identity)


def _sqrt_table(coeffs: Coefficients, b: float):
    edges, ip, _ = coeffs.segments(0.0, b)
    root = np.sqrt(ip)
    cum = np.concatenate(([0.0], np.cumsum(root * np.diff(edges))))
    return edges, ip, cum


def build_map(p1: Coefficients, p2: Coefficients, window: float, target_window: float | None = None) -> LiouvilleMap:
    """Liouville map ``t = t_2^{-1}(t_1(x))`` on ``[0, window]``.

    ``t_2`` is tabulated on ``[0, target_window]``; when that is omitted the
    table grows until it covers the range of ``t_1``.
    """
    if not window > 0:
        raise ValueError("window must be positive")
    e1, ip1, T1 = _sqrt_table(p1, window)
    b2 = target_window if target_window is not None else window
    while True:
        e2, ip2, T2 = _sqrt_table(p2, b2)
        if e1.size == e2.size and np.array_equal(e1, e2) and np.array_equal(ip1, ip2):
            return LiouvilleMap(e1.copy(), e1.copy(), np.ones(ip1.size), identity=True)
        if T2[-1] >= T1[-1]:
            break
        if target_window is not None or b2 > _EXPAND_LIMIT:
            raise DomainExhaustionError(
                f"t_1 reaches {T1[-1]:.6g} but t_2 only {T2[-1]:.6g} on [0, {b2:g}]"
            )
        b2 *= 2.0

    # pull the breakpoints of p2 back through t_1
    inner = T2[(T2 > 0) & (T2 < T1[-1])]
    pulled = np.interp(inner, T1, e1)
    knots = np.unique(np.concatenate((e1, pulled)))
    images = np.interp(np.interp(knots, e1, T1), T2, e2)
    images[0], images[-1] = 0.0, float(np.interp(T1[-1], T2, e2))
    mids = 0.5 * (knots[:-1] + knots[1:])
    ipa, _ = p1.evaluate(mids)
    ipb, _ = p2.evaluate(np.interp(mids, knots, images))
    weights = (ipa / ipb) ** 0.25
    return LiouvilleMap(knots, images, weights)


def apply_transform(fmap: LiouvilleMap, v, out_grid) -> np.ndarray:
    """``(F v)(x) = s(x) v(t(x))`` on ``out_grid``.

    ``v`` is a callable or a ``(grid, values)`` pair, interpolated linearly.
    """
    x = np.asarray(out_grid, dtype=float)
    y = fmap.t(x)
    if callable(v):
        vals = np.asarray(v(y))
    else:
        grid, values = v
        values = np.asarray(values)
        if np.iscomplexobj(values):
            vals = np.interp(y, grid, values.real) + 1j * np.interp(y, grid, values.imag)
        else:
            vals = np.interp(y, grid, values)
    return fmap.s(x) * vals


def l2_norm_squared(grid, values) -> float:
    """Exact ``int |v|^2`` of the piecewise-linear interpolant."""
    grid = np.asarray(grid, dtype=float)
    a, b = np.asarray(values[:-1]), np.asarray(values[1:])
    h = np.diff(grid)
    return float(np.sum(h * (np.abs(a) ** 2 + (a * np.conj(b)).real + np.abs(b) ** 2) / 3.0))


def unitarity_residual(fmap: LiouvilleMap, v, n_out: int) -> float:
    """``|int |Fv|^2 - int |v|^2| / int |v|^2`` with ``Fv`` sampled on ``n_out`` points.

    ``v = (grid, values)`` is sampled on the ``p_2`` side.  ``Fv`` is
    integrated piece by piece between the union of a uniform grid and the map
    knots, where ``s`` is constant, so the residual is pure interpolation error.
    """
    grid, values = v
    ref = l2_norm_squared(grid, values)
    out = np.union1d(np.linspace(0.0, fmap.window, n_out), fmap.knots)
    y = fmap.t(out)
    values = np.asarray(values)
    if np.iscomplexobj(values):
        vals = np.interp(y, grid, values.real) + 1j * np.interp(y, grid, values.imag)
    else:
        vals = np.interp(y, grid, values)
    mids = 0.5 * (out[:-1] + out[1:])
    s2 = fmap.s(mids) ** 2
    a, b = vals[:-1], vals[1:]
    got = float(np.sum(s2 * np.diff(out) * (np.abs(a) ** 2 + (a * np.conj(b)).real + np.abs(b) ** 2) / 3.0))
    return abs(got - ref) / ref


def _battery(t_max: float, n: int):
    y = np.linspace(0.0, t_max, n)
    env = np.sin(np.pi * y / t_max) ** 2
    funcs = [env * np.cos(k * np.pi * y / t_max) for k in range(5)]
    funcs += [env * np.exp(1j * (k + 1) * y) for k in range(5)]
    return y, funcs


def unitarity_battery(fmap: LiouvilleMap, n: int = 4000) -> tuple[float, float]:
    """Worst unitarity residual over ten test functions at resolution ``n`` and ``2n``."""
    t_max = float(fmap.t(fmap.window))
    worst = []
    for m in (n, 2 * n):
        y, funcs = _battery(t_max, 4 * m)
        worst.append(max(unitarity_residual(fmap, (y, f), m) for f in funcs))
    return worst[0], worst[1]


def reflectionless_q_from_p(p, domain, dp=None, d2p=None, step: float = 1e-5, check_points: int = 2001):
    """Potential ``q = (p')^2 / (16 p) - p'' / 4`` that cancels the reflection of ``p``.

    Derivatives are taken from ``dp``/``d2p`` when given, otherwise by central
    differences with the given step.  The result is a vectorized callable that
    vanishes outside ``domain``.
    """
    a, b = domain
    probe = np.asarray(p(np.linspace(a, b, check_points)), dtype=float)
    if np.any(~np.isfinite(probe)) or np.any(probe <= 0):
        raise ValueError("p must be positive on the domain")

    def first(x):
        if dp is not None:
            return np.asarray(dp(x), dtype=float)
        return (np.asarray(p(x + step)) - np.asarray(p(x - step))) / (2.0 * step)

    def second(x):
        if d2p is not None:
            return np.asarray(d2p(x), dtype=float)
        return (np.asarray(p(x + step)) - 2.0 * np.asarray(p(x)) + np.asarray(p(x - step))) / step**2

    def q(x):
        x = np.asarray(x, dtype=float)
        px = np.asarray(p(x), dtype=float)
        val = first(x) ** 2 / (16.0 * px) - second(x) / 4.0
        return np.where((x >= a) & (x <= b), val, 0.0)

    return q


@dataclass
class EquivalenceReport:
    max_b: float
    m_sup: float
    m_tol: float
    m_equal: bool
    lambdas: list
    etas: list
    liouville_map: LiouvilleMap = field(repr=False)
    identity_map: bool
    unitarity: tuple
    unitarity_ok: bool
    left_identity: bool
    note: str

    @property
    def passed(self) -> bool:
        return self.m_equal and self.unitarity_ok

    def to_dict(self) -> dict:
        return {
            "max_b": self.max_b,
            "m_sup": self.m_sup,
            "m_tol": self.m_tol,
            "m_equal": self.m_equal,
            "lambdas": [float(v) for v in self.lambdas],
            "etas": [float(v) for v in self.etas],
            "map_knots": self.liouville_map.knots.size,
            "identity_map": self.identity_map,
            "unitarity_residual": list(self.unitarity),
            "unitarity_ok": self.unitarity_ok,
            "left_identity": self.left_identity,
            "note": self.note,
            "passed": self.passed,
        }


def verify_equivalence(
    problem: ScatteringProblem,
    interval: StabilityInterval,
    n_lambda: int = 16,
    etas=(0.1, 1.0),
    tol: float = 1e-5,
    gate_tol: float = 1e-6,
    window: float | None = None,
    unitarity_n: int = 4000,
    unitarity_tol: float = 1e-6,
    m_tol: float = 1e-10,
) -> EquivalenceReport:
    """Check the unitary-equivalence chain for a reflectionless problem.

    1. the reflection coefficient vanishes on ``interval`` (gate);
    2. the perturbed half-line m-function at 0 (Weyl discs) equals the
       background one (Floquet) on ``lambda + i eta``;
    3. the Liouville map between the perturbed and background ``p`` on
       ``[0, window]`` is unitary on a battery of test functions;
    4. on ``(-inf, 0]`` both coefficient sets agree, so ``F`` extends by the
       identity there.

    Raises :class:`PreconditionError` if the gate fails.
    """
    flag, max_b = is_reflectionless(problem, interval, tol=gate_tol)
    if not flag:
        raise PreconditionError(f"problem is not reflectionless on ({interval.c:g}, {interval.d:g}): max|b|={max_b:.3g}")
    coeffs = problem.coefficients
    bg = problem.background
    lams = interval.interior_grid(n_lambda, margin=1e-3)
    sup = 0.0
    for eta in etas:
        for lam in lams:
            z = complex(lam, eta)
            sup = max(sup, abs(m_disc(coeffs, 0.0, z, m_tol) - m0_floquet(bg, z)))
    win = window if window is not None else problem.D + 1.0
    fmap = build_map(coeffs, bg, win)
    unit = unitarity_battery(fmap, unitarity_n)
    e1, ip1, q1 = coeffs.segments(-2.0, 0.0)
    e2, ip2, q2 = bg.segments(-2.0, 0.0)
    left = bool(np.array_equal(e1, e2) and np.array_equal(ip1, ip2) and np.array_equal(q1, q2))
    note = (
        "coefficients coincide on (-inf, 0]; F extends by the identity there"
        if left
        else "coefficients differ left of 0; identity extension not available"
    )
    return EquivalenceReport(
        max_b, sup, tol, bool(sup <= tol), list(lams), list(etas), fmap, fmap.identity,
        unit, bool(unit[1] <= unitarity_tol), left, note,
    )


@dataclass
class RigidityReport:
    reflectionless: bool
    max_b: float
    g_l1: float
    verdict: str

    @property
    def consistent(self) -> bool:
        return self.verdict != "contradiction"

    def to_dict(self) -> dict:
        return {
            "reflectionless": self.reflectionless,
            "max_b": self.max_b,
            "g_l1": self.g_l1,
            "verdict": self.verdict,
            "consistent": self.consistent,
        }


def verify_f_zero_rigidity(
    problem: ScatteringProblem,
    interval: StabilityInterval,
    tol: float = 1e-6,
    calibration: float = 1e-3,
    n: int = 64,
) -> RigidityReport:
    """With ``f = 0``, a reflectionless problem must have ``g = 0``.

    Verdicts: ``"consistent"`` (reflectionless and ``||g||_1 <= calibration``),
    ``"rejected"`` (reflection detected, as expected for nonzero ``g``) and
    ``"contradiction"`` (reflectionless with a sizeable ``g``).
    """
    if not problem.perturbation.f.is_zero():
        raise PreconditionError("the f = 0 rigidity check needs f = 0")
    flag, max_b = is_reflectionless(problem, interval, n=n, tol=tol)
    g = problem.perturbation.g
    g_l1 = l1_norm(g, (0.0, problem.D))
    if not flag:
        verdict = "rejected"
    elif g_l1 <= calibration:
        verdict = "consistent"
    else:
        verdict = "contradiction"
    return RigidityReport(flag, max_b, g_l1, verdict)
