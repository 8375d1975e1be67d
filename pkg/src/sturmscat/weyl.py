"""Weyl discs, limit-point m-functions and their propagation in x.

For ``Im lam > 0`` let ``phi_x, theta_x`` be the solutions with
``(phi, theta; p phi', p theta')(x) = I``.  The disc of admissible
``m``-values for truncation at ``y`` has

    center = -[phi, theta](y) / (2i Im(lam) int_x^y |theta|^2)
    radius =  1 / (2 Im(lam) int_x^y |theta|^2)

with ``[f, g] = f conj(p g') - p f' conj(g)``.  Both numerator and the
integral grow like ``|theta|^2``; the accumulator below keeps them in a common
floating scale so that arbitrarily large ``lam`` and ``y`` are safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp as _scipy_ivp

from .coefficients import Coefficients, mollify_sequence
from .errors import LimitCircleSuspectedError, NumericalError, PoleCrossingError
from .propagator import _cos_sinc, cell_transfers, gauss_nodes, substeps

__all__ = [
    "WeylDisc",
    "weyl_disc",
    "weyl_discs",
    "weyl_limit",
    "m_disc",
    "riccati_propagate",
    "riccati_path",
    "m_convergence_experiment",
]

_GL_X, _GL_W = gauss_nodes(10)
_MAX_PHASE = 1.0
_RESCALE = 1e100


@dataclass(frozen=True)
class WeylDisc:
    center: complex
    radius: float
    x: float
    y: float
    lam: complex

    def contains(self, m: complex, slack: float = 0.0) -> bool:
        return abs(m - self.center) <= self.radius + slack

    def contains_disc(self, other: "WeylDisc", slack: float = 1e-10) -> bool:
        return abs(other.center - self.center) + other.radius <= self.radius + slack


class _DiscAccumulator:
    """Propagates ``phi_x, theta_x`` and ``int |theta_x|^2`` in a shared scale."""

    def __init__(self, coeffs: Coefficients, x: float, lam: complex, max_phase: float = _MAX_PHASE):
        if not complex(lam).imag > 0:
            raise ValueError("Weyl discs need Im(lam) > 0")
        self.coeffs = coeffs
        self.x = float(x)
        self.lam = complex(lam)
        self.max_phase = max_phase
        self.y = self.x
        self.state = [1 + 0j, 0j, 0j, 1 + 0j]  # phi_u, phi_pu, theta_u, theta_pu
        self.log_scale = 0.0
        self.int_theta = 0.0

    def advance(self, y: float) -> None:
        if y <= self.y:
            return
        edges, ip, q = substeps(self.coeffs, self.y, y, self.lam, self.max_phase)
        h = np.diff(edges)
        w2 = (self.lam - q) * ip
        c, s = _cos_sinc(w2, h)
        n = h.size
        th_u0 = np.empty(n, dtype=complex)
        th_p0 = np.empty(n, dtype=complex)
        logs = np.empty(n)
        pu, pp, tu, tp = self.state
        L = self.log_scale
        zq = (self.lam - q).tolist()
        cl, sl, ipl = c.tolist(), s.tolist(), ip.tolist()
        for k in range(n):
            th_u0[k] = tu
            th_p0[k] = tp
            logs[k] = L
            ck, a12, a21 = cl[k], ipl[k] * sl[k], -zq[k] * sl[k]
            pu, pp = ck * pu + a12 * pp, a21 * pu + ck * pp
            tu, tp = ck * tu + a12 * tp, a21 * tu + ck * tp
            mag = max(abs(pu), abs(pp), abs(tu), abs(tp))
            if mag > _RESCALE:
                pu, pp, tu, tp = pu / mag, pp / mag, tu / mag, tp / mag
                L += math.log(mag)
        cn, sn = _cos_sinc(w2[:, None], h[:, None] * _GL_X[None, :])
        u_nodes = cn * th_u0[:, None] + ip[:, None] * sn * th_p0[:, None]
        pieces = h * ((np.abs(u_nodes) ** 2) @ _GL_W)
        added = float(np.sum(pieces * np.exp(2.0 * (logs - L))))
        self.int_theta = self.int_theta * math.exp(2.0 * (self.log_scale - L)) + added
        self.log_scale = L
        self.state = [pu, pp, tu, tp]
        self.y = float(y)

    def disc(self) -> WeylDisc:
        pu, pp, tu, tp = self.state
        area = self.lam.imag * self.int_theta
        bracket = pu * np.conj(tp) - pp * np.conj(tu)
        center = -bracket / (2j * area)
        radius = math.exp(-2.0 * self.log_scale - math.log(2.0 * area))
        return WeylDisc(complex(center), radius, self.x, self.y, self.lam)


def weyl_disc(coeffs: Coefficients, x: float, lam: complex, y: float) -> WeylDisc:
    """Disc of ``m``-values for the interval ``[x, y]``."""
    if not y > x:
        raise ValueError("need y > x")
    acc = _DiscAccumulator(coeffs, x, lam)
    acc.advance(y)
    return acc.disc()


def weyl_discs(coeffs: Coefficients, x: float, lam: complex, ys) -> list[WeylDisc]:
    """Discs for an increasing sequence of truncation points, sharing one sweep."""
    acc = _DiscAccumulator(coeffs, x, lam)
    out = []
    for y in ys:
        if not y > acc.y:
            raise ValueError("ys must be increasing and > x")
        acc.advance(y)
        out.append(acc.disc())
    return out


def weyl_limit(
    coeffs: Coefficients,
    x: float,
    lam: complex,
    tol: float = 1e-10,
    y_max: float | None = None,
) -> WeylDisc:
    """Shrink the Weyl disc by doubling ``y - x`` until ``radius < tol``.

    Raises :class:`LimitCircleSuspectedError` when three consecutive doublings
    each shrink the radius by less than 10%.
    """
    acc = _DiscAccumulator(coeffs, x, lam)
    span_max = (y_max - x) if y_max is not None else 2.0**24
    span = 2.0
    stalls = 0
    prev = None
    while True:
        acc.advance(x + span)
        disc = acc.disc()
        if disc.radius < tol:
            return disc
        if prev is not None:
            stalls = stalls + 1 if disc.radius > 0.9 * prev.radius else 0
            if stalls >= 3:
                raise LimitCircleSuspectedError(
                    f"disc radius stalled at {disc.radius:.3g} (y={disc.y:g})"
                )
        prev = disc
        span *= 2.0
        if span > span_max:
            raise NumericalError(
                f"Weyl disc radius {disc.radius:.3g} above tol {tol:g} at y={disc.y:g}"
            )


def m_disc(coeffs: Coefficients, x: float, lam: complex, tol: float = 1e-10, y_max: float | None = None) -> complex:
    """Limit-point m-function ``m(x, lam)`` as the limit of Weyl disc centers."""
    return weyl_limit(coeffs, x, lam, tol, y_max).center


def _mobius_steps(coeffs, a, t, lam):
    lo, hi = (a, t) if t >= a else (t, a)
    edges, ip, q = substeps(coeffs, lo, hi, lam, _MAX_PHASE)
    mats = cell_transfers(ip, q, lam, np.diff(edges))
    return edges, mats


def riccati_path(coeffs: Coefficients, m_a: complex, a: float, t: float, lam: complex):
    """m-values at every substep boundary between ``a`` and ``t`` (inclusive).

    Uses the exact Moebius action of each cell transfer matrix,
    ``m -> (T21 + T22 m) / (T11 + T12 m)``.  Returned positions run from
    ``a`` to ``t``.
    """
    lam = complex(lam)
    if t == a:
        return np.array([a]), np.array([complex(m_a)])
    edges, mats = _mobius_steps(coeffs, a, t, lam)
    forward = t > a
    order = range(mats.shape[0]) if forward else range(mats.shape[0] - 1, -1, -1)
    m = complex(m_a)
    ms = [m]
    for k in order:
        T = mats[k]
        if forward:
            num, den = T[1, 0] + T[1, 1] * m, T[0, 0] + T[0, 1] * m
            scale = abs(T[0, 0]) + abs(T[0, 1] * m)
        else:
            num, den = -T[1, 0] + T[0, 0] * m, T[1, 1] - T[0, 1] * m
            scale = abs(T[1, 1]) + abs(T[0, 1] * m)
        if abs(den) < 1e-12 * scale:
            raise PoleCrossingError(f"m-function pole between {a} and {t} at lam={lam}")
        m = complex(num / den)
        ms.append(m)
    xs = edges if forward else edges[::-1]
    return np.asarray(xs, dtype=float), np.array(ms)


def riccati_propagate(
    coeffs: Coefficients,
    m_a: complex,
    a: float,
    t: float,
    lam: complex,
    method: str = "mobius",
) -> complex:
    """Carry ``m(a, lam)`` to ``m(t, lam)`` along ``m' = q - lam - m^2 / p``.

    ``method="mobius"`` composes exact cell Moebius maps; ``method="ode"``
    integrates the Riccati equation cell by cell with an adaptive
    Runge-Kutta scheme and serves as an independent check.
    """
    if method == "mobius":
        return complex(riccati_path(coeffs, m_a, a, t, lam)[1][-1])
    if method != "ode":
        raise ValueError(f"unknown method {method!r}")
    lam = complex(lam)
    lo, hi = (a, t) if t >= a else (t, a)
    edges, ip, q = coeffs.segments(lo, hi)
    idx = range(ip.size) if t >= a else range(ip.size - 1, -1, -1)
    m = complex(m_a)
    for k in idx:
        span = (edges[k], edges[k + 1]) if t >= a else (edges[k + 1], edges[k])
        ipk, qk = ip[k], q[k]
        sol = _scipy_ivp(
            lambda _x, y: qk - lam - ipk * y * y,
            span,
            np.array([m]),
            method="DOP853",
            rtol=1e-13,
            atol=1e-14,
        )
        if not sol.success:
            raise NumericalError(sol.message)
        m = complex(sol.y[0, -1])
    return m


def m_convergence_experiment(
    target: Coefficients,
    n_grid,
    x_grid,
    lam_grid,
    final_tol: float = 1e-3,
    slack: float = 0.1,
    m_tol: float = 1e-10,
    mapper=None,
) -> dict:
    """Uniform convergence of m-functions under mollification of ``target``.

    For each ``n`` the sup over ``x_grid x lam_grid`` of ``|m_n - m_0|`` is
    recorded together with the smallest ``Im m_n`` and a bounding box of all
    m-values.  ``passed`` requires the sup to be nonincreasing up to the
    relative ``slack`` and below ``final_tol`` at the last ``n``.  ``mapper``
    (an ordered ``map``) lets the grid points run in parallel.
    """
    run = mapper if mapper is not None else (lambda fn, items: list(map(fn, items)))
    x_grid = [float(v) for v in x_grid]
    lam_grid = [complex(v) for v in lam_grid]
    pairs = [(x, lam) for x in x_grid for lam in lam_grid]
    shape = (len(x_grid), len(lam_grid))

    def grid(coeffs):
        return np.array(run(lambda p: m_disc(coeffs, p[0], p[1], m_tol), pairs)).reshape(shape)

    m0 = grid(target)
    sups, im_mins, pointwise = [], [], []
    all_m = [m0.ravel()]
    for n in n_grid:
        mn = grid(mollify_sequence(target, int(n)))
        diff = np.abs(mn - m0)
        sups.append(float(diff.max()))
        pointwise.append(diff.max(axis=0).tolist())
        im_mins.append(float(mn.imag.min()))
        all_m.append(mn.ravel())
    allm = np.concatenate(all_m)
    monotone = all(b <= (1 + slack) * a for a, b in zip(sups[:-1], sups[1:]))
    im_floor = float(min(im_mins + [float(m0.imag.min())]))
    return {
        "n": [int(n) for n in n_grid],
        "sup_diff": sups,
        "sup_diff_by_lambda": pointwise,
        "im_m_min_by_n": im_mins,
        "im_m_min": im_floor,
        "box": {
            "re_min": float(allm.real.min()),
            "re_max": float(allm.real.max()),
            "im_min": float(allm.imag.min()),
            "im_max": float(allm.imag.max()),
        },
        "monotone": bool(monotone),
        "passed": bool(monotone and sups[-1] <= final_tol and im_floor > 0),
    }
