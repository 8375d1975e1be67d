"""Exact propagation of ``(u, p u')`` through piecewise-constant coefficients.

On a cell with constant ``1/p`` and ``q`` the first-order system

    u' = (1/p) (p u'),    (p u')' = (q - z) u

has the transfer matrix

    [[cos(w h),                 (1/p) sin(w h) / w],
     [-(w / (1/p)) sin(w h),    cos(w h)          ]],   w**2 = (z - q) / p,

which is even in ``w``; no branch choice is needed.  States are complex arrays
of shape ``(2,)`` holding ``(u, p u')``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coefficients import Coefficients

__all__ = [
    "cell_transfer",
    "cell_transfers",
    "transfer",
    "inverse_transfer",
    "solve_ivp",
    "Trajectory",
    "wronskian",
    "substeps",
    "gauss_nodes",
    "solution_l2",
]

_SERIES_SWITCH = 1e-4


def _cos_sinc(w2, h):
    """``cos(sqrt(w2) h)`` and ``sin(sqrt(w2) h) / sqrt(w2)`` elementwise."""
    w2 = np.asarray(w2, dtype=complex)
    h = np.asarray(h, dtype=float)
    om = np.sqrt(w2)
    arg = om * h
    small = np.abs(arg) < _SERIES_SWITCH
    safe_om = np.where(small, 1.0, om)
    c = np.cos(arg)
    s = np.where(small, h * (1.0 - w2 * h * h / 6.0), np.sin(arg) / safe_om)
    return c, s


def cell_transfers(inv_p, q, z, h) -> np.ndarray:
    """Vectorized :func:`cell_transfer`; returns shape ``(n, 2, 2)``."""
    inv_p = np.asarray(inv_p, dtype=float)
    q = np.asarray(q, dtype=float)
    h = np.asarray(h, dtype=float)
    w2 = (z - q) * inv_p
    c, s = _cos_sinc(w2, h)
    out = np.empty(np.broadcast(inv_p, h).shape + (2, 2), dtype=complex)
    out[..., 0, 0] = c
    out[..., 0, 1] = inv_p * s
    # (w / inv_p) sin(w h) = (w**2 / inv_p) * sinc-part; w**2 / inv_p = z - q
    out[..., 1, 0] = -(z - q) * s
    out[..., 1, 1] = c
    return out


def cell_transfer(inv_p: float, q: float, z: complex, h: float) -> np.ndarray:
    """Transfer matrix of one constant cell of length ``h``."""
    if h < 0 or inv_p <= 0:
        raise ValueError("need h >= 0 and inv_p > 0")
    return cell_transfers(np.array([inv_p]), np.array([q]), z, np.array([h]))[0]


def substeps(coeffs: Coefficients, a: float, b: float, z: complex, max_phase: float = np.inf):
    """Cells of ``[a, b]`` split so that ``|w h| <= max_phase`` on every piece.

    Returns ``(edges, inv_p, q)`` like :meth:`Coefficients.segments`.
    """
    edges, inv_p, q = coeffs.segments(a, b)
    if not np.isfinite(max_phase) or inv_p.size == 0:
        return edges, inv_p, q
    h = np.diff(edges)
    phase = np.abs(np.sqrt((z - q) * inv_p + 0j)) * h
    k = np.maximum(1, np.ceil(phase / max_phase)).astype(int)
    if np.all(k == 1):
        return edges, inv_p, q
    pieces = [np.linspace(edges[i], edges[i + 1], k[i] + 1)[:-1] for i in range(h.size)]
    new_edges = np.concatenate(pieces + [edges[-1:]])
    return new_edges, np.repeat(inv_p, k), np.repeat(q, k)


def _chain(mats: np.ndarray) -> np.ndarray:
    """Ordered product ``mats[n-1] @ ... @ mats[0]`` by pairwise reduction."""
    if mats.shape[0] == 0:
        return np.eye(2, dtype=complex)
    while mats.shape[0] > 1:
        if mats.shape[0] % 2:
            tail = mats[-1:]
            mats = mats[:-1]
        else:
            tail = None
        mats = mats[1::2] @ mats[0::2]
        if tail is not None:
            mats = np.concatenate((mats, tail))
    return mats[0]


def inverse_transfer(m: np.ndarray) -> np.ndarray:
    """Exact inverse of a determinant-one 2x2 matrix (adjugate)."""
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]], dtype=complex)


def transfer(coeffs: Coefficients, x0: float, x1: float, z: complex) -> np.ndarray:
    """Transfer matrix mapping ``(u, pu')(x0)`` to ``(u, pu')(x1)``.

    ``x1 < x0`` is allowed and returns the inverse of the forward matrix.
    """
    if x1 < x0:
        return inverse_transfer(transfer(coeffs, x1, x0, z))
    if x1 == x0:
        return np.eye(2, dtype=complex)
    # split cells only far enough to keep cos/sin of complex argument finite
    edges, inv_p, q = substeps(coeffs, x0, x1, z, max_phase=200.0)
    return _chain(cell_transfers(inv_p, q, z, np.diff(edges)))


@dataclass(frozen=True, eq=False)
class Trajectory:
    xs: np.ndarray
    states: np.ndarray  # shape (len(xs), 2): columns u, p u'

    @property
    def u(self) -> np.ndarray:
        return self.states[:, 0]

    @property
    def pu(self) -> np.ndarray:
        return self.states[:, 1]


def solve_ivp(coeffs: Coefficients, x0: float, init, xs, z: complex) -> Trajectory:
    """Propagate the state ``init`` given at ``x0`` to every point of ``xs``.

    Points on either side of ``x0`` are reached by walking outward from
    ``x0``, so each state equals ``transfer(coeffs, x0, x, z) @ init`` up to
    rounding.
    """
    xs = np.asarray(xs, dtype=float)
    if np.any(np.diff(xs) < 0):
        raise ValueError("xs must be sorted")
    init = np.asarray(init, dtype=complex)
    out = np.empty((xs.size, 2), dtype=complex)
    right = np.flatnonzero(xs >= x0)
    left = np.flatnonzero(xs < x0)[::-1]
    for order in (right, left):
        state, pos = init.copy(), x0
        for k in order:
            state = transfer(coeffs, pos, xs[k], z) @ state
            pos = xs[k]
            out[k] = state
    return Trajectory(xs, out)


def wronskian(a, b):
    """Modified Wronskian ``u_a conj(pu_b) - pu_a conj(u_b)``.

    Works on single states or stacked ``(..., 2)`` arrays.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    return a[..., 0] * np.conj(b[..., 1]) - a[..., 1] * np.conj(b[..., 0])


def gauss_nodes(n: int = 10):
    """Gauss-Legendre nodes and weights on ``[0, 1]``."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def solution_l2(coeffs: Coefficients, x0: float, x1: float, init, z: complex, max_phase: float = 1.0) -> float:
    """``int_{x0}^{x1} |u|^2`` for the solution with state ``init`` at ``x0``.

    Each piece with ``|w h| <= max_phase`` is integrated by 10-point
    Gauss-Legendre using the closed-form solution, which is analytic there.
    """
    if x1 < x0:
        raise ValueError("need x1 >= x0")
    edges, ip, q = substeps(coeffs, x0, x1, z, max_phase)
    h = np.diff(edges)
    if h.size == 0:
        return 0.0
    mats = cell_transfers(ip, q, z, h)
    starts = np.empty((h.size, 2), dtype=complex)
    state = np.asarray(init, dtype=complex)
    for k in range(h.size):
        starts[k] = state
        state = mats[k] @ state
    gx, gw = gauss_nodes(10)
    c, s = _cos_sinc(((z - q) * ip)[:, None], h[:, None] * gx[None, :])
    u = c * starts[:, :1] + ip[:, None] * s * starts[:, 1:]
    return float(np.sum(h * ((np.abs(u) ** 2) @ gw)))
