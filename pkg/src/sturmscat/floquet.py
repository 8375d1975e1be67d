"""Monodromy, discriminant, band structure and Floquet solutions of a 1-periodic background."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .coefficients import PeriodicBackground
from .errors import BandEdgeError, DegenerateMonodromyError, NormalizationError
from .propagator import _cos_sinc, cell_transfers, transfer, _chain

__all__ = [
    "monodromy",
    "discriminant",
    "discriminant_and_derivative",
    "StabilityInterval",
    "band_edges",
    "multipliers",
    "floquet_vectors",
    "floquet_solution",
    "FloquetData",
    "floquet_data",
    "m0_floquet",
    "EDGE_THRESHOLD",
]

EDGE_THRESHOLD = 1e-12
_OFFDIAG_THRESHOLD = 1e-12


def monodromy(bg: PeriodicBackground, z: complex) -> np.ndarray:
    """Transfer matrix ``g_0(z)`` of one period, from ``x = 0`` to ``x = 1``."""
    c = bg.cell
    return _chain(cell_transfers(c.inv_p, c.q, z, np.diff(c.breakpoints)))


def discriminant(bg: PeriodicBackground, z: complex) -> complex:
    """``D(z) = tr g_0(z)``."""
    g = monodromy(bg, z)
    return complex(g[0, 0] + g[1, 1])


def _dsinc(w2, h):
    """Derivative of ``sin(sqrt(w2) h) / sqrt(w2)`` with respect to ``w2``."""
    w2 = np.asarray(w2, dtype=complex)
    c, s = _cos_sinc(w2, h)
    x = w2 * h * h
    small = np.abs(x) < 1e-2
    safe = np.where(small, 1.0, w2)
    direct = (h * c - s) / (2.0 * safe)
    series = np.zeros_like(w2)
    term_pow = np.ones_like(w2)
    fact = 6.0  # (2k+1)! for k = 1
    for k in range(1, 8):
        series = series + (-1) ** k * k * h ** (2 * k + 1) * term_pow / fact
        term_pow = term_pow * w2
        fact *= (2 * k + 2) * (2 * k + 3)
    return np.where(small, series, direct), c, s


def discriminant_and_derivative(bg: PeriodicBackground, z: complex):
    """``(D(z), dD/dz)`` by forward accumulation of cell derivatives."""
    cell = bg.cell
    h = np.diff(cell.breakpoints)
    ip, q = cell.inv_p, cell.q
    w2 = (z - q) * ip
    ds, c, s = _dsinc(w2, h)
    m = np.eye(2, dtype=complex)
    dm = np.zeros((2, 2), dtype=complex)
    for i in range(h.size):
        g = np.array([[c[i], ip[i] * s[i]], [-(z - q[i]) * s[i], c[i]]])
        dc = -0.5 * h[i] * s[i] * ip[i]
        dg = np.array(
            [[dc, ip[i] ** 2 * ds[i]], [-s[i] - w2[i] * ds[i], dc]], dtype=complex
        )
        dm = dg @ m + g @ dm
        m = g @ m
    return complex(m[0, 0] + m[1, 1]), complex(dm[0, 0] + dm[1, 1])


@dataclass(frozen=True)
class StabilityInterval:
    """Maximal open interval ``(c, d)`` with ``|D(E)| < 2``.

    ``edge_c`` and ``edge_d`` record whether ``D`` equals +2 or -2 at the
    respective ends.
    """

    c: float
    d: float
    edge_c: int
    edge_d: int
    D_c: float = float("nan")
    D_d: float = float("nan")

    def __post_init__(self):
        if not self.c < self.d:
            raise ValueError("stability interval needs c < d")

    @property
    def width(self) -> float:
        return self.d - self.c

    def contains(self, z: complex) -> bool:
        return self.c < z.real < self.d

    def interior_grid(self, n: int, margin: float = 1e-6) -> np.ndarray:
        pad = margin * self.width
        return np.linspace(self.c + pad, self.d - pad, n)


def _real_D(bg, E):
    return discriminant(bg, complex(E)).real


def band_edges(
    bg: PeriodicBackground,
    e_min: float,
    e_max: float,
    scan_step: float = 0.05,
    tol: float = 1e-10,
    touch_tol: float = 1e-9,
) -> list[StabilityInterval]:
    """Stability intervals lying completely inside ``[e_min, e_max]``.

    Crossings of ``D = +2`` and ``D = -2`` are found by a sign-change scan and
    refined by bracketing to ``tol``.  Extrema of ``D`` are located from the
    analytic derivative; an extremum with ``|D| = 2`` (within ``touch_tol``)
    is a closed gap and splits two bands, and an extremum with ``|D| > 2``
    whose crossings fell between two scan points is resolved on both sides.
    Bands that are cut by ``e_min`` or ``e_max`` are not reported.
    """
    if not e_min < e_max:
        raise ValueError("need e_min < e_max")
    if scan_step <= 0:
        raise ValueError("scan_step must be positive")
    n = max(2, int(math.ceil((e_max - e_min) / scan_step)) + 1)
    grid = np.linspace(e_min, e_max, n)
    vals = np.array([discriminant_and_derivative(bg, complex(E)) for E in grid])
    D = vals[:, 0].real
    dD = vals[:, 1].real

    def root(fun, a, b):
        return brentq(fun, a, b, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=500)

    edges: list[tuple[float, int]] = []
    for level in (2.0, -2.0):
        f = D - level
        for i in range(n - 1):
            if f[i] == 0.0:
                edges.append((float(grid[i]), int(level)))
            elif f[i] * f[i + 1] < 0:
                edges.append((root(lambda e: _real_D(bg, e) - level, grid[i], grid[i + 1]), int(level)))
        if f[-1] == 0.0:
            edges.append((float(grid[-1]), int(level)))

    deriv = lambda e: discriminant_and_derivative(bg, complex(e))[1].real  # noqa: E731
    for i in range(n - 1):
        if dD[i] == 0.0 or dD[i] * dD[i + 1] >= 0:
            continue
        e_star = root(deriv, grid[i], grid[i + 1])
        d_star = _real_D(bg, e_star)
        level = 2.0 if d_star > 0 else -2.0
        excess = abs(d_star) - 2.0
        if abs(excess) <= touch_tol:
            edges.append((e_star, int(level)))
        elif excess > 0:
            lo, hi = grid[i], grid[i + 1]
            g = lambda e: abs(_real_D(bg, e)) - 2.0  # noqa: E731
            if g(lo) < 0 and g(hi) < 0:
                warnings.warn(
                    f"narrow gap near E={e_star:.6g} resolved inside one scan step",
                    RuntimeWarning,
                    stacklevel=2,
                )
                edges.append((root(lambda e: _real_D(bg, e) - level, lo, e_star), int(level)))
                edges.append((root(lambda e: _real_D(bg, e) - level, e_star, hi), int(level)))

    edges.sort()
    bands: list[StabilityInterval] = []
    for (c, tc), (d, td) in zip(edges[:-1], edges[1:]):
        if d - c <= 2 * tol:
            continue
        mid = 0.5 * (c + d)
        if abs(_real_D(bg, mid)) < 2.0:
            bands.append(StabilityInterval(c, d, tc, td, _real_D(bg, c), _real_D(bg, d)))
    if any(b.width < scan_step for b in bands):
        warnings.warn(
            "a band narrower than scan_step was found; narrower ones may be missed",
            RuntimeWarning,
            stacklevel=2,
        )
    return bands


def _gap_term(g: np.ndarray) -> complex:
    """``D**2 - 4`` from the entries of a unimodular ``g``, free of cancellation near ``+-I``."""
    return complex((g[0, 0] - g[1, 1]) ** 2 + 4.0 * g[0, 1] * g[1, 0])


def _stable_roots(D: complex, gap: complex | None = None):
    """Roots of ``rho**2 - D rho + 1``; the larger one first."""
    w = np.sqrt(complex(D) * D - 4.0 if gap is None else gap)
    r1 = 0.5 * (D + w) if abs(D + w) >= abs(D - w) else 0.5 * (D - w)
    return r1, 1.0 / r1


def _label(D: complex, z: complex, gap: complex | None = None):
    r_big, r_small = _stable_roots(D, gap)
    if z.imag > 0:
        return r_small, r_big
    return r_big, r_small


def multipliers(bg: PeriodicBackground, z: complex):
    """Floquet multipliers ``(rho_plus, rho_minus)``.

    For ``Im z > 0`` ``|rho_plus| < 1``; for ``Im z < 0`` the labels are the
    analytic continuation through the band (``|rho_plus| > 1``).  Real ``z``
    inherit the labels from ``z + i eta`` with ``eta = 1e-8 max(1, |z|)``.
    """
    z = complex(z)
    g = monodromy(bg, z)
    D = complex(g[0, 0] + g[1, 1])
    gap = _gap_term(g)
    if abs(gap) < EDGE_THRESHOLD:
        raise BandEdgeError(f"multipliers collide at z={z}: D={D}")
    if z.imag != 0.0:
        return _label(D, z, gap)
    eta = 1e-8 * max(1.0, abs(z))
    g_ref = monodromy(bg, z + 1j * eta)
    ref_plus, _ = _label(complex(g_ref[0, 0] + g_ref[1, 1]), z + 1j * eta, _gap_term(g_ref))
    r1, r2 = _stable_roots(D, gap)
    if abs(r1 - ref_plus) <= abs(r2 - ref_plus):
        return r1, r2
    return r2, r1


def _eigvec(g: np.ndarray, rho: complex) -> np.ndarray:
    if abs(g[0, 1]) > _OFFDIAG_THRESHOLD:
        return np.array([1.0, (rho - g[0, 0]) / g[0, 1]], dtype=complex)
    if abs(g[1, 0]) > _OFFDIAG_THRESHOLD:
        return np.array([(rho - g[1, 1]) / g[1, 0], 1.0], dtype=complex)
    raise DegenerateMonodromyError("monodromy is numerically scalar")


@dataclass(frozen=True, eq=False)
class FloquetData:
    z: complex
    monodromy: np.ndarray
    rho_plus: complex
    rho_minus: complex
    v_plus: np.ndarray
    v_minus: np.ndarray


def floquet_data(bg: PeriodicBackground, z: complex) -> FloquetData:
    z = complex(z)
    g = monodromy(bg, z)
    rp, rm = multipliers(bg, z)
    return FloquetData(z, g, rp, rm, _eigvec(g, rp), _eigvec(g, rm))


def floquet_vectors(bg: PeriodicBackground, z: complex):
    """Monodromy eigenvectors ``(v_plus, v_minus)``, first component 1 when possible."""
    fd = floquet_data(bg, z)
    return fd.v_plus, fd.v_minus


def floquet_solution(bg: PeriodicBackground, z: complex, x: float, sign: int = +1, data: FloquetData | None = None):
    """State of ``phi_+`` (``sign=+1``) or ``phi_-`` at ``x``.

    Uses ``phi(n + xi) = rho**n T(0, xi) v`` with ``xi`` in ``[0, 1)``.
    """
    fd = data if data is not None else floquet_data(bg, z)
    rho, v = (fd.rho_plus, fd.v_plus) if sign > 0 else (fd.rho_minus, fd.v_minus)
    n = math.floor(x)
    xi = x - n
    state = transfer(bg, 0.0, xi, fd.z) @ v if xi > 0 else v.copy()
    return state * rho ** n


def m0_floquet(bg: PeriodicBackground, z: complex) -> complex:
    """Half-line m-function of the background at ``x = 0``: ``p0 phi_+' / phi_+``."""
    z = complex(z)
    if z.imag <= 0:
        raise ValueError("m0_floquet needs Im z > 0")
    v, _ = floquet_vectors(bg, z)
    if abs(v[0]) < 1e-13:
        raise NormalizationError("phi_+(0, z) vanishes")
    return complex(v[1] / v[0])
