"""Ready-made coefficient sets used by the demos, tests and CLI."""

from __future__ import annotations

import numpy as np

from .coefficients import (
    PeriodicBackground,
    PiecewiseCoefficients,
    Perturbation,
    Profile,
    sample_smooth,
)
from .scattering import ScatteringProblem


def free_background() -> PeriodicBackground:
    return PeriodicBackground(PiecewiseCoefficients.constant(1.0, 0.0))


def kronig_penney(height: float = 10.0, split: float = 0.5, inv_p=(1.0, 1.0)) -> PeriodicBackground:
    """Period cell with ``q = height`` on ``[0, split)`` and ``0`` on ``[split, 1)``."""
    return PeriodicBackground(PiecewiseCoefficients([0.0, split, 1.0], list(inv_p), [height, 0.0]))


def step_p_background(p_left: float = 1.0, p_right: float = 4.0, q: float = 0.0) -> PeriodicBackground:
    return PeriodicBackground(
        PiecewiseCoefficients([0.0, 0.5, 1.0], [1.0 / p_left, 1.0 / p_right], [q, q])
    )


def square_barrier(height: float = 1.0, width: float = 1.0, background=None) -> ScatteringProblem:
    """``g = height`` on ``[0, width]``, ``f = 0``."""
    bg = background if background is not None else free_background()
    pert = Perturbation(Profile.zero(0.0, width), Profile.indicator(0.0, width, height), width)
    return ScatteringProblem(bg, pert)


def bump_p(amplitude: float = 1.0):
    """``p = 1 / (1 + amplitude sin^2(pi x))`` on ``[0, 1]``, 1 elsewhere.

    Returns ``(p, dp, d2p)`` as vectorized callables.  ``p <= 1`` keeps
    ``f = 1/p - 1 >= 0``.
    """

    def inside(x):
        x = np.asarray(x, dtype=float)
        return (x >= 0.0) & (x <= 1.0)

    def s(x):
        return amplitude * np.sin(np.pi * x) ** 2

    def ds(x):
        return amplitude * np.pi * np.sin(2 * np.pi * x)

    def d2s(x):
        return amplitude * 2 * np.pi**2 * np.cos(2 * np.pi * x)

    def p(x):
        return np.where(inside(x), 1.0 / (1.0 + s(x)), 1.0)

    def dp(x):
        return np.where(inside(x), -ds(x) / (1.0 + s(x)) ** 2, 0.0)

    def d2p(x):
        one = 1.0 + s(x)
        return np.where(inside(x), -d2s(x) / one**2 + 2 * ds(x) ** 2 / one**3, 0.0)

    return p, dp, d2p


def smooth_p_problem(p, q, n_cells: int = 4000, domain=(0.0, 1.0)) -> ScatteringProblem:
    """Free-background problem with smooth ``p`` and ``q`` sampled on ``domain``."""
    a, b = domain
    f = sample_smooth(lambda x: 1.0 / float(p(x)) - 1.0, domain, n_cells)
    g = sample_smooth(lambda x: float(q(x)), domain, n_cells)
    f = Profile(f.breakpoints, np.maximum(f.values, 0.0))
    return ScatteringProblem(free_background(), Perturbation(f, g, float(b)))


def step_q_target(height: float = 2.0) -> PiecewiseCoefficients:
    """Step coefficients on the line: ``q = height`` on ``[0, 1)``, ``1/p = 2`` on ``[0.5, 1.5)``."""
    return PiecewiseCoefficients(
        [-1.0, 0.0, 0.5, 1.0, 1.5, 2.5],
        [1.0, 1.0, 2.0, 2.0, 1.0],
        [0.0, height, height, 0.0, 0.0],
    )
