from __future__ import annotations

import cmath
import math

import numpy as np
import pytest

from sturmscat.coefficients import PiecewiseCoefficients, l1_norm
from sturmscat.errors import BracketError
from sturmscat.asymptotics import (
    growth_asymptotics,
    m_asymptotics_probe,
    rescaled_m,
    rescaled_problem,
    scaling_bundle,
    sqrt_inv_p_integral,
    weyl_solution_growth,
)
from sturmscat.problems import free_background, kronig_penney, step_p_background
from sturmscat.propagator import transfer
from sturmscat.weyl import m_disc

R_GRID = [1e2, 1e3, 1e4, 1e5, 1e6]


def constant_p(p, q=0.0):
    return PiecewiseCoefficients.constant(1.0 / p, q, -1.0, 1.0)


@pytest.mark.parametrize("r", [1e-2, 1.0, 1e4, 1e8])
def test_free_scaling_bundle(r):
    b = scaling_bundle(free_background(), 0.3, r)
    assert b.f_x_r == pytest.approx(r**-0.5, rel=1e-13)
    assert b.s == pytest.approx(r**-0.5, rel=1e-13)
    assert math.sqrt(r) * b.f_x_r == pytest.approx(1.0, rel=1e-13)


@pytest.mark.parametrize("r", [0.5, 10.0, 1e6])
def test_constant_p_scaling_bundle(r):
    b = scaling_bundle(constant_p(4.0), 0.0, r)
    assert b.f_x_r == pytest.approx(1 / math.sqrt(4.0 * r), rel=1e-13)
    assert math.sqrt(r) * b.f_x_r == pytest.approx(0.5, rel=1e-13)


def test_scaling_identity_and_inverse():
    rng = np.random.default_rng(1)
    for coeffs in (kronig_penney(), step_p_background(1, 4)):
        for r in 10 ** rng.uniform(-2, 7, 10):
            b = scaling_bundle(coeffs, 0.37, r)
            assert b.identity_residual() <= 1e-10
            assert b.P(b.t_tilde) == pytest.approx(b.f_x_r, rel=1e-12)
            assert b.f_tilde(b.f_x_r) == pytest.approx(r, rel=1e-10)
            assert b.s == pytest.approx(1.0 / (r * b.f_x_r), rel=1e-12)


def test_f_tilde_strictly_decreasing():
    b = scaling_bundle(step_p_background(1, 4), 0.2, 1.0)
    vals = [b.f_tilde(t) for t in np.geomspace(1e-3, 10, 40)]
    assert all(v2 < v1 for v1, v2 in zip(vals, vals[1:]))


def test_sqrt_r_f_tends_to_inverse_sqrt_p():
    bg = step_p_background(1, 4)
    for x, limit in [(0.2, 1.0), (0.7, 0.5)]:
        dev = [abs(math.sqrt(r) * scaling_bundle(bg, x, r).f_x_r - limit) for r in [1, 10, 100, 1e3]]
        # exact once the window sits inside one cell, then only rounding remains
        assert all(b <= a + 1e-15 for a, b in zip(dev, dev[1:]))
        assert dev[-1] <= 1e-12


@pytest.mark.parametrize("r", [0.0, -1.0, float("nan"), float("inf")])
def test_scaling_bundle_rejects_bad_r(r):
    with pytest.raises(BracketError):
        scaling_bundle(free_background(), 0.0, r)


def test_free_rescaled_problem_is_free():
    for r in (1.0, 1e3, 1e6):
        rc, energy = rescaled_problem(free_background(), 0.4, r)
        stored = rc.materialize(3.0)
        assert np.allclose(stored.inv_p, 1.0, rtol=1e-13) and np.all(stored.q == 0.0)
        assert energy(2j) == 2j * r


def test_rescaled_potential_integral_identity():
    coeffs = kronig_penney()
    for r in (3.0, 50.0, 1e4):
        rc, _ = rescaled_problem(coeffs, 0.2, r)
        b = rc.bundle
        c = 2.5
        lhs = l1_norm(rc.materialize(c), (0.0, c))
        rhs = b.f_x_r * l1_norm(coeffs, (0.2, c * b.s + 0.2))
        assert lhs == pytest.approx(rhs, rel=1e-12)


def test_rescaled_diffusion_integral_tends_to_window():
    bg, c = step_p_background(1, 4), 1.0
    devs = []
    for r in (1e2, 1e4, 1e6):
        rc, _ = rescaled_problem(bg, 0.45, r)
        devs.append(abs(l1_norm(rc.materialize(c), (0.0, c), "inv_p") - c))
    assert devs[0] > devs[1] > devs[2] or devs[2] <= 1e-12
    assert devs[-1] <= 1e-3


def test_solutions_transport_to_the_rescaled_picture():
    coeffs, x, r, mu = kronig_penney(), 0.3, 40.0, 1 + 0.5j
    rc, energy = rescaled_problem(coeffs, x, r)
    b = rc.bundle
    init = np.array([1.0, 0.7 - 0.2j])
    for t in (0.5, 1.0, 3.0):
        orig = transfer(coeffs, x, b.s * t + x, energy(mu)) @ init
        resc = transfer(rc, 0.0, t, mu) @ np.array([init[0], b.f_x_r * init[1]])
        np.testing.assert_allclose(resc, [orig[0], b.f_x_r * orig[1]], rtol=1e-9)


@pytest.mark.parametrize("r", [1.0, 1e2, 1e6])
def test_free_rescaled_m(r):
    assert rescaled_m(free_background(), 0.0, r, 1j) == pytest.approx(1j * cmath.sqrt(1j), abs=1e-9)


def test_rescaled_m_two_paths():
    rc, _ = rescaled_problem(kronig_penney(), 0.2, 1e4)
    direct = m_disc(rc, 0.0, 1j)
    assert abs(rescaled_m(kronig_penney(), 0.2, 1e4, 1j) / direct - 1) <= 1e-5


def test_rescaled_m_tends_to_free_value():
    devs = [abs(rescaled_m(kronig_penney(), 0.2, r, 1j) - 1j * cmath.sqrt(1j)) for r in R_GRID]
    assert all(b < a for a, b in zip(devs, devs[1:]))


def test_free_probe():
    rows, dec = m_asymptotics_probe(free_background(), 0.3, 1j, R_GRID)
    assert rows[-1].deviation <= 1e-2
    assert all(row.deviation <= 1e-9 for row in rows)
    assert rows[0].target == pytest.approx(1j * cmath.sqrt(1j))


@pytest.mark.parametrize("mu", [1j, 1 + 1j])
def test_constant_p_closed_form(mu):
    p, q = 4.0, 3.0
    coeffs = constant_p(p, q)
    for r in R_GRID:
        exact = 1j * cmath.sqrt(p * (r * mu - q))
        assert m_disc(coeffs, 0.0, r * mu) == pytest.approx(exact, rel=1e-9)
    rows, dec = m_asymptotics_probe(coeffs, 0.0, mu, R_GRID)
    assert rows[0].target == pytest.approx(2j * cmath.sqrt(mu))
    assert dec


@pytest.mark.parametrize("x, p", [(0.25, 1.0), (0.75, 4.0), (1.1, 1.0)])
def test_step_p_uses_the_containing_cell(x, p):
    bg, mu, r = step_p_background(1, 4, q=1.0), 1 + 1j, 1e6
    rows, dec = m_asymptotics_probe(bg, x, mu, R_GRID)
    cell = 1j * cmath.sqrt(p * (r * mu - 1.0)) / math.sqrt(r)
    assert rows[-1].ratio == pytest.approx(cell, rel=1e-6)
    assert rows[-1].target == pytest.approx(1j * cmath.sqrt(mu) * math.sqrt(p))
    assert dec


def test_probe_rejects_breakpoints():
    with pytest.raises(ValueError, match="breakpoint"):
        m_asymptotics_probe(step_p_background(1, 4), 0.5, 1j, R_GRID)


def test_sqrt_inv_p_integral():
    bg = step_p_background(1, 4)
    assert sqrt_inv_p_integral(bg, 0.0, 1.0) == 0.75
    assert sqrt_inv_p_integral(bg, 1.0, 0.0) == -0.75
    assert sqrt_inv_p_integral(bg, 0.3, 0.3) == 0.0


def test_free_weyl_solution():
    xs = [0.5, 1.0, 2.0]
    for row in weyl_solution_growth(free_background(), 1j, xs):
        assert row.log_direct == pytest.approx(1j * cmath.sqrt(1j) * row.x, abs=1e-10)
        assert row.log_exponential == pytest.approx(row.log_direct, abs=1e-10)


def test_growth_routes_agree_on_kronig_penney():
    for lam in (5 + 1j, 30 + 0.5j, 1e4 * (1 + 1j)):
        rows = weyl_solution_growth(kronig_penney(), lam, [0.3, 0.5, 1.0, 2.2])
        assert max(r.relative_gap for r in rows) <= 1e-7


def test_growth_deviation_decreases_for_step_p():
    rows, gap, dec = growth_asymptotics(step_p_background(1, 4, q=1.0), 1j, [0.5, 1.0], R_GRID)
    assert dec and gap <= 1e-7
    first = {x: dev for r, x, _, _, dev in rows if r == R_GRID[0]}
    last = {x: dev for r, x, _, _, dev in rows if r == R_GRID[-1]}
    assert all(last[x] < first[x] for x in (0.5, 1.0))
