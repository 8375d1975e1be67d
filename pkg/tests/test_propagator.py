from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.integrate import quad

from oracles import free_theta_l2, rk4_transfer, rk4_transfer_loop
from sturmscat.coefficients import PiecewiseCoefficients
from sturmscat.problems import free_background, kronig_penney
from sturmscat.propagator import (
    cell_transfer,
    inverse_transfer,
    solution_l2,
    solve_ivp,
    transfer,
    wronskian,
)


def test_cell_at_pi_squared_is_minus_identity():
    np.testing.assert_allclose(cell_transfer(1.0, 0.0, math.pi**2, 1.0), -np.eye(2), atol=1e-15)


@pytest.mark.parametrize("inv_p, q, h", [(1.0, 0.0, 1.0), (2.5, -3.0, 0.3), (0.2, 7.0, 4.0)])
def test_zero_frequency_is_shear(inv_p, q, h):
    np.testing.assert_allclose(cell_transfer(inv_p, q, q, h), [[1.0, inv_p * h], [0.0, 1.0]], rtol=1e-15)


def test_negative_energy_is_hyperbolic():
    T = cell_transfer(1.0, 0.0, -1.0, 1.0)
    c, s = math.cosh(1.0), math.sinh(1.0)
    np.testing.assert_allclose(T, [[c, s], [s, c]], rtol=1e-14)
    np.testing.assert_allclose(T, rk4_transfer([0.0, 1.0], [1.0], [0.0], -1.0), rtol=1e-10)


@pytest.mark.parametrize("phase", [1e-6, 5e-5, 9.9e-5, 1.01e-4, 1e-3])
def test_series_switch_is_seamless(phase):
    # same matrix from the trigonometric form evaluated directly
    z = 3.0 + (phase / 0.5) ** 2
    T = cell_transfer(1.0, 3.0, z, 0.5)
    w = math.sqrt(z - 3.0)
    ref = [[math.cos(w * 0.5), math.sin(w * 0.5) / w], [-w * math.sin(w * 0.5), math.cos(w * 0.5)]]
    np.testing.assert_allclose(T, ref, rtol=1e-12, atol=1e-16)


def test_rk4_oracle_forms_agree():
    args = ([0.0, 0.4, 1.0], [1.0, 2.0], [3.0, -1.0], 2.0 + 0.5j)
    np.testing.assert_allclose(rk4_transfer(*args, n_steps=300), rk4_transfer_loop(*args, n_steps=300), rtol=1e-13)


def test_transfer_empty_interval_is_identity():
    assert np.array_equal(transfer(kronig_penney(), 0.3, 0.3, 2.0 + 1j), np.eye(2))


@pytest.mark.parametrize("E", [0.5, 4.0, 20.0, 100.0])
def test_free_unit_interval(E):
    k = math.sqrt(E)
    ref = [[math.cos(k), math.sin(k) / k], [-k * math.sin(k), math.cos(k)]]
    np.testing.assert_allclose(transfer(free_background(), 0.0, 1.0, E), ref, rtol=1e-13, atol=1e-14)


def test_kronig_penney_cell_against_oracle():
    bg = kronig_penney()
    T = transfer(bg, 0.0, 1.0, 1.0)
    product = cell_transfer(1.0, 0.0, 1.0, 0.5) @ cell_transfer(1.0, 10.0, 1.0, 0.5)
    np.testing.assert_allclose(T, product, rtol=1e-14)
    ref = rk4_transfer([0.0, 0.5, 1.0], [1.0, 1.0], [10.0, 0.0], 1.0)
    assert np.linalg.norm(T - ref) / np.linalg.norm(T) <= 1e-8
    assert abs(np.linalg.det(T) - 1) <= 1e-12


@pytest.mark.parametrize("z", [1.0, 5.0 + 1j, -4.0 - 0.5j, 30.0])
def test_group_property(z):
    bg = kronig_penney()
    for x0, x1, x2 in [(0.0, 0.7, 2.3), (-1.2, 0.1, 0.25), (0.5, 0.5, 3.0)]:
        lhs = transfer(bg, x1, x2, z) @ transfer(bg, x0, x1, z)
        np.testing.assert_allclose(lhs, transfer(bg, x0, x2, z), rtol=1e-10, atol=1e-10)


def test_long_interval_stays_unimodular():
    # energies in the two lowest bands, where the entries stay moderate
    bg = kronig_penney()
    for z in (6.0, 8.0 + 0.01j, 30.0 - 0.01j):
        assert abs(np.linalg.det(transfer(bg, 0.0, 100.0, z)) - 1) <= 1e-10


def test_inverse_transfer_is_adjugate():
    T = transfer(kronig_penney(), 0.0, 1.7, 4.0 + 2j)
    np.testing.assert_allclose(inverse_transfer(T) @ T, np.eye(2), atol=1e-12)


def test_reversed_interval_gives_inverse():
    bg, z = kronig_penney(), 2.0 + 0.5j
    np.testing.assert_allclose(transfer(bg, 1.3, -0.2, z) @ transfer(bg, -0.2, 1.3, z), np.eye(2), atol=1e-12)


def test_constant_solution_at_zero_energy():
    traj = solve_ivp(free_background(), 0.0, (1.0, 0.0), np.linspace(-2.0, 3.0, 11), 0.0)
    np.testing.assert_allclose(traj.u, 1.0, rtol=0, atol=1e-15)
    np.testing.assert_allclose(traj.pu, 0.0, atol=1e-15)


def test_linear_solution_at_zero_energy():
    xs = np.linspace(-1.0, 3.0, 9)
    traj = solve_ivp(free_background(), 0.5, (0.0, 1.0), xs, 0.0)
    np.testing.assert_allclose(traj.u, xs - 0.5, atol=1e-14)
    np.testing.assert_allclose(traj.pu, 1.0, atol=1e-15)


def test_basis_normalization_at_start():
    bg = kronig_penney()
    theta = solve_ivp(bg, 0.3, (0.0, 1.0), [0.3, 1.0], 2j)
    phi = solve_ivp(bg, 0.3, (1.0, 0.0), [0.3, 1.0], 2j)
    assert np.array_equal(np.column_stack((phi.states[0], theta.states[0])), np.eye(2))


def test_solve_ivp_matches_transfer_both_sides():
    bg, z, init = kronig_penney(), 6.0 + 0.3j, np.array([0.2, 1.0 - 1j])
    xs = np.array([-2.2, -0.5, 0.4, 1.0, 2.75])
    traj = solve_ivp(bg, 0.4, init, xs, z)
    for x, st in zip(xs, traj.states):
        ref = transfer(bg, 0.4, x, z) @ init if x >= 0.4 else inverse_transfer(transfer(bg, x, 0.4, z)) @ init
        np.testing.assert_allclose(st, ref, rtol=1e-12)


def test_refinement_does_not_change_shared_points():
    bg, z = kronig_penney(), 3.0 + 0.5j
    coarse = solve_ivp(bg, 0.0, (1.0, 0.0), np.linspace(0.0, 4.0, 5), z)
    fine = solve_ivp(bg, 0.0, (1.0, 0.0), np.linspace(0.0, 4.0, 41), z)
    np.testing.assert_allclose(fine.states[::10], coarse.states, rtol=1e-12)


def test_solve_ivp_needs_sorted_grid():
    with pytest.raises(ValueError):
        solve_ivp(free_background(), 0.0, (1.0, 0.0), [1.0, 0.0], 1.0)


def test_wronskian_examples():
    assert wronskian((1, 0), (0, 1)) == 1
    assert wronskian((1, 1j), (1, 1j)) == -2j


def test_wronskian_constant_for_real_energy():
    bg, lam = kronig_penney(), 7.3
    xs = np.linspace(-1.0, 6.0, 57)
    a = solve_ivp(bg, 0.0, (1.0, 2.0 - 1j), xs, lam).states
    b = solve_ivp(bg, 0.0, (0.5j, 1.0), xs, lam).states
    w = wronskian(a, b)
    assert np.max(np.abs(w - w[0])) <= 1e-9


def test_solution_l2_free_closed_form():
    z = 1j
    assert solution_l2(free_background(), 0.0, 2.0, (0.0, 1.0), z) == pytest.approx(free_theta_l2(z, 2.0), rel=1e-12)


def test_solution_l2_against_quad():
    bg, z, init = kronig_penney(), 4.0 + 1j, np.array([1.0, 0.5j])

    def u2(x):
        return abs((transfer(bg, 0.25, x, z) @ init)[0]) ** 2

    ref = sum(quad(u2, a, b, epsabs=0, epsrel=1e-12)[0] for a, b in [(0.25, 0.5), (0.5, 1.0), (1.0, 1.5), (1.5, 2.25)])
    assert solution_l2(bg, 0.25, 2.25, init, z) == pytest.approx(ref, rel=1e-10)


def test_solution_l2_long_cell_uses_substeps():
    c = PiecewiseCoefficients.constant(1.0, 0.0, 0.0, 50.0)
    assert solution_l2(c, 0.0, 2.0, (0.0, 1.0), 400.0 + 1j) == pytest.approx(free_theta_l2(400.0 + 1j, 2.0), rel=1e-10)
