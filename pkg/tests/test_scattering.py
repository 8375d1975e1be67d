from __future__ import annotations

import cmath
import math

import numpy as np
import pytest

from oracles import rk4_transfer, square_barrier_ab
from sturmscat.coefficients import Perturbation, Profile
from sturmscat.floquet import StabilityInterval, band_edges, floquet_data, floquet_solution
from sturmscat.liouville import reflectionless_q_from_p
from sturmscat.problems import bump_p, free_background, kronig_penney, smooth_p_problem, square_barrier
from sturmscat.propagator import transfer
from sturmscat.scattering import (
    ScatteringProblem,
    contour_integral_b,
    is_reflectionless,
    jost_state,
    reflection_scan,
    scattering_coefficients,
    wronskian_conservation_diagnostic,
)

FREE_BAND_1 = StabilityInterval(math.pi**2, 4 * math.pi**2, -2, 2)
# max|b| of the unit square barrier (height 1) on the second free band, 64 points
BARRIER_MAX_B = 0.024131653575159884


def unperturbed(bg=None, D=1.5):
    return ScatteringProblem(bg or kronig_penney(), Perturbation.none(D))


def test_jost_state_of_unperturbed_problem():
    p = unperturbed()
    for z in (6.0, 20.0 + 1j):
        np.testing.assert_allclose(jost_state(p, z), floquet_solution(p.background, z, p.D, +1), rtol=1e-12)


@pytest.mark.parametrize("k", [1.0, 2.5, 4.0])
def test_free_jost_state_is_plane_wave(k):
    u = jost_state(unperturbed(free_background(), 1.0), k * k)
    np.testing.assert_allclose(u, [cmath.exp(1j * k), 1j * k * cmath.exp(1j * k)], atol=1e-12)


def test_jost_state_against_oracle():
    bg = kronig_penney()
    p = square_barrier(1.0, 1.0, background=bg)
    z = 8.0
    fd = floquet_data(bg, z)
    ref = rk4_transfer([0.0, 0.5, 1.0], [1.0, 1.0], [11.0, 1.0], z) @ fd.v_plus
    assert np.linalg.norm(jost_state(p, z) - ref) <= 1e-8 * np.linalg.norm(ref)


def test_unperturbed_coefficients_are_trivial():
    p = unperturbed()
    for z in (6.0, 9.0, 30.0, 20.0 + 1j, 3.0 + 2j):
        s = scattering_coefficients(p, z)
        assert abs(s.a - 1) <= 1e-10 and abs(s.b) <= 1e-10


@pytest.mark.parametrize(
    "V, L, k",
    [(1.0, 1.0, 2.0), (1.0, 1.0, 5.0), (3.0, 0.5, 1.2), (-2.0, 2.0, 2.8), (10.0, 0.7, 4.5), (1.0, 1.0, 0.9)],
)
def test_square_barrier_closed_form(V, L, k):
    s = scattering_coefficients(square_barrier(V, L), k * k)
    a, b = square_barrier_ab(V, L, k)
    assert abs(s.a - a) <= 1e-9 and abs(s.b - b) <= 1e-9
    assert abs(abs(s.a) ** 2 - abs(s.b) ** 2 - 1) <= 1e-9


def test_transmission_and_reflection_are_physical():
    s = scattering_coefficients(square_barrier(1.0, 1.0), 4.0)
    assert abs(s.transmission) ** 2 + abs(s.reflection) ** 2 == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("D_shift", [0.0, 1.0])
def test_reconstruction_beyond_matching_point(D_shift):
    p = square_barrier(2.0, 1.3, background=kronig_penney())
    for z in (7.0, 25.0, 7.0 + 0.5j):
        s = scattering_coefficients(p, z)
        x = p.D + D_shift
        u = transfer(p.coefficients, 0.0, x, z) @ floquet_data(p.background, z).v_plus
        rec = s.a * floquet_solution(p.background, z, x, +1) + s.b * floquet_solution(p.background, z, x, -1)
        assert np.linalg.norm(rec - u) <= 1e-9 * np.linalg.norm(u)


def test_unperturbed_scan():
    samples = reflection_scan(unperturbed(), band_edges(kronig_penney(), 0, 60)[0], n=32)
    assert len(samples) == 32 and all(s.ok for s in samples)
    assert max(abs(s.b) for s in samples) <= 1e-10


def test_scan_grid_excludes_edges():
    iv = FREE_BAND_1
    samples = reflection_scan(square_barrier(), iv, n=8, eta=0.1)
    zs = np.array([s.z for s in samples])
    assert np.all(zs.imag == 0.1)
    assert zs.real.min() > iv.c and zs.real.max() < iv.d


def test_scan_arguments():
    with pytest.raises(ValueError):
        reflection_scan(square_barrier(), FREE_BAND_1, n=1)
    with pytest.raises(ValueError):
        reflection_scan(square_barrier(), FREE_BAND_1, eta=-1.0)


def test_scan_records_failures():
    # an interval straddling the edge at pi^2 hits it exactly
    iv = StabilityInterval(math.pi**2 - 1.0, math.pi**2 + 1.0, 0, 0)
    samples = reflection_scan(square_barrier(), iv, n=3, margin=0.0)
    assert not samples[1].ok and "collide" in samples[1].error


def test_reflection_continuous_along_scan():
    p = square_barrier(2.0, 1.3, background=kronig_penney())
    samples = reflection_scan(p, band_edges(kronig_penney(), 0, 60)[1], n=200)
    steps = np.abs(np.diff([s.b for s in samples]))
    # b blows up at the edges, so compare each step with its neighbours only
    for i in range(1, steps.size - 1):
        assert steps[i] <= 10 * max(steps[i - 1], steps[i + 1])


def test_is_reflectionless_verdicts():
    flag, mb = is_reflectionless(unperturbed(free_background()), FREE_BAND_1)
    assert flag and mb <= 1e-10
    flag, mb = is_reflectionless(square_barrier(), FREE_BAND_1)
    assert not flag and mb == pytest.approx(BARRIER_MAX_B, rel=1e-9)


def test_bump_scan_is_reflectionless():
    p, dp, d2p = bump_p(1.0)
    flag, mb = is_reflectionless(smooth_p_problem(p, reflectionless_q_from_p(p, (0, 1), dp, d2p), 2000), FREE_BAND_1)
    assert flag and mb <= 1e-6


def test_generic_bump_reflects():
    g = Profile([0.0, 0.5, 1.0], [1.0, 0.5])
    p = ScatteringProblem(free_background(), Perturbation(Profile.zero(), g, 1.0))
    _, mb = is_reflectionless(p, StabilityInterval(0.0, math.pi**2, 2, -2))
    assert mb > 1e-3


def test_wronskian_drift():
    assert wronskian_conservation_diagnostic(unperturbed(), 7.0) <= 1e-12
    for p in (square_barrier(), square_barrier(2.0, 1.3, background=kronig_penney())):
        for b in band_edges(p.background, 0.0, 60.0):
            for E in b.interior_grid(5, 0.01):
                assert wronskian_conservation_diagnostic(p, E) <= 1e-9
                assert scattering_coefficients(p, E).wronskian_drift <= 1e-9


def test_drift_needs_real_energy():
    with pytest.raises(ValueError):
        wronskian_conservation_diagnostic(square_barrier(), 4.0 + 1j)
    assert math.isnan(scattering_coefficients(square_barrier(), 4.0 + 1j).wronskian_drift)


def test_b_is_analytic_in_the_strip():
    p = square_barrier(2.0, 1.3, background=kronig_penney())
    assert abs(contour_integral_b(p, 30.0 + 0.0j, 5.0)) <= 1e-6
