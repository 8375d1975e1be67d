"""Property tests: invariants that must hold on every generated input."""

from __future__ import annotations

import json

import numpy as np
from hypothesis import assume, given
from hypothesis import strategies as st

from sturmscat.coefficients import (
    PeriodicBackground,
    Perturbation,
    PiecewiseCoefficients,
    Profile,
    l1_distance,
    l1_norm,
    mollify_sequence,
)
from sturmscat.estimates import BoundReport, check_growth_bound
from sturmscat.floquet import discriminant, multipliers
from sturmscat.io import document_hash, problem_from_dict, problem_to_dict
from sturmscat.liouville import apply_transform, build_map
from sturmscat.propagator import transfer, wronskian
from sturmscat.scattering import ScatteringProblem
from sturmscat.weyl import m_disc


@st.composite
def cells(draw, n_max=5, length=(0.2, 1.0), start=0.0):
    n = draw(st.integers(1, n_max))
    widths = draw(st.lists(st.floats(0.05, 1.0), min_size=n, max_size=n))
    total = draw(st.floats(*length))
    edges = start + total * np.concatenate(([0.0], np.cumsum(widths))) / sum(widths)
    assume(np.all(np.diff(edges) > 0))
    inv_p = draw(st.lists(st.floats(0.5, 2.0), min_size=n, max_size=n))
    q = draw(st.lists(st.floats(-5.0, 5.0), min_size=n, max_size=n))
    return PiecewiseCoefficients(edges, inv_p, q)


@st.composite
def backgrounds(draw):
    c = draw(cells(n_max=4, length=(1.0, 1.0)))
    bp = c.breakpoints.copy()
    bp[-1] = 1.0
    assume(np.all(np.diff(bp) > 0))
    return PeriodicBackground(PiecewiseCoefficients(bp, c.inv_p, c.q))


energies = st.builds(complex, st.floats(-10.0, 50.0), st.floats(-2.0, 2.0))
upper = st.builds(complex, st.floats(-10.0, 50.0), st.floats(0.05, 5.0))


@given(cells(), energies)
def test_transfer_is_unimodular(c, z):
    T = transfer(c, c.breakpoints[0], c.breakpoints[-1], z)
    assert abs(np.linalg.det(T) - 1) <= 1e-10 * max(1.0, np.abs(T).max() ** 2)


@given(cells(), energies, st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_transfer_composes(c, z, s1, s2):
    a, b = c.breakpoints[0], c.breakpoints[-1]
    x1, x2 = sorted((a + s1 * (b - a), a + s2 * (b - a)))
    T = transfer(c, x1, b, z) @ transfer(c, a, x1, z)
    np.testing.assert_allclose(T, transfer(c, a, b, z), rtol=1e-10, atol=1e-10)


@given(cells(), st.floats(-10.0, 50.0), st.tuples(st.floats(-1e3, 1e3), st.floats(0.01, 1e3)))
def test_bracket_conserved_for_real_energy(c, E, pair):
    a0 = np.array([pair[0], 1.0 + 0.5j])
    b0 = np.array([0.3j, pair[1]])
    T = transfer(c, c.breakpoints[0], c.breakpoints[-1], E)
    w0, w1 = wronskian(a0, b0), wronskian(T @ a0, T @ b0)
    scale = np.linalg.norm(T @ a0) * np.linalg.norm(T @ b0) + abs(w0)
    assert abs(w1 - w0) <= 1e-10 * scale


@given(backgrounds(), st.integers(-50 * 1024, 50 * 1024), st.integers(-5, 5))
def test_background_periodicity(bg, j, k):
    # dyadic points keep x + k exact
    x = j / 1024
    assert bg.evaluate(x) == bg.evaluate(x + k)


@given(backgrounds(), upper)
def test_vieta_and_labels(bg, z):
    rp, rm = multipliers(bg, z)
    assert abs(rp * rm - 1) <= 1e-10
    assert abs(rp + rm - discriminant(bg, z)) <= 1e-10 * max(1.0, abs(rp + rm))
    assert abs(rp) < 1


@given(cells(length=(0.5, 3.0), start=-1.0), upper, st.floats(-1.0, 2.0))
def test_herglotz(c, lam, x):
    assert m_disc(c, x, lam).imag > 0


@given(cells(), st.floats(0.0, 1.0))
def test_l1_additive(c, s):
    a, b = c.breakpoints[0], c.breakpoints[-1]
    m = a + s * (b - a)
    for f in ("q", "inv_p"):
        total = l1_norm(c, (a, b), f)
        assert abs(l1_norm(c, (a, m), f) + l1_norm(c, (m, b), f) - total) <= 1e-13 * max(1.0, total)


@given(cells(n_max=4, length=(0.5, 2.0)))
def test_mollifier_distance_monotone(c):
    a, b = c.breakpoints[0] - 0.5, c.breakpoints[-1] + 0.5
    for f in ("q", "inv_p"):
        d = [l1_distance(c, mollify_sequence(c, n), (a, b), f) for n in (1, 2, 4, 8, 16, 32)]
        noise = 1e-13 * (1.0 + np.abs(getattr(c, f)).max())
        assert all(y <= x + noise for x, y in zip(d, d[1:]))
    assert all(v > 0 for v in mollify_sequence(c, 3).inv_p)


@given(backgrounds(), cells(n_max=3, length=(0.3, 2.0)), st.floats(0.0, 3.0))
def test_json_round_trip_is_bit_exact(bg, pert_cells, shift):
    f = Profile(pert_cells.breakpoints, np.abs(pert_cells.q))
    g = Profile(pert_cells.breakpoints, pert_cells.q * shift)
    problem = ScatteringProblem(bg, Perturbation(f, g, float(pert_cells.breakpoints[-1])))
    text = json.dumps(problem_to_dict(problem))
    back = problem_from_dict(json.loads(text))
    assert json.dumps(problem_to_dict(back)) == text
    assert document_hash(back) == document_hash(problem)
    assert back.background.cell.same_as(bg.cell)


@given(cells(length=(0.5, 3.0)), st.floats(0.1, 3.0))
def test_identity_map_is_bit_exact(c, window):
    fmap = build_map(c, c, window)
    x = np.linspace(0.0, window, 257)
    assert fmap.identity
    assert np.array_equal(fmap.t(x), x) and np.array_equal(fmap.s(x), np.ones_like(x))


@given(cells(length=(0.5, 3.0)), cells(length=(0.5, 3.0)), st.floats(0.2, 2.0))
def test_inverse_map_round_trip(c1, c2, window):
    fmap = build_map(c1, c2, window)
    x = np.union1d(np.linspace(0.0, window, 200), fmap.knots)
    v = lambda y: np.exp(-y) * np.cos(3 * y)  # noqa: E731
    fv = apply_transform(fmap, v, x)
    back = apply_transform(fmap.inverse(), (x, fv), fmap.t(x))
    np.testing.assert_allclose(back, v(fmap.t(x)), atol=1e-8)


@given(st.floats(0.0, 1e6), st.floats(0.0, 1e6))
def test_bound_report_rule(lhs, rhs):
    rep = BoundReport.of(lhs, rhs)
    assert rep.satisfied == (lhs <= rhs + 1e-12)
    assert rep.margin == rhs - lhs


@given(cells(length=(0.5, 3.0)), energies, st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_growth_bound_holds(c, z, s1, s2):
    a, b = c.breakpoints[0], c.breakpoints[-1]
    x, y = a + s1 * (b - a), a + s2 * (b - a)
    assert check_growth_bound(c, z, x, y, (1.0, -0.5j)).satisfied
