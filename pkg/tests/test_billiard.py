import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from specbill.billiard import (SignPattern, _bracelets, billiard_map, canonical, cartesian_hessian,
                               cartesian_length, default_bounces, find_orbit, length, length_gradient,
                               length_hessian, length_spectrum, poincare, reverse_orbit, snell_residuals)
from specbill.circulant import CirculantHessian
from specbill.errors import DiagonalSingularity, OutOfChart
from specbill.geometry import GraphGerm, germ_from_curve, perturbed_pair, two_disk

DOWN, UP = 1.5 * math.pi, 0.5 * math.pi   # endpoint parameters of the upper / lower disk


def fd_gradient(pair, pattern, phi, h=1e-6):
    g = np.zeros_like(phi)
    for i in range(len(phi)):
        e = np.zeros_like(phi)
        e[i] = h
        g[i] = (length(pair, pattern, phi + e) - length(pair, pattern, phi - e)) / (2 * h)
    return g


def test_sign_pattern_cyclic():
    p = SignPattern.parse("+-+")
    assert p[3] == p[0] == 1 and p[-1] == 1 and len(p) == 3
    assert str(SignPattern.alternating(2)) == "+-+-"
    with pytest.raises(ValueError):
        SignPattern((1,))
    with pytest.raises(ValueError):
        SignPattern((1, 0))


def test_bouncing_ball_length(disks):
    assert length(disks, "+-", [DOWN, UP]) == pytest.approx(4.0, abs=1e-12)
    assert length(disks, "+-+-", [DOWN, UP] * 2) == pytest.approx(8.0, abs=1e-12)
    assert np.max(np.abs(length_gradient(disks, "+-", [DOWN, UP]))) < 1e-14


def test_same_sign_vertices_allowed_off_diagonal(disks):
    assert length(disks, "++-", [DOWN - 0.3, DOWN + 0.3, UP]) > 0


def test_diagonal_singularity(disks):
    with pytest.raises(DiagonalSingularity):
        length_gradient(disks, "++-", [DOWN, DOWN, UP])


@pytest.mark.parametrize("pattern", ["+-", "+-+-", "++-", "+--+-"])
def test_gradient_matches_finite_differences(ellipses, pattern):
    rng = np.random.default_rng(3)
    for _ in range(20):
        phi = rng.uniform(0, 2 * math.pi, len(pattern))
        try:
            g = length_gradient(ellipses, pattern, phi)
        except DiagonalSingularity:
            continue
        fd = fd_gradient(ellipses, pattern, phi)
        assert np.max(np.abs(g - fd)) <= 1e-6 * max(1.0, np.max(np.abs(g)))


def test_hessian_matches_gradient_differences(ellipses):
    rng = np.random.default_rng(4)
    phi = rng.uniform(0, 2 * math.pi, 4)
    H = length_hessian(ellipses, "+-+-", phi)
    h = 1e-6
    fd = np.column_stack([(length_gradient(ellipses, "+-+-", phi + h * e)
                           - length_gradient(ellipses, "+-+-", phi - h * e)) / (2 * h) for e in np.eye(4)])
    assert np.allclose(H, H.T)
    assert np.max(np.abs(H - fd)) < 1e-6


def test_find_orbit_from_perturbed_seed(ellipses):
    orb = find_orbit(ellipses, "+-", [DOWN + 0.2, UP - 0.1])
    assert orb.length == pytest.approx(4.0, abs=1e-12)
    assert orb.grad_norm < 1e-10 and orb.max_snell_residual < 1e-10 and not orb.ghost
    assert length(ellipses, orb.pattern, orb.angles) == pytest.approx(orb.length, abs=1e-12)


def test_snell_residuals_vanish_on_orbit(disks):
    assert np.max(np.abs(snell_residuals(disks, "+-", [DOWN, UP]))) < 1e-14


def test_canonical_rotation_and_reversal_invariant(ellipses):
    orb = find_orbit(ellipses, "+-", [DOWN + 0.2, UP - 0.1])
    pat, ang = reverse_orbit(orb)
    assert canonical(ellipses, pat, ang)[0] == orb.pattern


def test_bracelet_counts():
    # binary bracelets up to global complement: 1, 2, 3, 4, 8 for M = 2..6 (including constant patterns)
    assert [len(_bracelets(M)) for M in range(2, 7)] == [2, 2, 4, 4, 8]


def test_two_disk_spectrum_lengths_4_and_8(disks):
    orbits = length_spectrum(disks, 10.0)
    assert [round(L, 9) for L, _ in orbits] == [4.0, 8.0]
    for _, orb in orbits:
        assert orb.grad_norm < 1e-10 and orb.max_snell_residual < 1e-10


def test_spectrum_deterministic(ellipses):
    a = length_spectrum(ellipses, 9.0, seed=5)
    b = length_spectrum(ellipses, 9.0, seed=5)
    assert [(L, o.angles) for L, o in a] == [(L, o.angles) for L, o in b]


def test_perturbed_pair_spectrum_contains_iterates():
    P = perturbed_pair(1.0, 2.0, (0.05, 0.02))
    lengths = [L for L, _ in length_spectrum(P, 9.0, max_bounces=4)]
    assert any(abs(L - 4.0) < 1e-9 for L in lengths) and any(abs(L - 8.0) < 1e-9 for L in lengths)


def test_default_bounces(disks):
    assert default_bounces(disks, 10.0) == 5
    assert default_bounces(disks, 100.0) == 6
    assert default_bounces(disks, 1.0) == 2


def test_billiard_map_vertical_ray(disks):
    hit = billiard_map(disks, [0.0, 0.0], [0.0, 1.0])
    assert hit.sign == 1
    assert np.allclose(hit.point, [0.0, 1.0]) and np.allclose(hit.direction, [0.0, -1.0])


def test_billiard_map_reflection_law(disks):
    hit = billiard_map(disks, [0.3, 0.0], [0.1, 1.0])
    nu = disks.upper.normal(hit.phi)
    v = np.array([0.1, 1.0]) / math.hypot(0.1, 1.0)
    assert hit.direction @ nu == pytest.approx(-(v @ nu))
    assert abs(np.hypot(*(hit.point - [0, 2])) - 1.0) < 1e-12


def test_billiard_map_escape(disks):
    assert billiard_map(disks, [0.0, 0.0], [1.0, 0.0]) is None


def test_billiard_map_general_curve_agrees_with_circle():
    P = perturbed_pair(1.0, 2.0, ())
    hit = billiard_map(P, [0.3, 0.0], [0.1, 1.0])
    ref = billiard_map(two_disk(1.0, 2.0), [0.3, 0.0], [0.1, 1.0])
    assert np.allclose(hit.point, ref.point, atol=1e-10)


@pytest.mark.parametrize("gap,c", [(2.0, 3.0), (4.0, 5.0)])
def test_poincare_two_disks(gap, c):
    pd = poincare(two_disk(1.0, gap))
    assert pd.c == pytest.approx(c, abs=1e-6)
    assert pd.det == pytest.approx(1.0, abs=1e-8)
    assert abs(pd.trace) > 2


def test_cartesian_length_and_chart():
    g = GraphGerm(2.0, {2: 1.0})
    assert cartesian_length((g, g), "+-", [0.0, 0.0]) == pytest.approx(4.0)
    with pytest.raises(OutOfChart):
        cartesian_length((g, g), "+-", [2.0, 0.0])


@pytest.mark.parametrize("r", [1, 2, 3])
def test_cartesian_hessian_is_circulant(r):
    g = germ_from_curve(two_disk(1.0, 2.0).upper, 2.0, 4)
    H = 2.0 * cartesian_hessian((g, g), SignPattern.alternating(r))
    C = CirculantHessian(r, 3.0).matrix()
    S = np.diag([(-1.0) ** i for i in range(2 * r)])
    assert np.max(np.abs(H - S @ C @ S)) < 1e-5


@given(st.lists(st.floats(0, 2 * math.pi), min_size=4, max_size=4))
@settings(max_examples=40, deadline=None)
def test_length_reversal_symmetry(angles):
    P = two_disk(1.0, 2.0)
    pat = SignPattern.parse("+-+-")
    a = length(P, pat, angles)
    b = length(P, SignPattern(pat.entries[::-1]), angles[::-1])
    assert a == pytest.approx(b, rel=1e-13)
