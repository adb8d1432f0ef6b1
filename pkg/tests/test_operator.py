import math

import numpy as np
import pytest
import scipy.special as sc

from specbill.bem.operator import (ComplexWavenumber, assemble, interaction_log_det, kernel, kress_weights,
                                   log_det, log_det_extrapolated, log_det_path, trace_derivative, trace_form,
                                   trace_powers, unwind)
from specbill.errors import IllConditioned, PhaseJump
from specbill.geometry import GraphGerm, germ_pair


def test_wavenumber_validation():
    assert ComplexWavenumber(2.0, -0.5).value == 2 - 0.5j
    with pytest.raises(ValueError):
        ComplexWavenumber(0.0, 0.0)
    with pytest.raises(ValueError):
        ComplexWavenumber(float("nan"))


def test_kress_weights_integrate_log():
    n = 32
    t = 2 * np.pi * np.arange(n) / n
    R = kress_weights(n)[0]
    # int_0^2pi log(4 sin^2 (s/2)) cos(m s) ds = -2 pi / m
    for m in (1, 3, 7):
        assert R @ np.cos(m * t) == pytest.approx(-2 * np.pi / m, abs=1e-12)
    assert R @ np.ones(n) == pytest.approx(0.0, abs=1e-12)


def test_disk_modes_match_bessel_products(unit_disk):
    # on the circle I + N is circulant; mode m has eigenvalue -i pi k J_m(k) H_m'(k)
    k = 1.3 + 0.2j
    A = np.eye(128) + assemble(unit_disk, k, 128).matrix
    ev = np.fft.fft(A[0])
    for m in range(8):
        ref = -1j * np.pi * k * sc.jv(m, k) * sc.h1vp(m, k)
        assert abs(ev[m] - ref) < 1e-10 and abs(ev[-m] - ref) < 1e-10


def test_diagonal_limit(unit_disk):
    d = kernel(unit_disk, 3.0 + 0.5j, 1.0, 1.0)
    assert d == pytest.approx(1 / (2 * np.pi))
    for s in (1e-6, -1e-6):
        assert abs(kernel(unit_disk, 3.0 + 0.5j, 1.0, 1.0 + s) - d) < 1e-4


def test_cross_kernel_at_endpoints(disks):
    k = 5.0
    val = kernel(disks, k, 1.5 * np.pi, 0.5 * np.pi, same_component=False)
    # |q - q'| = 2, lower tangent (-1, 0) ... cross product num = 2 for the unit speed circle
    ref = -0.5j * k * 2.0 * sc.hankel1(1, 2 * k) / 2.0
    assert abs(val - ref) < 1e-12


def test_below_first_eigenvalue_nonzero(unit_disk):
    op = assemble(unit_disk, 1.0, 128)
    assert np.all(np.isfinite(op.matrix))
    assert abs(np.exp(log_det(op))) > 0.1


def test_self_convergence(unit_disk):
    a = log_det(assemble(unit_disk, 1.0, 128))
    b = log_det(assemble(unit_disk, 1.0, 256))
    assert abs(a.real - b.real) < 1e-8


def test_extrapolation_improves(unit_disk):
    ref = log_det(assemble(unit_disk, 1.0, 512))
    ex = log_det_extrapolated(unit_disk, 1.0, 64)
    plain = log_det(assemble(unit_disk, 1.0, 64))
    assert abs(ex - ref) < abs(plain - ref)


def test_det_vanishes_at_first_bessel_zero(unit_disk):
    near = abs(np.exp(log_det(assemble(unit_disk, 2.404825557695773, 128))))
    away = abs(np.exp(log_det(assemble(unit_disk, 2.3, 128))))
    assert near < 1e-8 * away


def test_pair_symmetry(disks):
    op = assemble(disks, 20.0 + 0.1j, 64)
    assert op.symmetry_defect() < 1e-12
    P = op.permutation
    assert abs(log_det(op.matrix[np.ix_(P, P)]) - log_det(op)) < 1e-10
    b = op.blocks
    assert set(b) == {(1, 1), (1, -1), (-1, 1), (-1, -1)}


def test_cross_blocks_damped(disks):
    op = assemble(disks, 20.0 + 10.0j, 64)
    assert np.linalg.norm(op.block(0, 1)) < math.exp(-10 * 2.0) * 10


def test_ill_conditioned_guard(disks):
    with pytest.raises(IllConditioned):
        assemble(disks, 20.0 - 15.0j, 64)


def test_open_components_rejected():
    with pytest.raises(ValueError):
        assemble(germ_pair(GraphGerm(2.0, {2: 1.0})), 1.0, 32)
    with pytest.raises(ValueError):
        assemble(germ_pair(GraphGerm(2.0, {2: 1.0})), 1.0, 15)


def test_trace_forms_agree(disks):
    kw = ComplexWavenumber(20.0, 0.1)
    a = trace_derivative(disks, kw, 96)
    b = trace_form(disks, kw, 96)
    assert abs(a - b) < 1e-6 * max(1.0, abs(b))


def test_trace_derivative_decreases_with_tau(disks):
    vals = [abs(trace_derivative(disks, ComplexWavenumber(10.0, t), 96)) for t in np.linspace(0.0, 2.0, 9)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_trace_relabel_invariant(disks):
    op = assemble(disks, 12.0 + 0.3j, 64)
    n = op.n
    swap = np.r_[np.arange(n, 2 * n), np.arange(n)]
    assert abs(log_det(op.matrix[np.ix_(swap, swap)]) - log_det(op)) < 1e-10


def test_trace_powers_vs_eigenvalues(disks):
    op = assemble(disks, 20.0, 64)
    lam = np.linalg.eigvals(op.matrix)
    tp = trace_powers(op, 3)
    for m in range(3):
        assert abs(tp[m] - np.sum(lam ** (m + 1))) < 1e-8 * max(1.0, abs(tp[m]))


def test_interaction_factor_small_for_large_gap():
    from specbill.geometry import two_disk

    far = assemble(two_disk(1.0, 30.0), 10.0 + 0.5j, 64)
    assert abs(interaction_log_det(far)) < 1e-6


def test_path_unwinding(unit_disk):
    path = np.linspace(1.0, 6.0, 60) + 0.05j
    ld = log_det_path(unit_disk, path, 64)
    fine = np.linspace(1.0, 6.0, 591) + 0.05j
    ref = np.unwrap([log_det(assemble(unit_disk, k, 64)).imag for k in fine])
    assert np.allclose(ld.imag, ref[::10] - ref[0] + ld.imag[0], atol=1e-9)
    assert np.allclose(ld.real, [log_det(assemble(unit_disk, k, 64)).real for k in path])


def test_unwind_raises_on_jump():
    with pytest.raises(PhaseJump):
        unwind([0j, 3.0j])
    assert np.allclose(unwind([3.0j, -3.0j]).imag, [3.0, 2 * np.pi - 3.0])
