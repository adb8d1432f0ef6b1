import numpy as np
import pytest

from oracles import newton_root, two_disk_multipole_det
from specbill.bem.resonance import chain_spacings, refine, resonance_scan, winding_number

K0 = 7.848375617543805 - 0.4488845725579j


def test_refine_matches_multipole_oracle(disks):
    ref = newton_root(two_disk_multipole_det, 7.85 - 0.45j)
    k, _ = refine(disks, 7.85 - 0.45j, 96, mode="interaction")
    assert abs(k - ref) < 1e-6
    k2, _ = refine(disks, k, 96)
    assert abs(k2 - ref) < 1e-6


def test_winding_one_at_resonance(disks):
    assert winding_number(disks, K0, 0.03, 96) == 1
    assert winding_number(disks, K0 + 0.5, 0.03, 96) == 0


def test_small_scan_finds_one_candidate(disks):
    cands = resonance_scan(disks, (7.3, 8.3), (-0.6, 0.0), (11, 13), 64)
    good = [c for c in cands if c.converged]
    assert len(good) == 1
    assert abs(good[0].k - K0) < 1e-5 and good[0].winding == 1


def test_empty_region(disks):
    assert resonance_scan(disks, (7.3, 7.6), (-0.2, -0.05), (7, 5), 64) == []


def test_interior_zeros_on_real_axis(unit_disk):
    k, _ = refine(unit_disk, 2.4 + 0j, 128)
    assert abs(k - 2.404825557695773) < 1e-8


def test_chain_spacings_helper():
    from specbill.bem.resonance import ResonanceCandidate

    cands = [ResonanceCandidate(complex(x, -0.4), 0.0, 1, 1) for x in (3.0, 1.0, 2.5)]
    assert np.allclose(chain_spacings(cands), [1.5, 0.5])
