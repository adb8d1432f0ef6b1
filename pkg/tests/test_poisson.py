import numpy as np
import pytest

from specbill.bem.poisson import log_derivative, poisson_spectrum
from specbill.errors import WindowTooNarrow
from specbill.billiard import length_spectrum


def test_window_too_narrow(disks):
    with pytest.raises(WindowTooNarrow):
        poisson_spectrum(disks, (20.0, 22.0), expected=[4.0, 8.0], derivative=np.zeros(41))


def test_bad_arguments(disks):
    with pytest.raises(ValueError):
        poisson_spectrum(disks, (20.0, 20.0))
    with pytest.raises(ValueError):
        poisson_spectrum(disks, (20.0, 30.0), mode="other")
    with pytest.raises(ValueError):
        poisson_spectrum(disks, (20.0, 30.0), derivative=np.zeros(3))


def test_free_space_has_no_peaks(disks):
    ps = poisson_spectrum(disks, (20.0, 80.0), derivative=np.zeros(1201))
    assert ps.peaks == []


def test_synthetic_signal_peak_positions(disks):
    # d/dk log det of a single periodic ray of length T behaves like A exp(i k T)
    ks = np.linspace(20.0, 80.0, 1201)
    d = 3 * np.exp(1j * ks * 4.0) + np.exp(1j * ks * 8.0)
    ps = poisson_spectrum(disks, (20.0, 80.0), derivative=d)
    assert ps.largest(2) == pytest.approx([4.0, 8.0], abs=ps.resolution / 4)


def test_log_derivative_modes_agree_for_far_disks():
    from specbill.geometry import two_disk

    far = two_disk(1.0, 30.0)
    assert abs(log_derivative(far, 10 + 0.5j, 64, mode="interaction")) < 1e-5


@pytest.mark.slow
def test_gap4_interaction_peaks(disks_gap4):
    lengths = [L for L, _ in length_spectrum(disks_gap4, 17.0, max_bounces=4)]
    assert lengths == pytest.approx([8.0, 16.0])
    ps = poisson_spectrum(disks_gap4, (15.0, 45.0), tau=0.1, n=128, dk_grid=0.1, mode="interaction",
                          expected=lengths)
    cell = ps.t[1] - ps.t[0]
    top = sorted(ps.largest(2))
    assert abs(top[0] - 8.0) <= cell and abs(top[1] - 16.0) <= cell
