"""Fourier transform of d/dk log det(I + N(k + i tau)) over a k-window.

Peaks of |F(t)| sit at lengths of periodic rays.  The "full" mode uses the
whole determinant and therefore also shows the interior periodic orbits of
each component; "interaction" divides out det(I + N_{++}) det(I + N_{--})
and keeps only rays that travel between the two components.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import find_peaks, get_window

from ..errors import WindowTooNarrow
from ..parallel import pmap
from .operator import _wrap, assemble, interaction_log_det, log_det

MODES = ("full", "interaction")


@dataclass
class PoissonSpectrum:
    t: np.ndarray
    amplitude: np.ndarray          # |F(t)|
    k: np.ndarray
    derivative: np.ndarray         # d/dk log det on the k grid
    peaks: list = field(default_factory=list)   # [(t, |F|), ...] sorted by amplitude
    floor: float = 0.0
    resolution: float = 0.0

    def largest(self, m: int) -> list[float]:
        return [t for t, _ in self.peaks[:m]]


def _logdet(domain, k, n, mode):
    op = assemble(domain, k, n)
    return interaction_log_det(op) if mode == "interaction" else log_det(op)


def log_derivative(domain, k: complex, n: int, dk: float = 1e-4, mode: str = "full") -> complex:
    lp = _logdet(domain, k + dk, n, mode)
    lm = _logdet(domain, k - dk, n, mode)
    return complex(lp.real - lm.real, _wrap(lp.imag - lm.imag)) / (2 * dk)


def poisson_spectrum(domain, k_window: tuple[float, float], tau: float = 0.1, n: int = 192,
                     window: str = "hann", dk_grid: float = 0.05, mode: str = "full",
                     t_max: float | None = None, t_min: float | None = None, oversample: int = 4,
                     floor_factor: float = 8.0, expected=None, dk: float = 1e-4,
                     derivative: np.ndarray | None = None) -> PoissonSpectrum:
    """Sample d/dk log det on a uniform k grid, window it and transform to t.

    F(t) = sum_k w(k) d(k) exp(-i k t) dk_grid.  Peaks with t >= t_min whose
    height exceeds ``floor_factor`` times the median of |F| are returned,
    largest first.  ``expected`` lengths, if given, are checked against the
    resolution 2 pi / (k1 - k0).
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    k0, k1 = map(float, k_window)
    if not k1 > k0:
        raise ValueError("empty k window")
    resolution = 2 * math.pi / (k1 - k0)
    if expected is not None:
        ls = np.unique(np.concatenate([[0.0], np.asarray(expected, dtype=float)]))
        if ls.size > 1 and resolution > 0.5 * np.min(np.diff(ls)):
            raise WindowTooNarrow(f"resolution {resolution:.3g} exceeds half the smallest length gap")
    m = int(round((k1 - k0) / dk_grid)) + 1
    ks = np.linspace(k0, k1, m)
    step = ks[1] - ks[0]
    if derivative is None:
        d = np.array(pmap(lambda k: log_derivative(domain, complex(k, tau), n, dk, mode), ks))
    else:
        d = np.asarray(derivative, dtype=complex)
        if d.shape != ks.shape:
            raise ValueError("derivative samples do not match the k grid")
    w = np.ones(m) if window in ("none", "boxcar") else get_window(window, m, fftbins=False)
    t_max = math.pi / step if t_max is None else float(t_max)
    t_min = 4 * resolution if t_min is None else float(t_min)
    dt = resolution / oversample
    t = np.arange(0.0, t_max + 0.5 * dt, dt)
    F = np.exp(-1j * np.outer(t, ks)) @ (w * d) * step
    amp = np.abs(F)
    floor = floor_factor * float(np.median(amp))
    idx, _ = find_peaks(amp)
    peaks = []
    for i in idx:
        if t[i] < t_min or amp[i] <= max(floor, 1e-12):
            continue
        # parabolic refinement of the peak position
        a, b, c = amp[i - 1], amp[i], amp[i + 1]
        den = a - 2 * b + c
        shift = 0.5 * (a - c) / den if den != 0 else 0.0
        peaks.append((float(t[i] + shift * dt), float(b)))
    peaks.sort(key=lambda p: -p[1])
    return PoissonSpectrum(t, amp, ks, d, peaks, floor, resolution)
