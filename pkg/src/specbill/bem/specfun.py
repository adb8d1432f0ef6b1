"""Bessel J, Y and Hankel H^(1) of order 0 and 1 for complex arguments.

Convergent power series for |z| <= 12, Hankel's asymptotic expansion beyond.
All functions are vectorised over z.
"""
from __future__ import annotations

import cmath
import math

import numpy as np

from ..errors import OriginSingularity

SWITCH = 12.0
EULER_GAMMA = 0.57721566490153286061
_SERIES_TERMS = 60
_ASYM_TERMS = 40


def _check_order(nu):
    if nu not in (0, 1):
        raise ValueError(f"only orders 0 and 1 are implemented, got {nu}")


def _series(nu: int, z: np.ndarray):
    """J_nu and Y_nu from the ascending series (principal branch of log)."""
    h = 0.5 * z
    w = -(h * h)
    harm = np.concatenate([[0.0], np.cumsum(1.0 / np.arange(1, _SERIES_TERMS + 2))])
    J = np.zeros_like(z)
    S = np.zeros_like(z)
    term = np.ones_like(z) / math.factorial(nu)  # w^m / (m! (m+nu)!)
    for m in range(_SERIES_TERMS):
        J += term
        if nu == 0:
            S += harm[m] * term
        else:
            S += (harm[m] + harm[m + 1]) * term
        term = term * w / ((m + 1) * (m + 1 + nu))
        if m > 4 and np.all(np.abs(term) <= 1e-18 * np.maximum(np.abs(J), 1e-300)):
            break
    lg = np.log(h) + EULER_GAMMA
    if nu == 0:
        J0 = J
        Y0 = (2.0 / np.pi) * (lg * J0 - S)
        return J0, Y0
    J1 = h * J
    # psi(m+1) + psi(m+2) = H_m + H_{m+1} - 2 gamma; the gamma part is folded into lg
    Y1 = -2.0 / (np.pi * z) + (2.0 / np.pi) * lg * J1 - (h / np.pi) * S
    return J1, Y1


def _asym_coeffs(nu: int, terms: int) -> np.ndarray:
    """a_k(nu) = prod_{i=1}^k (4 nu^2 - (2i - 1)^2) / (k! 8^k)."""
    a = np.empty(terms)
    a[0] = 1.0
    mu = 4.0 * nu * nu
    for k in range(1, terms):
        a[k] = a[k - 1] * (mu - (2 * k - 1) ** 2) / (k * 8.0)
    return a


_A = {nu: _asym_coeffs(nu, _ASYM_TERMS) for nu in (0, 1)}


def _asymptotic_h1(nu: int, z: np.ndarray) -> np.ndarray:
    """H^(1)_nu(z) ~ sqrt(2/(pi z)) exp(i(z - nu pi/2 - pi/4)) sum_k i^k a_k / z^k."""
    a = _A[nu]
    iz = 1j / z
    s = np.ones_like(z)
    p = np.ones_like(z)
    best = np.abs(s) * 0 + np.inf
    done = np.zeros(z.shape, dtype=bool)
    for k in range(1, _ASYM_TERMS):
        p = p * iz
        t = a[k] * p
        at = np.abs(t)
        # stop each point at its smallest term (optimal truncation)
        grow = at >= best
        done |= grow
        s = np.where(done, s, s + t)
        best = np.where(done, best, at)
        if np.all(done | (at < 1e-17)):
            break
    return np.sqrt(2.0 / (np.pi * z)) * np.exp(1j * (z - nu * np.pi / 2 - np.pi / 4)) * s


def _prepare(z):
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise OriginSingularity("Bessel Y / Hankel functions are singular at z = 0")
    if np.any((z.real < 0) & (z.imag == 0)):
        raise ValueError("argument on the branch cut (negative real axis)")
    return z


def _eval(nu: int, z, want: str):
    _check_order(nu)
    zz = _prepare(z)
    flat = zz.ravel()
    out = {k: np.empty(flat.shape, dtype=complex) for k in want}
    small = np.abs(flat) <= SWITCH
    if np.any(small):
        Jv, Yv = _series(nu, flat[small])
        if "J" in out:
            out["J"][small] = Jv
        if "Y" in out:
            out["Y"][small] = Yv
        if "H" in out:
            out["H"][small] = Jv + 1j * Yv
    right = ~small & (flat.real >= 0)
    if np.any(right):
        zb = flat[right]
        h1 = _asymptotic_h1(nu, zb)
        if "J" in out or "Y" in out:
            # H2_nu(z) = conj(H1_nu(conj z)) for real order
            h2 = np.conj(_asymptotic_h1(nu, np.conj(zb)))
            if "J" in out:
                out["J"][right] = 0.5 * (h1 + h2)
            if "Y" in out:
                out["Y"][right] = (h1 - h2) / 2j
        if "H" in out:
            out["H"][right] = h1
    left = ~small & ~right
    if np.any(left):
        # z = w e^{m pi i} with Re w > 0:  J_n(z) = (-1)^{mn} J_n(w),
        # Y_n(z) = (-1)^{mn} (Y_n(w) + 2 i m J_n(w))
        zl = flat[left]
        w = -zl
        m = np.where(zl.imag >= 0, 1, -1)
        h1 = _asymptotic_h1(nu, w)
        h2 = np.conj(_asymptotic_h1(nu, np.conj(w)))
        Jw, Yw = 0.5 * (h1 + h2), (h1 - h2) / 2j
        sgn = (-1.0) ** nu
        Jz = sgn * Jw
        Yz = sgn * (Yw + 2j * m * Jw)
        if "J" in out:
            out["J"][left] = Jz
        if "Y" in out:
            out["Y"][left] = Yz
        if "H" in out:
            # the direct expansion stays valid for pi/2 < arg z < pi and avoids cancellation
            out["H"][left] = np.where(zl.imag >= 0, _asymptotic_h1(nu, zl), Jz + 1j * Yz)
    res = tuple(out[k].reshape(zz.shape) for k in want)
    if np.ndim(z) == 0:
        res = tuple(complex(v) for v in res)
    return res if len(res) > 1 else res[0]


def hankel1(nu: int, z):
    """H^(1)_nu(z) = J_nu(z) + i Y_nu(z), nu in {0, 1}."""
    return _eval(nu, z, "H")


def besselj(nu: int, z):
    _check_order(nu)
    zz = np.asarray(z, dtype=complex)
    if np.any(zz == 0):
        # J is entire; only the Y part of the machinery is singular
        out = np.where(zz == 0, 1.0 if nu == 0 else 0.0, 0).astype(complex)
        nz = zz != 0
        if np.any(nz):
            out[nz] = _eval(nu, zz[nz], "J")
        return complex(out) if np.ndim(z) == 0 else out
    return _eval(nu, z, "J")


def bessely(nu: int, z):
    return _eval(nu, z, "Y")


def besselj_hankel1(nu: int, z):
    """(J_nu(z), H^(1)_nu(z)) in one pass."""
    return _eval(nu, z, "JH")


def self_test(ring: float = SWITCH, angles: int = 64, large: float = 50.0) -> dict:
    """Diagnostics for the series / asymptotic pair.

    continuity
        largest |series - asymptotic| for H^(1)_0 and H^(1)_1 on the upper
        half of the circle |z| = ring.
    large_ratio_error
        |H0(x) sqrt(pi x / 2) exp(-i(x - pi/4)) - 1| at x = large.  For the
        true function this is about 1/(8x), so it only tends to zero.
    large_modulus_error, large_two_term_error
        the same ratio compared in modulus, and against 1 - i/(8x).
    wronskian
        relative defect of J1 H0 - J0 H1 = 2i/(pi z) on the ring.  Near
        Im z = ring the series forms H = J + iY with |H| much smaller than
        |J|, so this is limited to about eps |J|^2.
    decay_error
        |H0(z)| e^(Im z) sqrt(pi |z| / 2) against the modulus of the
        three-term expansion, for z = large + iy, y in [5, 40].
    """
    theta = np.linspace(0.0, np.pi, angles, endpoint=False)
    z = ring * np.exp(1j * theta)
    cont = {}
    for nu in (0, 1):
        J, Y = _series(nu, z)
        cont[nu] = float(np.max(np.abs(J + 1j * Y - _asymptotic_h1(nu, z))))
    x = float(large)
    ratio = complex(hankel1(0, complex(x))) * cmath.sqrt(np.pi * x / 2) * cmath.exp(-1j * (x - np.pi / 4))
    J0, H0 = besselj_hankel1(0, z)
    J1, H1 = besselj_hankel1(1, z)
    wr = np.abs((J1 * H0 - J0 * H1) * (np.pi * z / 2j) - 1.0)
    a = _A[0]
    zd = x + 1j * np.linspace(5.0, 40.0, 8)
    three = np.abs(1 + a[1] * (1j / zd) + a[2] * (1j / zd) ** 2)
    dec = np.abs(hankel1(0, zd)) * np.exp(zd.imag) * np.sqrt(np.pi * np.abs(zd) / 2)
    return {
        "ring": float(ring),
        "angles": int(angles),
        "continuity": max(cont.values()),
        "continuity_by_order": {str(k): v for k, v in cont.items()},
        "large_argument": x,
        "large_ratio_error": abs(ratio - 1.0),
        "large_modulus_error": abs(abs(ratio) - 1.0),
        "large_two_term_error": float(abs(ratio - (1 + a[1] * 1j / x))),
        "wronskian": float(np.max(wr)),
        "decay_error": float(np.max(np.abs(dec - three))),
    }
