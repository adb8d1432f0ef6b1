"""The 2r x 2r circulant Hessian C(2c, 1, 0, ..., 0, 1) at the r-th iterate of the bouncing ball."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import numpy as np
import scipy.linalg

from .errors import NotHyperbolic, SpectralMismatch


@dataclass(frozen=True)
class CirculantHessian:
    r: int
    c: float | Fraction

    def __post_init__(self):
        if int(self.r) != self.r or self.r < 1:
            raise ValueError(f"r must be a positive integer, got {self.r}")
        if not self.c > 1:
            raise NotHyperbolic(f"c = {self.c} must exceed 1")

    @property
    def size(self) -> int:
        return 2 * self.r

    @property
    def exact(self) -> bool:
        return isinstance(self.c, Rational)

    def symbol_row(self) -> list:
        """First row: 2c on the diagonal, 1 on both cyclic neighbours."""
        n = self.size
        row = [0] * n
        row[0] = 2 * self.c
        row[1 % n] += 1
        row[-1 % n] += 1
        return row

    def matrix(self) -> np.ndarray:
        return scipy.linalg.circulant(np.array(self.symbol_row(), dtype=float)).T


def eigenvalues(H: CirculantHessian) -> np.ndarray:
    """lambda_k = 2c + 2 cos(k pi / r), k = 0 .. 2r - 1."""
    k = np.arange(H.size)
    return 2.0 * float(H.c) + 2.0 * np.cos(k * np.pi / H.r)


def _exact_inverse_row(H: CirculantHessian) -> list[Fraction]:
    """Row 1 of H^{-1} by Gauss-Jordan elimination over the rationals."""
    n = H.size
    row = [Fraction(v) for v in H.symbol_row()]
    A = [[row[(q - p) % n] for q in range(n)] + [Fraction(int(p == 0))] for p in range(n)]
    for col in range(n):
        piv = next(p for p in range(col, n) if A[p][col] != 0)
        A[col], A[piv] = A[piv], A[col]
        pv = A[col][col]
        A[col] = [v / pv for v in A[col]]
        for p in range(n):
            if p != col and A[p][col] != 0:
                f = A[p][col]
                A[p] = [a - f * b for a, b in zip(A[p], A[col])]
    # the solution of H x = e_1 is column 1 of H^{-1}; H is symmetric
    return [A[p][n] for p in range(n)]


def inverse_row(H: CirculantHessian, exact: bool = False):
    """(h^{11}, ..., h^{1,2r}) with h^{1q} = (1/2r) sum_k w^{(q-1)k} / lambda_k, w = exp(i pi / r).

    With ``exact=True`` and rational c the row is returned as Fractions.
    """
    if exact:
        if not H.exact:
            raise ValueError("exact mode needs a rational c")
        return _exact_inverse_row(H)
    h = np.fft.ifft(1.0 / eigenvalues(H))
    if np.max(np.abs(h.imag)) > 1e-13:
        raise SpectralMismatch("inverse row has a non-negligible imaginary part")
    return h.real


def row_sum(H: CirculantHessian, exact: bool = False):
    """sum_q h^{pq} = 1 / lambda_0 = 1 / (2c + 2)."""
    if exact:
        return 1 / (2 * Fraction(H.c) + 2)
    return 1.0 / (2.0 * float(H.c) + 2.0)


def cube_sum_spectral(H: CirculantHessian) -> float:
    """(1/(2r)^2) sum_{k1,k2} 1 / (lambda_{k1} lambda_{k2} lambda_{-k1-k2})."""
    n = H.size
    inv = 1.0 / eigenvalues(H)
    k = np.arange(n)
    k3 = (-(k[:, None] + k[None, :])) % n
    return float(np.sum(inv[:, None] * inv[None, :] * inv[k3]) / n**2)


def cube_sum(H: CirculantHessian, exact: bool = False, tol: float = 1e-10):
    """F_r = sum_q (h^{1q})^3, cross-checked against the spectral double sum."""
    if exact:
        return sum(v**3 for v in inverse_row(H, exact=True))
    h = inverse_row(H)
    direct = float(math.fsum(h**3))
    spectral = cube_sum_spectral(H)
    if abs(direct - spectral) > tol * max(1.0, abs(direct)):
        raise SpectralMismatch(f"direct {direct!r} vs spectral {spectral!r}")
    return direct


def dense_inverse(H: CirculantHessian) -> np.ndarray:
    lu, piv = scipy.linalg.lu_factor(H.matrix())
    return scipy.linalg.lu_solve((lu, piv), np.eye(H.size))
