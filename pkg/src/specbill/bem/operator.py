"""Nystrom discretisation of the boundary operator N(k) and its Fredholm determinant.

N = -K, where K f(x) = 2 int dG/dnu_y(x, y) f(y) ds(y) is twice the double
layer built on G = (i/4) H^(1)_0(k|x - y|) with the exterior normal.  With
this sign det(I + N(k)) vanishes at the Dirichlet eigenvalues of a single
closed curve's interior.  Same-curve blocks use Kress' logarithmic
splitting; blocks between disjoint components use the plain trapezoid rule.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np
import scipy.linalg

from ..errors import IllConditioned, PhaseJump
from ..geometry import BoundaryCurve, ObstaclePair
from ..parallel import pmap
from .specfun import besselj_hankel1, hankel1

ENTRY_CAP = 1e12


@dataclass(frozen=True)
class ComplexWavenumber:
    """k + i tau; tau > 0 is the physical half-plane, tau < 0 the continuation."""

    k: float
    tau: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.k) and math.isfinite(self.tau)):
            raise ValueError("wavenumber must be finite")
        if self.k == 0 and self.tau == 0:
            raise ValueError("wavenumber must be nonzero")

    @property
    def value(self) -> complex:
        return complex(self.k, self.tau)


def _kappa(kw) -> complex:
    z = kw.value if isinstance(kw, ComplexWavenumber) else complex(kw)
    if z == 0:
        raise ValueError("wavenumber must be nonzero")
    return z


def _components(domain) -> tuple[BoundaryCurve, ...]:
    comps = domain.components if isinstance(domain, ObstaclePair) else (domain,)
    for c in comps:
        if not c.closed:
            raise ValueError("boundary integrals need closed components (graph patches are local charts)")
    return comps


@lru_cache(maxsize=None)
def kress_weights(n: int) -> np.ndarray:
    """R_{|i-j|} of the logarithmic product quadrature on n = 2m equispaced nodes."""
    if n % 2:
        raise ValueError("n must be even")
    m = n // 2
    j = np.arange(n)
    mm = np.arange(1, m)
    R = -(2 * np.pi / m) * (np.cos(np.outer(j, mm) * np.pi / m) @ (1.0 / mm)) - (np.pi / m**2) * np.cos(j * np.pi)
    return R[np.abs(np.subtract.outer(j, j))]


@dataclass
class _Block:
    r: np.ndarray          # distances |x_i - y_j|
    num: np.ndarray        # (x_i - y_j) . nu(y_j) |y'_j|
    same: bool
    tri: tuple | None = None   # upper-triangle indices when r is symmetric
    logterm: np.ndarray | None = None
    diag: np.ndarray | None = None  # continuous limit of K on the diagonal


@dataclass
class Discretization:
    """k-independent geometry for n nodes per component."""

    n: int
    components: tuple
    nodes: np.ndarray
    points: np.ndarray      # (C, n, 2)
    speed: np.ndarray       # (C, n)
    curvature: np.ndarray   # (C, n)
    mirror: bool
    blocks: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return self.n * len(self.components)

    def permutation(self) -> np.ndarray:
        """Index map of the mirror symmetry (component swap, phi -> -phi)."""
        n = self.n
        i = (-np.arange(n)) % n
        if len(self.components) == 1:
            return i
        return np.concatenate([n + i, i])


def _block(x, y, dy, same, n, curv=None, speed=None):
    d = x[:, None, :] - y[None, :, :]
    r = np.hypot(d[..., 0], d[..., 1])
    num = dy[None, :, 1] * d[..., 0] - dy[None, :, 0] * d[..., 1]
    if not same:
        return _Block(r, num, False)
    t = 2 * np.pi * np.arange(n) / n
    with np.errstate(divide="ignore"):
        lg = np.log(4 * np.sin(np.subtract.outer(t, t) / 2) ** 2)
    np.fill_diagonal(lg, 0.0)
    np.fill_diagonal(r, 1.0)
    return _Block(r, num, True, np.triu_indices(n, 1), lg, -curv * speed / (2 * np.pi))


def discretize(domain, n: int) -> Discretization:
    try:
        return _discretize_cached(domain, int(n))
    except TypeError:  # unhashable domain
        return _discretize(domain, int(n))


@lru_cache(maxsize=32)
def _discretize_cached(domain, n):
    return _discretize(domain, n)


def _discretize(domain, n: int) -> Discretization:
    if n < 16 or n % 2:
        raise ValueError("n must be even and at least 16")
    comps = _components(domain)
    phi = 2 * np.pi * np.arange(n) / n
    derivs = [c.derivatives(phi, 2) for c in comps]                 # (3, 2, n)
    pts = np.stack([d[0].T for d in derivs])
    d1 = np.stack([d[1].T for d in derivs])
    d2 = np.stack([d[2].T for d in derivs])
    speed = np.hypot(d1[..., 0], d1[..., 1])
    curv = (d1[..., 0] * d2[..., 1] - d1[..., 1] * d2[..., 0]) / speed**3
    mirror = isinstance(domain, ObstaclePair)
    disc = Discretization(n, comps, phi, pts, speed, curv, mirror)
    pairs = [(0, 0), (0, 1)] if mirror else [(a, b) for a in range(len(comps)) for b in range(len(comps))]
    for a, b in pairs:
        disc.blocks[a, b] = _block(pts[a], pts[b], d1[b], a == b, n, curv[a], speed[a])
    return disc


def _k_block(blk: _Block, k: complex, n: int) -> np.ndarray:
    """Quadrature matrix of K for one block."""
    w = 2 * np.pi / n
    if not blk.same:
        H = hankel1(1, k * blk.r)
        return (0.5j * k * w) * blk.num * H / blk.r
    iu = blk.tri
    J1u, H1u = besselj_hankel1(1, k * blk.r[iu])
    H1 = np.zeros((n, n), dtype=complex)
    J1 = np.zeros((n, n), dtype=complex)
    H1[iu] = H1u
    J1[iu] = J1u
    H1 = H1 + H1.T
    J1 = J1 + J1.T
    q = blk.num / blk.r
    L = 0.5j * k * q * H1
    L1 = (-k / (2 * np.pi)) * q * J1   # coefficient of log(4 sin^2((t - s)/2)) in L
    L2 = L - L1 * blk.logterm
    np.fill_diagonal(L1, 0.0)
    np.fill_diagonal(L2, blk.diag)
    return kress_weights(n) * L1 + w * L2


@dataclass
class NystromOperator:
    n: int
    k: complex
    nodes: np.ndarray
    weights: np.ndarray
    jacobians: np.ndarray
    matrix: np.ndarray
    ncomp: int
    permutation: np.ndarray

    def block(self, a: int, b: int) -> np.ndarray:
        n = self.n
        return self.matrix[a * n:(a + 1) * n, b * n:(b + 1) * n]

    @property
    def blocks(self) -> dict:
        """N_{++}, N_{+-}, N_{-+}, N_{--} keyed by sign pairs (single curve: only (+1, +1))."""
        signs = (1, -1)[: self.ncomp]
        return {(s, t): self.block(i, j) for i, s in enumerate(signs) for j, t in enumerate(signs)}

    def symmetry_defect(self) -> float:
        P = self.permutation
        return float(np.max(np.abs(self.matrix[np.ix_(P, P)] - self.matrix)))


def assemble(domain, kw, n: int) -> NystromOperator:
    """Dense 2n x 2n (or n x n for a single curve) matrix of N(k + i tau)."""
    k = _kappa(kw)
    disc = discretize(domain, n)
    C = len(disc.components)
    K = np.empty((C * n, C * n), dtype=complex)
    for (a, b), blk in disc.blocks.items():
        K[a * n:(a + 1) * n, b * n:(b + 1) * n] = _k_block(blk, k, n)
    if disc.mirror:
        P = (-np.arange(n)) % n
        K[n:, n:] = K[:n, :n][np.ix_(P, P)]
        K[n:, :n] = K[:n, n:][np.ix_(P, P)]
    N = -K
    if not np.all(np.isfinite(N)) or np.max(np.abs(N)) > ENTRY_CAP:
        raise IllConditioned(f"operator entries exceed {ENTRY_CAP:g} at k = {k}")
    w = np.full(C * n, 2 * np.pi / n)
    return NystromOperator(n, k, disc.nodes, w, disc.speed.ravel(), N, C, disc.permutation())


def kernel(domain, kw, phi: float, phi2: float, same_component: bool = True) -> complex:
    """Kernel of N including the arc-length factor |q'(phi2)|.

    For a pair, ``same_component`` picks (upper, upper) or (upper, lower).
    Coincident points return the continuous limit kappa |q'| / (2 pi).
    """
    k = _kappa(kw)
    comps = _components(domain)
    c1 = comps[0]
    c2 = comps[0] if same_component else comps[1]
    x = c1.point(phi)
    dy = c2.velocity(phi2)
    y = c2.point(phi2)
    d = x - y
    r = math.hypot(*d)
    if same_component and r < 1e-14:
        return complex(float(c1.curvature(phi)) * float(c1.speed(phi)) / (2 * np.pi))
    num = dy[1] * d[0] - dy[0] * d[1]
    return complex(-0.5j * k * num * hankel1(1, k * r) / r)


# -- determinants ---------------------------------------------------------
def _wrap(x: float) -> float:
    return (x + math.pi) % (2 * math.pi) - math.pi


def log_det(op: NystromOperator | np.ndarray) -> complex:
    """Principal branch of log det(I + N) from an LU factorisation."""
    A = op.matrix if isinstance(op, NystromOperator) else np.asarray(op)
    lu, piv = scipy.linalg.lu_factor(np.eye(A.shape[0]) + A, check_finite=False)
    u = np.diag(lu)
    if np.any(u == 0):
        return complex(-np.inf, 0.0)
    swaps = int(np.sum(piv != np.arange(piv.size)))
    logs = np.log(u.astype(complex))
    return complex(float(np.sum(logs.real)), _wrap(float(np.sum(logs.imag)) + math.pi * (swaps % 2)))


def log_det_at(domain, kw, n: int) -> complex:
    return log_det(assemble(domain, kw, n))


def _increment(domain, n, a, b, la, lb, jump_tol, depth, max_depth):
    d = complex(lb.real - la.real, _wrap(lb.imag - la.imag))
    if abs(d.imag) < jump_tol:
        return d
    if depth >= max_depth:
        raise PhaseJump(f"phase increment {d.imag:.3f} between k = {a} and {b} after {depth} halvings")
    m = 0.5 * (a + b)
    lm = log_det_at(domain, m, n)
    return (_increment(domain, n, a, m, la, lm, jump_tol, depth + 1, max_depth)
            + _increment(domain, n, m, b, lm, lb, jump_tol, depth + 1, max_depth))


def unwind(values: Sequence[complex], jump_tol: float = 0.5 * math.pi) -> np.ndarray:
    """Branch-continuous log det from principal values; raises PhaseJump on a coarse step."""
    out = [complex(values[0])]
    for a, b in zip(values[:-1], values[1:]):
        d = complex(b.real - a.real, _wrap(b.imag - a.imag))
        if abs(d.imag) >= jump_tol:
            raise PhaseJump(f"phase increment {d.imag:.3f} exceeds {jump_tol:.3f}")
        out.append(out[-1] + d)
    return np.array(out)


def log_det_path(domain, path: Sequence, n: int, jump_tol: float = 0.5 * math.pi,
                 max_depth: int = 8) -> np.ndarray:
    """log det(I + N) along a sampled path of complex wavenumbers, branch-tracked.

    Steps whose phase increment reaches ``jump_tol`` are halved adaptively.
    """
    ks = [_kappa(p) for p in path]
    vals = pmap(lambda k: log_det_at(domain, k, n), ks)
    out = [vals[0]]
    for i in range(1, len(ks)):
        out.append(out[-1] + _increment(domain, n, ks[i - 1], ks[i], vals[i - 1], vals[i],
                                        jump_tol, 0, max_depth))
    return np.array(out)


def log_det_extrapolated(domain, kw, n: int, order: int = 4) -> complex:
    """Richardson combination of log det at n and 2n, assuming an n^-order error."""
    a = log_det_at(domain, kw, n)
    b = log_det_at(domain, kw, 2 * n)
    b = complex(b.real, a.imag + _wrap(b.imag - a.imag))
    f = 2.0**order
    return (f * b - a) / (f - 1)


def trace_derivative(domain, kw, n: int, dk: float = 1e-4) -> complex:
    """d/dk log det(I + N(k + i tau)) by a central difference of the branch-tracked log det."""
    k = _kappa(kw)
    lp = log_det_at(domain, k + dk, n)
    lm = log_det_at(domain, k - dk, n)
    return complex(lp.real - lm.real, _wrap(lp.imag - lm.imag)) / (2 * dk)


def _tr_solve(A: np.ndarray, dA: np.ndarray) -> complex:
    return complex(np.trace(np.linalg.solve(np.eye(A.shape[0]) + A, dA)))


def trace_form(domain, kw, n: int, dk: float = 1e-4, mode: str = "full") -> complex:
    """Tr[(I + N)^{-1} N'] with N' from a central difference of the assembled matrices.

    Unlike differencing log det this stays accurate arbitrarily close to a
    zero of the determinant.  ``mode="interaction"`` subtracts the two
    diagonal-block terms.
    """
    k = _kappa(kw)
    op = assemble(domain, k, n)
    N0 = op.matrix
    dN = (assemble(domain, k + dk, n).matrix - assemble(domain, k - dk, n).matrix) / (2 * dk)
    val = _tr_solve(N0, dN)
    if mode == "interaction":
        m = op.n
        for a in (slice(0, m), slice(m, 2 * m)):
            val -= _tr_solve(N0[a, a], dN[a, a])
    elif mode != "full":
        raise ValueError(f"unknown mode {mode!r}")
    return val


def trace_powers(op: NystromOperator, M: int) -> np.ndarray:
    """Tr N^m for m = 1 .. M."""
    A = op.matrix
    P = np.eye(A.shape[0], dtype=complex)
    out = []
    for _ in range(M):
        P = P @ A
        out.append(np.trace(P))
    return np.array(out)


def interaction_log_det(op: NystromOperator) -> complex:
    """log det(I + N) - log det(I + N_{++}) - log det(I + N_{--}) (principal branch)."""
    if op.ncomp != 2:
        raise ValueError("interaction determinant needs two components")
    full = log_det(op)
    s = log_det(op.block(0, 0)) + log_det(op.block(1, 1))
    return complex(full.real - s.real, _wrap(full.imag - s.imag))
