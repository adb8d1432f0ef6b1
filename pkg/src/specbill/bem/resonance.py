"""Zeros of det(I + N(k)) in a rectangle of the complex k-plane."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import minimum_filter

from ..errors import IllConditioned, NoConvergence, PhaseJump
from ..geometry import ObstaclePair
from ..parallel import pmap
from .operator import assemble, interaction_log_det, log_det, log_det_path, trace_form

REAL_AXIS_TOL = 1e-6


@dataclass(frozen=True)
class ResonanceCandidate:
    k: complex
    residual: float        # |det(I + N)| at k
    winding: int           # argument-principle count on a small square around k
    iterations: int
    converged: bool = True
    message: str = ""

    @property
    def on_real_axis(self) -> bool:
        return abs(self.k.imag) < REAL_AXIS_TOL


def _objective(domain, k, n, use_interaction):
    op = assemble(domain, k, n)
    return (interaction_log_det(op) if use_interaction else log_det(op)).real


def winding_number(domain, center: complex, half: float, n: int, per_side: int = 16) -> int:
    """Zeros of det(I + N) inside the square |Re|, |Im| <= half around center."""
    corners = [center + half * complex(a, b) for a, b in ((1, -1), (1, 1), (-1, 1), (-1, -1))]
    path = []
    for i in range(4):
        a, b = corners[i], corners[(i + 1) % 4]
        path.extend(a + (b - a) * s for s in np.arange(per_side) / per_side)
    path.append(corners[0])
    ld = log_det_path(domain, path, n)
    return int(round((ld[-1].imag - ld[0].imag) / (2 * math.pi)))


def refine(domain, k0: complex, n: int, multiplicity: int = 1, max_iter: int = 30, tol: float = 1e-10,
           dk: float = 1e-5, box=None, mode: str = "full") -> tuple[complex, int]:
    """Newton's method for det(I + N): k <- k - m / (d/dk log det).

    ``mode="interaction"`` iterates on the interaction factor instead.
    """
    k = complex(k0)
    for it in range(1, max_iter + 1):
        g = trace_form(domain, k, n, dk, mode)
        if not np.isfinite(g) or g == 0:
            raise NoConvergence(f"log-derivative vanished at k = {k}")
        step = multiplicity / g
        k -= step
        if box is not None:
            (a, b), (c, d) = box
            if not (a <= k.real <= b and c <= k.imag <= d):
                raise NoConvergence(f"Newton left the search region at k = {k}")
        if abs(step) < tol * max(1.0, abs(k)):
            return k, it
    raise NoConvergence(f"Newton did not settle after {max_iter} steps (last k = {k})")


def resonance_scan(domain, k_range: tuple[float, float], tau_range: tuple[float, float],
                   grid: tuple[int, int] = (101, 13), n: int = 96, include_real: bool = False,
                   interaction_search: bool | None = None) -> list[ResonanceCandidate]:
    """Grid minima of |det| refined by Newton and checked by the argument principle.

    For two-component domains the minima are located on the interaction
    factor det(I + N) / (det(I + N_{++}) det(I + N_{--})), whose zeros off the
    real axis are zeros of det(I + N) free of the steep growth of the full
    determinant; refinement and winding use the full determinant.  Zeros on
    the real axis are interior eigenvalues and are dropped unless
    ``include_real``.
    """
    if interaction_search is None:
        interaction_search = isinstance(domain, ObstaclePair)
    ks = np.linspace(*k_range, grid[0])
    ts = np.linspace(*tau_range, grid[1])
    hk = ks[1] - ks[0] if ks.size > 1 else 0.1
    ht = ts[1] - ts[0] if ts.size > 1 else 0.1
    pts = [complex(k, t) for t in ts for k in ks]

    def obj(z):
        try:
            return _objective(domain, z, n, interaction_search)
        except IllConditioned:
            return np.inf

    G = np.array(pmap(obj, pts)).reshape(ts.size, ks.size)
    mins = (G == minimum_filter(G, size=3, mode="nearest")) & np.isfinite(G)
    # minima on the outer frame come from the growth of |det| and from zeros outside
    mins[:, [0, -1]] = False
    if ts.size > 2:
        mins[[0, -1], :] = False
    box = ((k_range[0] - hk, k_range[1] + hk), (tau_range[0] - ht, tau_range[1] + ht))
    half = 0.5 * min(hk, ht)
    out: list[ResonanceCandidate] = []
    for i, j in zip(*np.nonzero(mins)):
        z0 = complex(ks[j], ts[i])
        try:
            z, it = z0, 0
            if interaction_search:
                z, it = refine(domain, z, n, box=box, mode="interaction")
            z, it1 = refine(domain, z, n, box=box)
            it += it1
            w = winding_number(domain, z, half, n)
            if w > 1:
                z, it2 = refine(domain, z, n, multiplicity=w, box=box)
                it += it2
            res = float(np.exp(log_det(assemble(domain, z, n)).real))
            cand = ResonanceCandidate(z, res, w, it)
        except (NoConvergence, PhaseJump, IllConditioned) as exc:
            cand = ResonanceCandidate(z0, float("nan"), 0, 0, False, str(exc))
        if cand.converged and cand.on_real_axis and not include_real:
            continue
        if cand.converged and any(c.converged and abs(c.k - cand.k) < 1e-6 for c in out):
            continue
        out.append(cand)
    out.sort(key=lambda c: (c.k.real, c.k.imag))
    return out


def chain_spacings(cands: list[ResonanceCandidate]) -> np.ndarray:
    """Differences of Re k along a chain sorted by real part."""
    re = np.sort([c.k.real for c in cands if c.converged])
    return np.diff(re)
