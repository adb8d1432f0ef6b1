"""Length functionals on bounce sequences, Snell polygons and the exterior billiard map."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import (
    CollapsedLink,
    DiagonalSingularity,
    NoConvergence,
    NotHyperbolic,
    OutOfChart,
)
from .geometry import TWO_PI, Ellipse, GraphGerm, ObstaclePair

COINCIDE_TOL = 1e-12
MIN_LINK = 1e-8
GHOST_SAMPLES = 64


@dataclass(frozen=True)
class SignPattern:
    """Cyclic sequence of component labels (+1 upper, -1 lower)."""

    entries: tuple[int, ...]

    def __post_init__(self):
        entries = tuple(int(e) for e in self.entries)
        if len(entries) < 2 or any(e not in (1, -1) for e in entries):
            raise ValueError("a sign pattern needs at least two entries from {+1, -1}")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def parse(cls, text: str) -> "SignPattern":
        return cls(tuple(1 if ch == "+" else -1 for ch in text.strip() if ch in "+-"))

    @classmethod
    def alternating(cls, r: int) -> "SignPattern":
        return cls((1, -1) * r)

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, j):
        return self.entries[j % len(self.entries)]

    def __iter__(self):
        return iter(self.entries)

    def __str__(self):
        return "".join("+" if e > 0 else "-" for e in self.entries)


def _as_pattern(pattern) -> SignPattern:
    if isinstance(pattern, SignPattern):
        return pattern
    if isinstance(pattern, str):
        return SignPattern.parse(pattern)
    return SignPattern(tuple(pattern))


@dataclass(frozen=True)
class OrbitCandidate:
    pattern: SignPattern
    angles: tuple[float, ...]
    length: float
    grad_norm: float
    snell_residuals: tuple[float, ...]
    ghost: bool = False
    iterations: int = 0

    @property
    def max_snell_residual(self) -> float:
        return max(abs(s) for s in self.snell_residuals)


@dataclass(frozen=True)
class PoincareData:
    monodromy: np.ndarray
    trace: float
    alpha: float

    @property
    def c(self) -> float:
        """cosh(alpha / 2), the circulant Hessian parameter."""
        return math.cosh(0.5 * self.alpha)

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.monodromy))


# -- vertices and links -----------------------------------------------------
def _vertex_derivs(pair: ObstaclePair, pattern: SignPattern, angles, order: int) -> np.ndarray:
    """Array of shape (M, order + 1, 2): q_j and its phi-derivatives."""
    angles = np.asarray(angles, dtype=float)
    if angles.shape != (len(pattern),):
        raise ValueError(f"expected {len(pattern)} angles, got shape {angles.shape}")
    out = np.empty((len(pattern), order + 1, 2))
    for sign in (1, -1):
        idx = [j for j, s in enumerate(pattern) if s == sign]
        if idx:
            d = pair.curve(sign).derivatives(angles[idx], order)  # (order+1, 2, k)
            out[idx] = np.transpose(d, (2, 0, 1))
    return out


def _links(pattern: SignPattern, q: np.ndarray):
    """Edge vectors d_j = q_{j+1} - q_j, their lengths and unit vectors."""
    d = np.roll(q, -1, axis=0) - q
    ell = np.hypot(d[:, 0], d[:, 1])
    for j, e in enumerate(ell):
        if pattern[j] == pattern[j + 1] and e < COINCIDE_TOL:
            raise DiagonalSingularity(f"vertices {j} and {(j + 1) % len(pattern)} coincide")
    return d, ell, d / ell[:, None]


def length(pair: ObstaclePair, pattern, angles) -> float:
    """Closed-polygon length  sum_j |q_{s_j}(phi_j) - q_{s_{j+1}}(phi_{j+1})|."""
    pattern = _as_pattern(pattern)
    q = _vertex_derivs(pair, pattern, angles, 0)[:, 0]
    _, ell, _ = _links(pattern, q)
    return float(math.fsum(ell))


def length_gradient(pair: ObstaclePair, pattern, angles) -> np.ndarray:
    """d length / d phi_j = q_j' . (u_in - u_out), u_in/u_out the unit incoming/outgoing links.

    Divided by |q_j'| this is the difference of the sines of the two link
    angles with the normal, so it vanishes exactly at Snell polygons.
    """
    pattern = _as_pattern(pattern)
    d = _vertex_derivs(pair, pattern, angles, 1)
    _, _, u = _links(pattern, d[:, 0])
    u_out = u
    u_in = np.roll(u, 1, axis=0)
    return np.einsum("ij,ij->i", d[:, 1], u_in - u_out)


def _batch_vertices(pair: ObstaclePair, pattern: SignPattern, phi: np.ndarray, order: int) -> np.ndarray:
    """Shape (S, M, order + 1, 2) for a batch of S angle vectors."""
    S, M = phi.shape
    out = np.empty((S, M, order + 1, 2))
    for sign in (1, -1):
        idx = [j for j, s in enumerate(pattern) if s == sign]
        if idx:
            d = pair.curve(sign).derivatives(phi[:, idx], order)  # (order+1, 2, S, k)
            out[:, idx] = np.transpose(d, (2, 3, 0, 1))
    return out


def _batch_grad_hess(d: np.ndarray, hessian: bool = True):
    q = d[:, :, 0]
    e = np.roll(q, -1, axis=1) - q
    ell = np.hypot(e[..., 0], e[..., 1])
    with np.errstate(divide="ignore", invalid="ignore"):
        u = e / ell[..., None]
    g = np.einsum("smi,smi->sm", d[:, :, 1], np.roll(u, 1, axis=1) - u)
    if not hessian:
        return g, ell, None
    S, M = ell.shape
    H = np.zeros((S, M, M))
    for j in range(M):
        a, b = j, (j + 1) % M
        qa1, qa2 = d[:, a, 1], d[:, a, 2]
        qb1, qb2 = d[:, b, 1], d[:, b, 2]
        uj, lj = u[:, j], ell[:, j]
        ua = np.sum(uj * qa1, -1)
        ub = np.sum(uj * qb1, -1)
        H[:, a, a] += (np.sum(qa1 * qa1, -1) - ua * ua) / lj - np.sum(uj * qa2, -1)
        H[:, b, b] += (np.sum(qb1 * qb1, -1) - ub * ub) / lj + np.sum(uj * qb2, -1)
        off = -(np.sum(qa1 * qb1, -1) - ua * ub) / lj
        H[:, a, b] += off
        H[:, b, a] += off
    return g, ell, H


def length_hessian(pair: ObstaclePair, pattern, angles) -> np.ndarray:
    pattern = _as_pattern(pattern)
    d = _vertex_derivs(pair, pattern, angles, 2)
    _links(pattern, d[:, 0])
    return _batch_grad_hess(d[None])[2][0]


def snell_residuals(pair: ObstaclePair, pattern, angles) -> np.ndarray:
    """Per-vertex equal-angle defect, in radians.

    The incoming link is mirrored in the tangent line at the vertex and
    compared, by angle, with the outgoing link.
    """
    pattern = _as_pattern(pattern)
    q = _vertex_derivs(pair, pattern, angles, 0)[:, 0]
    out = []
    M = len(pattern)
    for j in range(M):
        p_prev, p, p_next = q[(j - 1) % M], q[j], q[(j + 1) % M]
        nu = pair.curve(pattern[j]).normal(angles[j])
        vin = p - p_prev
        vout = p_next - p
        refl = vin - 2.0 * (vin @ nu) * nu
        cross = refl[0] * vout[1] - refl[1] * vout[0]
        out.append(math.atan2(cross, refl @ vout))
    return np.array(out)


def _is_ghost(pair: ObstaclePair, q: np.ndarray) -> bool:
    t = (np.arange(1, GHOST_SAMPLES + 1) / (GHOST_SAMPLES + 1))[:, None]
    for j in range(len(q)):
        pts = q[j] + t * (q[(j + 1) % len(q)] - q[j])
        for curve in pair.components:
            if np.any(curve.level(pts) < -1e-12):
                return True
    return False


# -- Cartesian length functional at the bouncing ball -----------------------
def cartesian_length(germs: tuple[GraphGerm, GraphGerm], pattern, xs) -> float:
    """Length of the closed polygon with vertices (x_p, y_{s_p}(x_p)),

    where y_+ = f_upper and y_- = -f_lower are the truncated Taylor graphs.
    """
    pattern = _as_pattern(pattern)
    xs = np.asarray(xs, dtype=float)
    if xs.shape != (len(pattern),):
        raise ValueError(f"expected {len(pattern)} abscissas")
    up, low = germs
    ys = np.empty_like(xs)
    for j, s in enumerate(pattern):
        g = up if s > 0 else low
        if abs(xs[j]) > g.radius:
            raise OutOfChart(f"|x_{j}| = {abs(xs[j]):.3g} exceeds chart radius {g.radius}")
        ys[j] = s * g(xs[j])
    dx = np.roll(xs, -1) - xs
    dy = np.roll(ys, -1) - ys
    return float(math.fsum(np.hypot(dx, dy)))


def cartesian_hessian(germs, pattern, xs=None, h: float = 1e-4) -> np.ndarray:
    """Central-difference Hessian of :func:`cartesian_length`."""
    pattern = _as_pattern(pattern)
    M = len(pattern)
    x0 = np.zeros(M) if xs is None else np.asarray(xs, dtype=float)
    H = np.zeros((M, M))
    E = np.eye(M) * h

    def F(x):
        return cartesian_length(germs, pattern, x)

    for i in range(M):
        for j in range(i, M):
            if i == j:
                v = (-F(x0 + 2 * E[i]) + 16 * F(x0 + E[i]) - 30 * F(x0)
                     + 16 * F(x0 - E[i]) - F(x0 - 2 * E[i])) / (12 * h * h)
            else:
                v = (F(x0 + E[i] + E[j]) - F(x0 + E[i] - E[j])
                     - F(x0 - E[i] + E[j]) + F(x0 - E[i] - E[j])) / (4 * h * h)
            H[i, j] = H[j, i] = v
    return H


# -- orbit search -------------------------------------------------------------
def _wrap(pair: ObstaclePair, pattern: SignPattern, angles: np.ndarray) -> np.ndarray:
    out = np.array(angles, dtype=float)
    for j, s in enumerate(pattern):
        if pair.curve(s).closed:
            out[j] = out[j] % TWO_PI
    return out


def _quantize(a: float, closed: bool) -> float:
    if not closed:
        return round(a, 8)
    v = round(a % TWO_PI, 8)
    return 0.0 if v >= round(TWO_PI, 8) else v


def canonical(pair: ObstaclePair, pattern: SignPattern, angles) -> tuple[SignPattern, tuple[float, ...]]:
    """Smallest lexicographic rotation of (pattern, quantised angles), reversal included."""
    M = len(pattern)
    seq = [(pattern[j], _quantize(angles[j], pair.curve(pattern[j]).closed), float(angles[j])) for j in range(M)]
    best = None
    for s in (seq, seq[::-1]):
        for k in range(M):
            rot = s[k:] + s[:k]
            key = tuple((-e[0], e[1]) for e in rot)
            if best is None or key < best[0]:
                best = (key, rot)
    rot = best[1]
    return SignPattern(tuple(e[0] for e in rot)), tuple(e[2] for e in rot)


def _solve_batch(H: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.solve(H, rhs[..., None])[..., 0]
    except np.linalg.LinAlgError:
        return np.stack([np.linalg.lstsq(h, r, rcond=None)[0] for h, r in zip(H, rhs)])


# Newton outcome codes
_RUNNING, _CONVERGED, _STALLED, _COLLAPSED, _DIAGONAL = 0, 1, 2, 3, 4


def _newton_batch(pair, pattern, seeds, max_iter=50, gtol=1e-10, xtol=1e-12):
    """Safeguarded Newton on the length gradient for S seeds at once.

    Returns (angles, status, iterations); see the _RUNNING... codes.
    """
    phi = np.array(seeds, dtype=float, ndmin=2)
    S, M = phi.shape
    same = np.array([pattern[j] == pattern[j + 1] for j in range(M)])

    def evaluate(p, hess):
        g, ell, H = _batch_grad_hess(_batch_vertices(pair, pattern, p, 2 if hess else 1), hess)
        diag = np.any(same & (ell < COINCIDE_TOL), axis=1) | ~np.all(np.isfinite(g), axis=1)
        return g, ell, H, diag

    status = np.zeros(S, dtype=int)
    polish = np.zeros(S, dtype=int)
    iters = np.zeros(S, dtype=int)
    g, ell, H, diag = evaluate(phi, True)
    status[diag] = _DIAGONAL
    for _ in range(max_iter + 3):
        gn = np.max(np.abs(g), axis=1)
        run = status == _RUNNING
        small = run & (gn < gtol)
        polish[small] += 1
        status[small & ((polish > 2) | (gn < 1e-14))] = _CONVERGED
        ia = np.nonzero(status == _RUNNING)[0]
        if ia.size == 0:
            break
        if np.any(iters[ia] >= max_iter):
            over = ia[iters[ia] >= max_iter]
            status[over] = np.where(gn[over] < gtol, _CONVERGED, _STALLED)
            ia = np.nonzero(status == _RUNNING)[0]
            if ia.size == 0:
                break
        step = _solve_batch(H[ia], -g[ia])
        f0 = np.sum(g[ia] ** 2, axis=1)
        lam = np.ones(ia.size)
        new = phi[ia].copy()
        pending = np.arange(ia.size)
        while pending.size and lam[pending[0]] >= 1e-10:
            trial = phi[ia[pending]] + lam[pending, None] * step[pending]
            gt, _, _, bad = evaluate(trial, False)
            ok = ~bad & (np.sum(gt**2, axis=1) <= f0[pending])
            new[pending[ok]] = trial[ok]
            pending = pending[~ok]
            lam[pending] *= 0.5
        if pending.size:
            stuck = ia[pending]
            status[stuck] = np.where(gn[stuck] < gtol, _CONVERGED, _STALLED)
        moved = np.setdiff1d(np.arange(ia.size), pending)
        im = ia[moved]
        phi[im] = new[moved]
        iters[ia] += 1
        if im.size:
            g[im], ell[im], H[im], diag_m = evaluate(phi[im], True)
            status[im[diag_m]] = _DIAGONAL
            status[im[(status[im] == _RUNNING) & (np.min(ell[im], axis=1) < MIN_LINK)]] = _COLLAPSED
            tiny = np.max(np.abs(lam[moved, None] * step[moved]), axis=1) < xtol
            gn_m = np.max(np.abs(g[im]), axis=1)
            status[im[(status[im] == _RUNNING) & tiny & (gn_m < gtol)]] = _CONVERGED
    return phi, status, iters


def _finalize(pair, pattern, phi, iterations) -> OrbitCandidate:
    phi = _wrap(pair, pattern, phi)
    pat, ang = canonical(pair, pattern, phi)
    q = _vertex_derivs(pair, pat, ang, 0)[:, 0]
    _, ell, _ = _links(pat, q)
    if np.min(ell) < MIN_LINK:
        raise CollapsedLink(f"link length {np.min(ell):.3g} below {MIN_LINK}")
    grad = length_gradient(pair, pat, ang)
    return OrbitCandidate(
        pattern=pat,
        angles=tuple(float(a) for a in ang),
        length=length(pair, pat, ang),
        grad_norm=float(np.max(np.abs(grad))),
        snell_residuals=tuple(float(s) for s in snell_residuals(pair, pat, ang)),
        ghost=_is_ghost(pair, q),
        iterations=int(iterations),
    )


def _orbit_key(pair, pattern, phi):
    pat, ang = canonical(pair, pattern, phi)
    return pat.entries, tuple(_quantize(a, pair.curve(s).closed) for a, s in zip(ang, pat))


def find_orbit(pair: ObstaclePair, pattern, seed_angles, max_iter: int = 50,
               gtol: float = 1e-10, xtol: float = 1e-12) -> OrbitCandidate:
    """Newton iteration on the length gradient with a step-halving line search on |grad|^2.

    The result is canonicalised (rotation and reversal) and flagged as a
    ghost when one of its links passes through an obstacle.
    """
    pattern = _as_pattern(pattern)
    seed = np.asarray(seed_angles, dtype=float)
    if seed.shape != (len(pattern),):
        raise ValueError(f"expected {len(pattern)} seed angles")
    phi, status, iters = _newton_batch(pair, pattern, seed[None], max_iter, gtol, xtol)
    st = status[0]
    if st == _DIAGONAL:
        raise DiagonalSingularity("iteration reached the large diagonal")
    if st == _COLLAPSED:
        raise CollapsedLink(f"a link shrank below {MIN_LINK}")
    if st != _CONVERGED:
        raise NoConvergence(f"no critical point after {iters[0]} iterations")
    return _finalize(pair, pattern, phi[0], iters[0])


def _bracelets(M: int) -> list[SignPattern]:
    """Sign patterns of length M up to rotation, reversal and the global sign flip."""
    seen, out = set(), []
    for bits in itertools.product((1, -1), repeat=M):
        variants = []
        for s in (bits, tuple(-b for b in bits)):
            for t in (s, s[::-1]):
                variants.extend(t[k:] + t[:k] for k in range(M))
        key = min(variants)
        if key not in seen:
            seen.add(key)
            out.append(SignPattern(key))
    return out


def _seed_values(pair: ObstaclePair, sign: int, per_var: int) -> np.ndarray:
    c = pair.curve(sign)
    if c.closed:
        return c.endpoint + TWO_PI * np.arange(per_var) / per_var
    return np.linspace(-0.9, 0.9, per_var) * c.chart_radius


def orbit_seeds(pair: ObstaclePair, pattern: SignPattern, per_var: int = 8,
                max_seeds: int = 256, rng: np.random.Generator | None = None) -> list[np.ndarray]:
    """Bouncing-ball axis seed followed by a lattice (subsampled if larger than max_seeds)."""
    M = len(pattern)
    axis = np.array([pair.endpoint_param(s) for s in pattern])
    grids = [_seed_values(pair, s, per_var) for s in pattern]
    seeds = [axis]
    if per_var**M <= max_seeds:
        seeds.extend(np.array(p) for p in itertools.product(*grids))
    else:
        rng = rng or np.random.default_rng(0)
        idx = rng.integers(0, per_var, size=(max_seeds, M))
        seeds.extend(np.array([grids[j][i[j]] for j in range(M)]) for i in idx)
    return seeds


def min_gap(pair: ObstaclePair, n: int = 512) -> float:
    """Sampled minimum distance between the two components."""
    a, b = (c.sample(n) for c in pair.components)
    return float(np.min(np.hypot(*(a[:, None, :] - b[None, :, :]).transpose(2, 0, 1))))


def default_bounces(pair: ObstaclePair, L_max: float, cap: int = 6) -> int:
    """Largest M for which an alternating M-gon can fit below L_max."""
    d = min(min_gap(pair), pair.L)
    return int(max(2, min(cap, math.floor(L_max / d + 1e-9))))


def length_spectrum(pair: ObstaclePair, L_max: float, max_bounces: int | None = None, per_var: int = 8,
                    max_seeds: int = 256, seed: int = 0, patterns: Iterable | None = None):
    """Multi-start enumeration of non-ghost periodic reflecting rays with length <= L_max.

    Completeness is heuristic: only critical points reached from the seed
    lattice are reported.  Returns ``[(length, OrbitCandidate), ...]`` sorted
    by length, one entry per distinct length (tolerance 1e-9).
    """
    rng = np.random.default_rng(seed)
    if max_bounces is None:
        max_bounces = default_bounces(pair, L_max)
    if patterns is None:
        patterns = [p for M in range(2, max_bounces + 1) for p in _bracelets(M)]
    found: dict = {}
    for pattern in map(_as_pattern, patterns):
        seeds = np.array(orbit_seeds(pair, pattern, per_var, max_seeds, rng))
        phi, status, iters = _newton_batch(pair, pattern, seeds)
        keys = set()
        for p, it in zip(phi[status == _CONVERGED], iters[status == _CONVERGED]):
            p = _wrap(pair, pattern, p)
            key = _orbit_key(pair, pattern, p)
            if key in keys or key in found:
                continue
            keys.add(key)
            try:
                orb = _finalize(pair, pattern, p, it)
            except (CollapsedLink, DiagonalSingularity):
                continue
            if orb.ghost or orb.length > L_max + 1e-9 or orb.max_snell_residual > 1e-8:
                continue
            found[key] = orb
    out: list[tuple[float, OrbitCandidate]] = []
    for orb in sorted(found.values(), key=lambda o: (o.length, len(o.pattern))):
        if out and abs(orb.length - out[-1][0]) <= 1e-9:
            continue
        out.append((orb.length, orb))
    return out


# -- exterior billiard map ------------------------------------------------
@dataclass(frozen=True)
class BilliardHit:
    point: np.ndarray
    direction: np.ndarray
    sign: int
    phi: float


def _ray_quadric(curve: Ellipse, q, v, eps):
    w = (q - np.asarray(curve.center)) / np.array([curve.a, curve.b])
    s = v / np.array([curve.a, curve.b])
    A, B, C = s @ s, 2 * (w @ s), w @ w - 1.0
    disc = B * B - 4 * A * C
    if disc < 0:
        return None
    sq = math.sqrt(disc)
    # numerically stable pair of roots
    qq = -0.5 * (B + math.copysign(sq, B))
    roots = sorted(r for r in ((qq / A) if A else math.inf, (C / qq) if qq else math.inf) if r > eps)
    return roots[0] if roots else None


def _ray_general(curve, q, v, eps, t_max, step):
    f = lambda t: float(curve.level(q + t * v))
    t0, f0 = eps, f(eps)
    n = int(math.ceil((t_max - eps) / step))
    ts = eps + step * np.arange(1, n + 1)
    pts = q[None, :] + ts[:, None] * v[None, :]
    if not curve.closed:
        ok = np.abs(pts[:, 0]) <= curve.chart_radius
        if not np.any(ok):
            return None
        ts, pts = ts[: np.argmin(ok) if not ok.all() else len(ts)], None
        if len(ts) == 0:
            return None
        vals = curve.level(q[None, :] + ts[:, None] * v[None, :])
    else:
        vals = curve.level(pts)
    prev_t, prev_f = t0, f0
    for t, fv in zip(ts, vals):
        if prev_f > 0 >= fv:
            return brentq(f, prev_t, t, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        prev_t, prev_f = t, fv
    return None


def billiard_map(pair: ObstaclePair, q, v, eps: float = 1e-9, step: float = 1e-2,
                 t_max: float | None = None) -> BilliardHit | None:
    """First boundary hit of the ray q + t v (t > eps) and the reflected direction.

    Returns ``None`` when the ray escapes to infinity.
    """
    q = np.asarray(q, dtype=float)
    v = np.asarray(v, dtype=float)
    v = v / np.hypot(*v)
    if t_max is None:
        pts = np.concatenate([c.sample(256) for c in pair.components])
        t_max = float(np.max(np.hypot(*(pts - q).T))) + 1.0
    best = None
    for sign, curve in ((1, pair.upper), (-1, pair.lower)):
        base = curve.base if hasattr(curve, "base") else curve
        if isinstance(base, Ellipse):
            qq, vv = (q, v) if curve is base else (np.array([q[0], -q[1]]), np.array([v[0], -v[1]]))
            t = _ray_quadric(base, qq, vv, eps)
        else:
            t = _ray_general(curve, q, v, eps, t_max, step)
        if t is not None and (best is None or t < best[0]):
            best = (t, sign, curve)
    if best is None:
        return None
    t, sign, curve = best
    p = q + t * v
    phi = float(curve.param_of(p))
    nu = curve.normal(phi)
    w = v - 2.0 * (v @ nu) * nu
    return BilliardHit(p, w, sign, phi)


def _return_map(pair: ObstaclePair, u: float, p: float) -> tuple[float, float]:
    """Two-bounce return map at the upper endpoint in (arc length, tangential momentum)."""
    up = pair.upper
    phi0 = up.endpoint
    s0 = float(up.speed(phi0))
    phi = phi0 + u / s0
    t, nu = up.tangent(phi), up.normal(phi)
    v = p * t + math.sqrt(1.0 - p * p) * nu
    q = up.point(phi)
    for expect in (-1, 1):
        hit = billiard_map(pair, q, v)
        if hit is None or hit.sign != expect:
            raise NoConvergence("perturbed bouncing-ball ray left the pair")
        q, v = hit.point, hit.direction
    phi1 = hit.phi
    if up.closed:
        phi1 = phi0 + ((phi1 - phi0 + math.pi) % TWO_PI - math.pi)
    return (phi1 - phi0) * s0, float(v @ up.tangent(phi1))


def poincare(pair: ObstaclePair, h: float = 3e-5, tol: float = 1e-8) -> PoincareData:
    """Monodromy of the bouncing-ball return map by five-point central differences."""
    J = np.zeros((2, 2))
    for k in range(2):
        e = np.zeros(2)
        e[k] = h
        f = {m: np.array(_return_map(pair, *(m * e))) for m in (-2, -1, 1, 2)}
        J[:, k] = (f[-2] - 8 * f[-1] + 8 * f[1] - f[2]) / (12 * h)
    tr = float(np.trace(J))
    if abs(tr) <= 2.0 + tol:
        raise NotHyperbolic(f"monodromy trace {tr:.12g} is not hyperbolic")
    return PoincareData(J, tr, math.acosh(abs(tr) / 2.0))


def reverse_orbit(orbit: OrbitCandidate) -> tuple[SignPattern, tuple[float, ...]]:
    return SignPattern(orbit.pattern.entries[::-1]), orbit.angles[::-1]
