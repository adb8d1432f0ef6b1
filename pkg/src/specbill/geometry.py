"""Analytic boundary curves and mirror-symmetric two-component obstacles.

Every curve is parametrised by an angle-like parameter ``phi`` and runs
counterclockwise around the obstacle it bounds, so the outward normal (the
one pointing into the exterior domain) is the tangent rotated clockwise.
The pair is aligned with the bouncing-ball segment on the y-axis and its
midpoint at the origin: the upper component touches ``(0, L/2)``, the lower
one is its reflection across ``y = 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import ComponentsIntersect, NoGraphChart

TWO_PI = 2.0 * math.pi
BOTTOM = 1.5 * math.pi


class BoundaryCurve:
    """Base class. Subclasses implement ``derivatives``, ``level`` and ``param_of``."""

    closed = True
    #: parameter of the bouncing-ball endpoint (the lowest point of an upper component)
    endpoint = BOTTOM

    def derivatives(self, phi, order: int) -> np.ndarray:
        """Array of shape ``(order + 1, 2) + shape(phi)`` holding q, q', ..., q^(order)."""
        raise NotImplementedError

    def level(self, p) -> np.ndarray:
        """Signed implicit function: negative strictly inside the obstacle."""
        raise NotImplementedError

    def param_of(self, p) -> np.ndarray:
        """Parameter of a point lying on the curve."""
        raise NotImplementedError

    # -- derived quantities -------------------------------------------------
    def point(self, phi) -> np.ndarray:
        return np.moveaxis(self.derivatives(phi, 0)[0], 0, -1)

    def velocity(self, phi) -> np.ndarray:
        return np.moveaxis(self.derivatives(phi, 1)[1], 0, -1)

    def speed(self, phi) -> np.ndarray:
        d = self.derivatives(phi, 1)[1]
        return np.hypot(d[0], d[1])

    def tangent(self, phi) -> np.ndarray:
        d = self.derivatives(phi, 1)[1]
        return np.moveaxis(d / np.hypot(d[0], d[1]), 0, -1)

    def normal(self, phi) -> np.ndarray:
        """Outward unit normal (into the exterior domain)."""
        t = self.tangent(phi)
        return np.stack([t[..., 1], -t[..., 0]], axis=-1)

    def curvature(self, phi) -> np.ndarray:
        """Signed curvature, positive where the obstacle is convex."""
        d = self.derivatives(phi, 2)
        x1, y1 = d[1]
        x2, y2 = d[2]
        return (x1 * y2 - y1 * x2) / np.hypot(x1, y1) ** 3

    def inside(self, p) -> np.ndarray:
        return self.level(p) < 0.0

    def sample(self, n: int = 512) -> np.ndarray:
        if self.closed:
            phi = TWO_PI * np.arange(n) / n
        else:
            phi = np.linspace(-self.chart_radius, self.chart_radius, n)
        return self.point(phi)

    def validate(self, n: int = 1024) -> None:
        if self.closed:
            phi = TWO_PI * np.arange(n) / n
        else:
            phi = np.linspace(-self.chart_radius, self.chart_radius, n)
        if not np.all(self.speed(phi) > 0.0):
            raise ValueError(f"{type(self).__name__}: vanishing speed")


def _trig_derivs(phi, order: int):
    """(cos^(m), sin^(m)) for m = 0..order."""
    c, s = np.cos(phi), np.sin(phi)
    cyc_c = [c, -s, -c, s]
    cyc_s = [s, c, -s, -c]
    return [cyc_c[m % 4] for m in range(order + 1)], [cyc_s[m % 4] for m in range(order + 1)]


@dataclass(frozen=True)
class Ellipse(BoundaryCurve):
    center: tuple[float, float]
    a: float
    b: float

    def __post_init__(self):
        if self.a <= 0 or self.b <= 0:
            raise ValueError("semi-axes must be positive")

    def derivatives(self, phi, order):
        phi = np.asarray(phi, dtype=float)
        cs, sn = _trig_derivs(phi, order)
        out = np.empty((order + 1, 2) + phi.shape)
        for m in range(order + 1):
            out[m, 0] = self.a * cs[m]
            out[m, 1] = self.b * sn[m]
        out[0, 0] += self.center[0]
        out[0, 1] += self.center[1]
        return out

    def level(self, p):
        p = np.asarray(p, dtype=float)
        u = (p[..., 0] - self.center[0]) / self.a
        v = (p[..., 1] - self.center[1]) / self.b
        return np.hypot(u, v) - 1.0

    def param_of(self, p):
        p = np.asarray(p, dtype=float)
        u = (p[..., 0] - self.center[0]) / self.a
        v = (p[..., 1] - self.center[1]) / self.b
        return np.mod(np.arctan2(v, u), TWO_PI)


class Circle(Ellipse):
    def __init__(self, center, radius):
        object.__setattr__(self, "center", (float(center[0]), float(center[1])))
        object.__setattr__(self, "a", float(radius))
        object.__setattr__(self, "b", float(radius))
        self.__post_init__()

    @property
    def radius(self) -> float:
        return self.a

    def __repr__(self):
        return f"Circle(center={self.center}, radius={self.a})"


@dataclass(frozen=True)
class PerturbedCircle(BoundaryCurve):
    """Star-shaped curve  center + rho(phi) (cos phi, sin phi)  with

    rho(phi) = R + sum_n c_n cos(n (phi + pi/2)),

    i.e. the cosine series is centred on the downward direction, so the
    lowest point sits at ``phi = 3 pi / 2`` with a horizontal tangent.
    """

    center: tuple[float, float]
    radius: float
    cosine_coeffs: tuple[float, ...] = ()

    def __post_init__(self):
        phi = TWO_PI * np.arange(2048) / 2048
        if not np.all(self.rho(phi, 0) > 0.0):
            raise ValueError("perturbed radius must stay positive")

    def rho(self, phi, m: int):
        phi = np.asarray(phi, dtype=float)
        out = np.full(phi.shape, self.radius if m == 0 else 0.0)
        for n, cn in enumerate(self.cosine_coeffs, start=1):
            if cn == 0.0:
                continue
            arg = n * (phi + 0.5 * math.pi)
            # d^m/dphi^m cos(n psi) = n^m cos(n psi + m pi / 2)
            out = out + cn * n**m * np.cos(arg + 0.5 * m * math.pi)
        return out

    def derivatives(self, phi, order):
        phi = np.asarray(phi, dtype=float)
        cs, sn = _trig_derivs(phi, order)
        rhos = [self.rho(phi, m) for m in range(order + 1)]
        out = np.zeros((order + 1, 2) + phi.shape)
        for m in range(order + 1):
            for i in range(m + 1):
                w = math.comb(m, i) * rhos[i]
                out[m, 0] += w * cs[m - i]
                out[m, 1] += w * sn[m - i]
        out[0, 0] += self.center[0]
        out[0, 1] += self.center[1]
        return out

    def level(self, p):
        p = np.asarray(p, dtype=float)
        dx = p[..., 0] - self.center[0]
        dy = p[..., 1] - self.center[1]
        return np.hypot(dx, dy) - self.rho(np.arctan2(dy, dx), 0)

    def param_of(self, p):
        p = np.asarray(p, dtype=float)
        return np.mod(np.arctan2(p[..., 1] - self.center[1], p[..., 0] - self.center[0]), TWO_PI)


@dataclass(frozen=True)
class GraphPatch(BoundaryCurve):
    """Local chart  y = f(x), |x| <= chart_radius, of the underside of an obstacle.

    ``f(x) = offset + sum_n taylor[n] x^n / n!``; the parameter is ``x`` itself.
    """

    offset: float
    taylor: tuple[tuple[int, float], ...]
    chart_radius: float = 1.0

    closed = False
    endpoint = 0.0

    @classmethod
    def from_germ(cls, germ: "GraphGerm") -> "GraphPatch":
        return cls(0.5 * germ.L, tuple(sorted(germ.coeffs.items())), germ.radius)

    def f(self, x, m: int = 0):
        x = np.asarray(x, dtype=float)
        out = np.full(x.shape, self.offset if m == 0 else 0.0)
        for n, fn in self.taylor:
            if n >= m:
                out = out + fn * x ** (n - m) / math.factorial(n - m)
        return out

    def derivatives(self, phi, order):
        x = np.asarray(phi, dtype=float)
        out = np.zeros((order + 1, 2) + x.shape)
        out[0, 0] = x
        if order >= 1:
            out[1, 0] = 1.0
        for m in range(order + 1):
            out[m, 1] = self.f(x, m)
        return out

    def level(self, p):
        p = np.asarray(p, dtype=float)
        return self.f(p[..., 0]) - p[..., 1]

    def param_of(self, p):
        return np.asarray(p, dtype=float)[..., 0]


@dataclass(frozen=True)
class Mirrored(BoundaryCurve):
    """Reflection of ``base`` across y = 0, reparametrised by phi -> -phi to stay counterclockwise."""

    base: BoundaryCurve

    @property
    def closed(self):
        return self.base.closed

    @property
    def endpoint(self):
        e = -self.base.endpoint
        return e % TWO_PI if self.base.closed else e

    @property
    def chart_radius(self):
        return self.base.chart_radius

    def derivatives(self, phi, order):
        phi = np.asarray(phi, dtype=float)
        d = self.base.derivatives(-phi, order)
        sign = np.array([(-1.0) ** m for m in range(order + 1)]).reshape((-1,) + (1,) * phi.ndim)
        out = np.empty_like(d)
        out[:, 0] = sign * d[:, 0]
        out[:, 1] = -sign * d[:, 1]
        return out

    def level(self, p):
        p = np.asarray(p, dtype=float)
        return self.base.level(reflect(p))

    def param_of(self, p):
        t = -self.base.param_of(reflect(np.asarray(p, dtype=float)))
        return np.mod(t, TWO_PI) if self.base.closed else t


def reflect(p) -> np.ndarray:
    """Reflection (x, y) -> (x, -y)."""
    p = np.array(p, dtype=float)
    p[..., 1] = -p[..., 1]
    return p


@dataclass
class GraphGerm:
    """Taylor data f^(n)(0), n >= 2, of the graph of the upper component.

    f(0) = L/2 and f'(0) = 0 are implicit.  ``radius`` bounds the chart.
    """

    L: float
    coeffs: Mapping[int, float]
    radius: float = 1.0

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError("gap length L must be positive")
        coeffs = {}
        for n, v in dict(self.coeffs).items():
            n = int(n)
            if n < 2:
                raise ValueError(f"order {n} is not storable (f(0) = L/2 and f'(0) = 0 are implicit)")
            coeffs[n] = float(v)
        self.coeffs = dict(sorted(coeffs.items()))

    def get(self, n: int, default: float = 0.0) -> float:
        return self.coeffs.get(n, default)

    @property
    def order(self) -> int:
        return max(self.coeffs, default=1)

    def truncated(self, order: int) -> "GraphGerm":
        return GraphGerm(self.L, {n: v for n, v in self.coeffs.items() if n <= order}, self.radius)

    def flipped(self) -> "GraphGerm":
        """Germ of the x -> -x reflected domain (odd orders change sign)."""
        return GraphGerm(self.L, {n: (-v if n % 2 else v) for n, v in self.coeffs.items()}, self.radius)

    def __call__(self, x, m: int = 0):
        """f^(m)(x) from the truncated Taylor polynomial."""
        x = np.asarray(x, dtype=float)
        out = np.full(x.shape, 0.5 * self.L if m == 0 else 0.0)
        for n, fn in self.coeffs.items():
            if n >= m:
                out = out + fn * x ** (n - m) / math.factorial(n - m)
        return out

    def to_json(self) -> dict:
        return {"type": "germ", "L": self.L, "coeffs": {str(n): v for n, v in self.coeffs.items()}}


@dataclass(frozen=True)
class ObstaclePair:
    """Upper component plus its mirror image across y = 0."""

    upper: BoundaryCurve
    L: float
    lower: BoundaryCurve = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "lower", Mirrored(self.upper))

    @property
    def components(self) -> tuple[BoundaryCurve, BoundaryCurve]:
        return (self.upper, self.lower)

    def curve(self, sign: int) -> BoundaryCurve:
        return self.upper if sign > 0 else self.lower

    def endpoint_param(self, sign: int) -> float:
        return self.curve(sign).endpoint

    @property
    def endpoints(self) -> np.ndarray:
        return np.array([[0.0, 0.5 * self.L], [0.0, -0.5 * self.L]])


def mirror(upper: BoundaryCurve, L: float, n_check: int = 512, tol: float = 1e-9) -> ObstaclePair:
    """Build the mirror-symmetric pair and check its geometric preconditions."""
    if not L > 0:
        raise ValueError("gap length L must be positive")
    upper.validate()
    pair = ObstaclePair(upper, float(L))
    a = upper.point(upper.endpoint)
    nu = upper.normal(upper.endpoint)
    if not (abs(a[0]) < tol and abs(a[1] - 0.5 * L) < tol):
        raise ValueError(f"upper component must touch (0, L/2); endpoint is {a}")
    if not (abs(nu[0]) < tol and nu[1] < 0):
        raise NoGraphChart("normal at the bouncing-ball endpoint is not vertical")
    pu = upper.sample(n_check)
    pl = pair.lower.sample(n_check)
    dist = np.min(np.hypot(pu[:, None, 0] - pl[None, :, 0], pu[:, None, 1] - pl[None, :, 1]))
    if dist <= 0.0 or np.any(upper.inside(pl)) or np.any(pair.lower.inside(pu)):
        raise ComponentsIntersect(f"components meet (sampled distance {dist:.3g})")
    return pair


# -- builders ---------------------------------------------------------------
def two_disk(radius: float, gap: float) -> ObstaclePair:
    return mirror(Circle((0.0, 0.5 * gap + radius), radius), gap)


def two_ellipse(a: float, b: float, gap: float) -> ObstaclePair:
    return mirror(Ellipse((0.0, 0.5 * gap + b), a, b), gap)


def perturbed_pair(radius: float, gap: float, cosine_coeffs=()) -> ObstaclePair:
    coeffs = tuple(float(c) for c in cosine_coeffs)
    cy = 0.5 * gap + radius + sum(coeffs)
    return mirror(PerturbedCircle((0.0, cy), float(radius), coeffs), gap)


def germ_pair(germ: GraphGerm) -> ObstaclePair:
    return mirror(GraphPatch.from_germ(germ), germ.L)


_DOMAIN_KEYS = {
    "two_disk": {"radius", "gap"},
    "two_ellipse": {"a", "b", "gap"},
    "perturbed_circle": {"radius", "gap", "cosine_coeffs"},
    "germ": {"L", "coeffs", "radius"},
    "disk": {"radius", "center"},
}


def domain_from_dict(desc: Mapping):
    """Domain from its JSON description; a single ``disk`` yields a bare curve."""
    kind = desc.get("type")
    if kind not in _DOMAIN_KEYS:
        raise ValueError(f"unknown domain type {kind!r}")
    extra = set(desc) - _DOMAIN_KEYS[kind] - {"type"}
    if extra:
        raise ValueError(f"unknown keys for {kind}: {sorted(extra)}")
    if kind == "two_disk":
        return two_disk(float(desc["radius"]), float(desc["gap"]))
    if kind == "two_ellipse":
        return two_ellipse(float(desc["a"]), float(desc["b"]), float(desc["gap"]))
    if kind == "perturbed_circle":
        return perturbed_pair(float(desc["radius"]), float(desc["gap"]), desc.get("cosine_coeffs", ()))
    if kind == "germ":
        return germ_pair(germ_from_dict(desc))
    return Circle(tuple(desc.get("center", (0.0, 0.0))), float(desc["radius"]))


def germ_from_dict(desc: Mapping) -> GraphGerm:
    extra = set(desc) - _DOMAIN_KEYS["germ"] - {"type"}
    if extra:
        raise ValueError(f"unknown keys for germ: {sorted(extra)}")
    return GraphGerm(float(desc["L"]), {int(k): float(v) for k, v in desc["coeffs"].items()},
                     float(desc.get("radius", 1.0)))


# -- graph germ extraction --------------------------------------------------
def _mul(a: np.ndarray, b: np.ndarray, deg: int) -> np.ndarray:
    return np.convolve(a, b)[: deg + 1]


def germ_from_curve(curve: BoundaryCurve, L: float, J: int, tol: float = 1e-10) -> GraphGerm:
    """Taylor coefficients f^(2)(0) ... f^(2J)(0) of the graph through the endpoint.

    The parametrisation is expanded to order 2J at the endpoint, x(phi) is
    inverted as a power series and composed into y(phi), so no finite
    differences enter at any order.
    """
    deg = 2 * J
    phi0 = curve.endpoint
    d = curve.derivatives(phi0, deg)
    fact = np.array([math.factorial(m) for m in range(deg + 1)], dtype=float)
    X = d[:, 0] / fact
    Y = d[:, 1] / fact
    X[0] = 0.0
    scale = math.hypot(X[1], Y[1])
    if abs(Y[1]) > tol * scale or X[1] <= 0:
        raise NoGraphChart("tangent at the endpoint is not horizontal")
    # series reversion: s(x) with X(s(x)) = x
    s = np.zeros(deg + 1)
    s[1] = 1.0 / X[1]
    for _ in range(deg):
        acc = np.zeros(deg + 1)
        acc[1] = 1.0
        power = s.copy()
        for m in range(2, deg + 1):
            power = _mul(power, s, deg)
            acc -= X[m] * power
        s = acc / X[1]
    f = np.zeros(deg + 1)
    power = np.zeros(deg + 1)
    power[0] = 1.0
    for m in range(1, deg + 1):
        power = _mul(power, s, deg)
        f += Y[m] * power
    coeffs = {n: float(f[n] * fact[n]) for n in range(2, deg + 1)}
    if curve.closed:
        radius = min(1.0, 0.5 / max(abs(float(curve.curvature(phi0))), 1e-12))
    else:
        radius = curve.chart_radius
    return GraphGerm(L, coeffs, radius)
