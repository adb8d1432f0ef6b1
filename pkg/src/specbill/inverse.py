"""Forward wave-invariant model for the iterates of the bouncing ball and germ recovery by induction on j.

Both directions run over exact rationals by default: binary floats are
rationals, so a germ given in floats maps to an exact table and back.  The
2x2 decoupling systems become ill-conditioned as c grows (F_r / (h11)^2
separates distinct r only by ~e^{-alpha r}), which is why the float path
alone cannot meet a 1e-9 relative round trip on small coefficients.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Mapping, Union

from .circulant import CirculantHessian, cube_sum, inverse_row
from .errors import (
    Degenerate,
    EvenSymmetry,
    MissingCoefficient,
    NegativeSquare,
    OddObstruction,
    SingularSystem,
)
from .geometry import GraphGerm

ZERO_TOL = 1e-12

Number = Union[float, Fraction]


def _num(v, exact: bool) -> Number:
    return Fraction(v) if exact else float(v)


def cosh_alpha(L: Number, f2: Number) -> Number:
    """c = cosh(alpha/2) = 1 + L |f''(0)| for a pair of convex components."""
    if not L > 0:
        raise ValueError("L must be positive")
    if f2 == 0:
        raise Degenerate("f''(0) = 0: the bouncing ball is parabolic")
    return 1 + L * abs(f2)


def f2_from_c(L: Number, c: Number) -> Number:
    return (c - 1) / L


def _h11_Fr(c: Number, r: int) -> tuple[Number, Number]:
    # Fraction(3) and 3.0 hash alike, so the cache key carries the type
    return _h11_Fr_cached(c, r, isinstance(c, Fraction))


@lru_cache(maxsize=4096)
def _h11_Fr_cached(c: Number, r: int, exact: bool) -> tuple[Number, Number]:
    H = CirculantHessian(r, c)
    if exact:
        return inverse_row(H, exact=True)[0], cube_sum(H, exact=True)
    return float(inverse_row(H)[0]), cube_sum(H)


@dataclass(frozen=True)
class LeadingCoefficients:
    """Weights of f^(2j)(0) and f'''(0) f^(2j-1)(0) in D_{r,j}; exact when c is a Fraction."""

    r: int
    j: int
    h11: Number
    K: Number
    Fr: Number

    @classmethod
    def compute(cls, c: Number, r: int, j: int) -> "LeadingCoefficients":
        if not c > 1:
            raise Degenerate(f"c = {c} <= 1")
        if not isinstance(c, Fraction):
            c = float(c)
        h11, Fr = _h11_Fr(c, int(r))
        return cls(int(r), int(j), h11, 1 / (2 * c - 2), Fr)

    @property
    def even_weight(self) -> Number:
        return self.r * 2 * self.h11**self.j

    @property
    def odd_weight(self) -> Number:
        h, j = self.h11, self.j
        return self.r * (2 * h**j * self.K + h ** (j - 2) * self.Fr)


# -- lower-order term models ---------------------------------------------
# model(coeffs, r, j, c) may only read orders <= 2j - 2
LowerOrderModel = Callable[[Mapping[int, Number], int, int, Number], Number]


def _zero_model(coeffs, r, j, c):
    return 0 * c


def _poly_model(coeffs, r, j, c):
    # synthetic stand-in: r (h11)^(j-1) sum_{n=2}^{2j-2} f_n^2 / n
    h11 = LeadingCoefficients.compute(c, r, j).h11
    zero = 0 * c
    return r * h11 ** (j - 1) * sum((coeffs.get(n, zero) ** 2 / n for n in range(2, 2 * j - 1)), zero)


MODELS: dict[str, LowerOrderModel] = {"ZERO": _zero_model, "POLY": _poly_model}


def _model(name: str) -> LowerOrderModel:
    try:
        return MODELS[name.upper()]
    except KeyError:
        raise ValueError(f"unknown lower-order model {name!r}; choose from {sorted(MODELS)}") from None


def _exact_coeffs(germ: GraphGerm, exact: bool) -> dict[int, Number]:
    return {n: _num(v, exact) for n, v in germ.coeffs.items()}


def lower_order_term(germ: GraphGerm, r: int, j: int, lower_order_model: str = "ZERO",
                     exact: bool = False) -> Number:
    coeffs = {n: v for n, v in _exact_coeffs(germ, exact).items() if n <= 2 * j - 2}
    c = cosh_alpha(_num(germ.L, exact), coeffs.get(2, 0))
    return _model(lower_order_model)(coeffs, r, j, c)


# -- table -----------------------------------------------------------------
@dataclass
class WaveInvariantTable:
    """Observables c and D_{r,j} of the iterates gamma^r, r in a finite set R.

    Values are Fractions when the table was produced in exact mode.
    """

    L: Number
    c: Number
    data: dict[int, dict[int, Number]] = field(default_factory=dict)
    model: str = "ZERO"

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError("L must be positive")
        if not self.c > 1:
            raise Degenerate(f"c = {self.c} <= 1")
        conv = Fraction if self.exact_input() else float
        self.L, self.c = conv(self.L), conv(self.c)
        self.data = {int(r): {int(j): conv(v) for j, v in row.items()} for r, row in self.data.items()}
        for r, row in self.data.items():
            for j, v in row.items():
                if not math.isfinite(v):
                    raise ValueError(f"D[{r}][{j}] is not finite")
        self.model = self.model.upper()
        _model(self.model)

    def exact_input(self) -> bool:
        vals = [self.L, self.c] + [v for row in self.data.values() for v in row.values()]
        return all(isinstance(v, (Fraction, int)) for v in vals)

    @property
    def exact(self) -> bool:
        return isinstance(self.c, Fraction)

    @property
    def r_values(self) -> list[int]:
        return sorted(self.data)

    @property
    def J(self) -> int:
        return min((max(row, default=1) for row in self.data.values()), default=1)

    def D(self, r: int, j: int) -> Number:
        try:
            return self.data[r][j]
        except KeyError:
            raise MissingCoefficient(f"table has no D[{r}][{j}]") from None

    def to_json(self) -> dict:
        out = {
            "L": float(self.L),
            "c": float(self.c),
            "model": self.model,
            "D": {str(r): {str(j): float(v) for j, v in sorted(row.items())}
                  for r, row in sorted(self.data.items())},
        }
        if self.exact:
            # rationals as "p/q" strings so that a file round trip stays exact
            out["exact"] = {
                "L": str(self.L),
                "c": str(self.c),
                "D": {str(r): {str(j): str(v) for j, v in sorted(row.items())}
                      for r, row in sorted(self.data.items())},
            }
        return out

    @classmethod
    def from_json(cls, obj: Mapping) -> "WaveInvariantTable":
        extra = set(obj) - {"L", "c", "model", "D", "exact", "meta"}
        if extra:
            raise ValueError(f"unknown table keys: {sorted(extra)}")
        ex = obj.get("exact")
        if ex is not None:
            table = cls(Fraction(ex["L"]), Fraction(ex["c"]),
                        {r: {j: Fraction(v) for j, v in row.items()} for r, row in ex["D"].items()},
                        obj.get("model", "ZERO"))
            plain = cls(float(obj["L"]), float(obj["c"]), obj["D"], obj.get("model", "ZERO"))
            if abs(float(table.c) - plain.c) > 1e-15 * plain.c or plain.data.keys() != table.data.keys():
                raise ValueError("exact and decimal parts of the table disagree")
            return table
        return cls(float(obj["L"]), float(obj["c"]), obj["D"], obj.get("model", "ZERO"))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


# -- forward -----------------------------------------------------------------
def _forward(coeffs: Mapping[int, Number], L: Number, r: int, j: int, model: LowerOrderModel) -> Number:
    c = cosh_alpha(L, coeffs.get(2, 0))
    lc = LeadingCoefficients.compute(c, r, j)
    zero = 0 * c
    lead = (lc.even_weight * coeffs.get(2 * j, zero)
            + lc.odd_weight * coeffs.get(3, zero) * coeffs.get(2 * j - 1, zero))
    lower = {n: v for n, v in coeffs.items() if n <= 2 * j - 2}
    return lead + model(lower, r, j, c)


def forward_invariant(germ: GraphGerm, r: int, j: int, lower_order_model: str = "ZERO",
                      exact: bool = False) -> Number:
    """D_{r,j} = r{2 h^j f_2j + [2 h^j K + h^(j-2) F_r] f_3 f_(2j-1)} + B(lower orders)."""
    if j < 2:
        raise ValueError("j must be at least 2")
    if germ.order < 2 * j:
        raise MissingCoefficient(f"germ stops at order {germ.order}, need {2 * j}")
    return _forward(_exact_coeffs(germ, exact), _num(germ.L, exact), r, j, _model(lower_order_model))


def forward_table(germ: GraphGerm, R: Iterable[int] = (2, 4), J: int | None = None,
                  lower_order_model: str = "ZERO", exact: bool = True) -> WaveInvariantTable:
    J = germ.order // 2 if J is None else J
    if J < 2:
        raise ValueError("J must be at least 2")
    if germ.order < 2 * J:
        raise MissingCoefficient(f"germ stops at order {germ.order}, need {2 * J}")
    coeffs = _exact_coeffs(germ, exact)
    L = _num(germ.L, exact)
    model = _model(lower_order_model)
    data = {int(r): {j: _forward(coeffs, L, int(r), j, model) for j in range(2, J + 1)}
            for r in sorted(set(R))}
    return WaveInvariantTable(L, cosh_alpha(L, coeffs.get(2, 0)), data, lower_order_model)


# -- inverse -----------------------------------------------------------------
def decoupling_matrix(c: Number, j: int, r1: int, r2: int):
    a = LeadingCoefficients.compute(c, r1, j)
    b = LeadingCoefficients.compute(c, r2, j)
    return (a.even_weight, a.odd_weight), (b.even_weight, b.odd_weight)


def decoupling_det(c: Number, j: int, r1: int, r2: int) -> Number:
    (a11, a12), (a21, a22) = decoupling_matrix(c, j, r1, r2)
    return a11 * a22 - a12 * a21


def _solve2(c, j, r1, r2, d1, d2):
    (a11, a12), (a21, a22) = decoupling_matrix(c, j, r1, r2)
    det = a11 * a22 - a12 * a21
    scale = abs(a11 * a22) + abs(a12 * a21)
    if abs(det) < 1e-14 * scale or det == 0:
        raise SingularSystem(f"decoupling determinant {float(det):.3g} vanishes for r = {r1}, {r2}")
    return (a22 * d1 - a12 * d2) / det, (a11 * d2 - a21 * d1) / det


def decouple(j: int, table: WaveInvariantTable, r1: int, r2: int) -> tuple[Number, Number]:
    """X = f^(2j)(0) and Z = f'''(0) f^(2j-1)(0) from D_{r1,j} and D_{r2,j}.

    Lower-order contributions must already be removed from the table.
    """
    if r1 == r2:
        raise SingularSystem("need two distinct r")
    return _solve2(table.c, j, r1, r2, table.D(r1, j), table.D(r2, j))


def default_pair(r_values: Iterable[int]) -> tuple[int, int]:
    rs = sorted(set(r_values))
    even = [r for r in rs if r % 2 == 0]
    pick = even if len(even) >= 2 else rs
    if len(pick) < 2:
        raise SingularSystem("table needs at least two distinct r")
    return pick[0], pick[1]


def _sqrt(z: Number) -> Number:
    if isinstance(z, Fraction):
        p, q = z.numerator, z.denominator
        sp, sq = math.isqrt(p), math.isqrt(q)
        if sp * sp == p and sq * sq == q:
            return Fraction(sp, sq)
        return Fraction(math.sqrt(z))
    return math.sqrt(z)


def recover_germ(table: WaveInvariantTable, J: int | None = None, lower_order_model: str | None = None,
                 pair: tuple[int, int] | None = None) -> GraphGerm:
    """Recover f^(2) .. f^(2J) at the bouncing-ball endpoint, normalised to f'''(0) >= 0."""
    J = table.J if J is None else J
    model = _model(lower_order_model or table.model)
    r1, r2 = pair or default_pair(table.r_values)
    c, L = table.c, table.L
    zero = 0 * c
    coeffs: dict[int, Number] = {2: f2_from_c(L, c)}
    f3 = zero
    for j in range(2, J + 1):
        d1 = table.D(r1, j) - model(coeffs, r1, j, c)
        d2 = table.D(r2, j) - model(coeffs, r2, j, c)
        X, Z = _solve2(c, j, r1, r2, d1, d2)
        coeffs[2 * j] = X
        tol = ZERO_TOL * max(1.0, abs(float(X)))
        if j == 2:
            if Z < -tol:
                raise NegativeSquare(f"(f''')^2 = {float(Z):.3g} < 0: inconsistent table")
            f3 = _sqrt(max(Z, zero))
            if f3 <= ZERO_TOL:
                f3 = zero
            coeffs[3] = f3
            continue
        if f3 == 0:
            if abs(Z) > tol:
                raise OddObstruction(f"f'''(0) = 0 but f'''(0) f^({2 * j - 1})(0) = {float(Z):.3g}")
            coeffs[2 * j - 1] = zero
        else:
            coeffs[2 * j - 1] = Z / f3
    if J >= 2 and f3 == 0:
        warnings.warn("odd Taylor data vanish: even-symmetric germ, odd orders set to zero", EvenSymmetry)
    return GraphGerm(float(L), {n: float(v) for n, v in sorted(coeffs.items())})


def relative_errors(truth: GraphGerm, got: GraphGerm, orders: Iterable[int] | None = None) -> dict[int, float]:
    orders = range(2, truth.order + 1) if orders is None else orders
    out = {}
    for n in orders:
        a, b = truth.get(n), got.get(n)
        out[n] = abs(a - b) / abs(a) if a != 0 else abs(b)
    return out
