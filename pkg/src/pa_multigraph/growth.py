"""pa_multigraph.growth

Edge-growth functions f(t), their prefix sums F(t), the step-function
extension to the reals, and the Assumption (1)/(2) diagnostics.

A growth spec is a tagged pydantic record, e.g.::

    {"kind": "linear_floor", "c": "1", "e_prime": 1, "v_prime": 2}

Rationals are strings parsed exactly into :class:`fractions.Fraction`.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Annotated, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, PlainSerializer, model_validator

from .errors import (
    ConditionViolation,
    DomainError,
    InsufficientRangeError,
    InvariantViolation,
    OutOfRangeError,
)
from .utils import parse_rational, rational_str

__all__ = [
    "Rational",
    "ConstantGrowth",
    "LinearFloorGrowth",
    "PowerFloorGrowth",
    "PowerOfTwoSpikeGrowth",
    "XiProductGrowth",
    "TableGrowth",
    "GrowthSpec",
    "GrowthTable",
    "AssumptionReport",
    "S1Hint",
    "S2Hint",
    "eval_f",
    "prefix_F",
    "integral_f_over_F_pow",
    "sum_f_over_F_pow",
    "assumption_report",
    "xi_build",
    "isolation_probability",
    "DEFAULT_S2_TOLERANCE",
    "DEFAULT_S1_FLOOR",
]

logger = logging.getLogger(__name__)

DEFAULT_S2_TOLERANCE = 1e-2
DEFAULT_S1_FLOOR = 1e-1
_INT64_SAFE = 2**62

Rational = Annotated[
    Fraction,
    BeforeValidator(parse_rational),
    PlainSerializer(rational_str, return_type=str),
]


# ---- SPECS ---------------------------------------------------------------
class _GrowthBase(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True, extra="forbid")

    def stage_edges(self, t: int) -> int:  # pragma: no cover - overridden
        raise NotImplementedError


class _SeededGrowth(_GrowthBase):
    e_prime: int = Field(..., ge=0, description="Edge count e' of the seed graph, f(0)")
    v_prime: int = Field(..., ge=1, description="Node count v' of the seed graph")


class ConstantGrowth(_SeededGrowth):
    kind: Literal["constant"] = "constant"
    C: int = Field(..., ge=1, description="Edges added per stage for t >= v'")

    def stage_edges(self, t: int) -> int:
        return self.C


class LinearFloorGrowth(_SeededGrowth):
    kind: Literal["linear_floor"] = "linear_floor"
    c: Rational = Field(..., description="Slope; f(t) = max(1, floor(c*t))")

    @model_validator(mode="after")
    def _positive(self):
        if self.c <= 0:
            raise ValueError("c must be positive")
        return self

    def stage_edges(self, t: int) -> int:
        return max(1, math.floor(self.c * t))


class PowerFloorGrowth(_SeededGrowth):
    kind: Literal["power_floor"] = "power_floor"
    c: Rational = Field(..., description="Coefficient; f(t) = max(1, floor(c*t^alpha))")
    alpha: Rational = Field(..., description="Exponent, nonnegative rational")

    @model_validator(mode="after")
    def _ranges(self):
        if self.c <= 0:
            raise ValueError("c must be positive")
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")
        return self

    def stage_edges(self, t: int) -> int:
        p, q = self.alpha.numerator, self.alpha.denominator
        # floor(c * t^(p/q)) is the largest n with n^q <= c^q * t^p
        return max(1, _floor_root(self.c**q * t**p, q))


class PowerOfTwoSpikeGrowth(_SeededGrowth):
    kind: Literal["power_of_two_spike"] = "power_of_two_spike"

    def stage_edges(self, t: int) -> int:
        return t if t & (t - 1) == 0 else 1


class XiProductGrowth(_GrowthBase):
    """f(0) = xi_0 and f(t) = xi_0 * prod_{n=1}^{t-1} (xi_n + 1) * xi_t.

    ``xi`` lists xi_0, xi_1, ...; the last entry repeats beyond the list.
    """

    kind: Literal["xi_product"] = "xi_product"
    xi: List[Rational] = Field(..., min_length=1)

    @model_validator(mode="after")
    def _positive(self):
        if any(x <= 0 for x in self.xi):
            raise ValueError("every xi_n must be positive")
        return self

    def xi_at(self, n: int) -> Fraction:
        return self.xi[n] if n < len(self.xi) else self.xi[-1]

    @property
    def v_prime(self) -> int:
        return 1

    @property
    def e_prime(self) -> int:
        x0 = self.xi[0]
        if x0.denominator != 1:
            raise ConditionViolation(0, x0)
        return int(x0)

    def exact_values(self, horizon: int) -> List[Fraction]:
        """Exact f(0..horizon) before the integrality check."""
        out = [self.xi[0]]
        F = self.xi[0]
        for t in range(1, horizon + 1):
            ft = F * self.xi_at(t)
            out.append(ft)
            F += ft
        return out

    def stage_edges(self, t: int) -> int:
        value = self.exact_values(t)[t]
        if value.denominator != 1:
            raise ConditionViolation(t, value)
        return int(value)


class TableGrowth(_GrowthBase):
    kind: Literal["table"] = "table"
    values: List[int] = Field(..., min_length=2, description="f(0), f(1), ... explicitly")

    @model_validator(mode="after")
    def _structure(self):
        if any(v < 0 for v in self.values):
            raise ValueError("table values must be nonnegative")
        if not any(v > 0 for v in self.values[1:]):
            raise ValueError("table never adds edges after t=0")
        v_prime = self.v_prime
        if any(v < 1 for v in self.values[v_prime:]):
            raise ValueError(f"f(t) >= 1 required for all t >= v' = {v_prime}")
        return self

    @property
    def e_prime(self) -> int:
        return self.values[0]

    @property
    def v_prime(self) -> int:
        return next(t for t, v in enumerate(self.values) if t >= 1 and v > 0)

    def stage_edges(self, t: int) -> int:
        if t >= len(self.values):
            raise OutOfRangeError(f"table growth defines f(t) only for t < {len(self.values)}, got {t}")
        return self.values[t]


GrowthSpec = Annotated[
    Union[
        ConstantGrowth,
        LinearFloorGrowth,
        PowerFloorGrowth,
        PowerOfTwoSpikeGrowth,
        XiProductGrowth,
        TableGrowth,
    ],
    Field(discriminator="kind"),
]


def _floor_root(x: Fraction, q: int) -> int:
    """Largest integer n >= 0 with n**q <= x."""
    if q == 1:
        return math.floor(x)
    n = int(float(x) ** (1.0 / q))
    while n > 0 and Fraction(n) ** q > x:
        n -= 1
    while Fraction(n + 1) ** q <= x:
        n += 1
    return n


# ---- EVALUATION ----------------------------------------------------------
def eval_f(spec: GrowthSpec, t: int) -> int:
    """f(t) obeying f(0)=e', f(t)=0 for 1<=t<v', f(t)>=1 for t>=v'."""
    if t < 0:
        raise DomainError(f"t must be nonnegative, got {t}")
    if isinstance(spec, (TableGrowth, XiProductGrowth)):
        return spec.stage_edges(t)
    if t == 0:
        return spec.e_prime
    if t < spec.v_prime:
        return 0
    return spec.stage_edges(t)


def _as_int_array(values: Sequence[int]) -> np.ndarray:
    if values and max(values) >= _INT64_SAFE:
        return np.array(values, dtype=object)
    return np.array(values, dtype=np.int64)


@dataclass(frozen=True, eq=False)
class GrowthTable:
    """f(0..horizon) and F(0..horizon+1), exact integers, immutable."""

    spec: GrowthSpec
    horizon: int
    f_values: np.ndarray = field(repr=False)
    F_prefix: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, spec: GrowthSpec, horizon: int) -> "GrowthTable":
        if horizon < spec.v_prime:
            raise DomainError(f"horizon {horizon} is below v' = {spec.v_prime}")
        if isinstance(spec, XiProductGrowth):
            f_list = _xi_integer_values(spec, horizon)
        else:
            f_list = [eval_f(spec, t) for t in range(horizon + 1)]
        _check_structure(f_list, spec.e_prime, spec.v_prime)
        F_list = [0]
        for v in f_list:
            F_list.append(F_list[-1] + v)
        f_arr = _as_int_array(f_list)
        F_arr = _as_int_array(F_list)
        f_arr.setflags(write=False)
        F_arr.setflags(write=False)
        return cls(spec=spec, horizon=horizon, f_values=f_arr, F_prefix=F_arr)

    @property
    def v_prime(self) -> int:
        return self.spec.v_prime

    @property
    def e_prime(self) -> int:
        return self.spec.e_prime

    def f(self, t: int) -> int:
        if not 0 <= t <= self.horizon:
            raise OutOfRangeError(f"f({t}) outside [0, {self.horizon}]")
        return int(self.f_values[t])

    def F(self, t: int) -> int:
        return prefix_F(self, t)

    def f_real(self, x: float) -> int:
        """Step-function extension f(x) := f(floor(x))."""
        if x < 0:
            raise DomainError(f"x must be nonnegative, got {x}")
        return self.f(math.floor(x))

    def F_real(self, x: float) -> float:
        """Antiderivative of the step extension; agrees with F at integers."""
        if x < 0:
            raise DomainError(f"x must be nonnegative, got {x}")
        s = math.floor(x)
        if s == x:
            return float(self.F(s))
        return self.F(s) + self.f(s) * (x - s)

    def ratio_array(self) -> np.ndarray:
        """f(s)/F(s) as floats for s = 0..horizon (0 where F(s) = 0)."""
        f = self.f_values.astype(float)
        F = self.F_prefix[: self.horizon + 1].astype(float)
        out = np.zeros_like(f)
        np.divide(f, F, out=out, where=F > 0)
        return out


def _xi_integer_values(spec: XiProductGrowth, horizon: int) -> List[int]:
    exact = spec.exact_values(horizon)
    for t, value in enumerate(exact):
        if value.denominator != 1 or value <= 0:
            raise ConditionViolation(t, value)
    return [int(v) for v in exact]


def _check_structure(f_list: Sequence[int], e_prime: int, v_prime: int) -> None:
    if f_list[0] != e_prime:
        raise InvariantViolation(f"f(0) = {f_list[0]} but e' = {e_prime}")
    for t, v in enumerate(f_list[1:], start=1):
        if v < 0:
            raise InvariantViolation(f"f({t}) = {v} is negative")
        if t < v_prime and v != 0:
            raise InvariantViolation(f"f({t}) = {v} but must be 0 for 1 <= t < v' = {v_prime}")
        if t >= v_prime and v < 1:
            raise InvariantViolation(f"f({t}) = {v} but must be >= 1 for t >= v' = {v_prime}")


def prefix_F(table: GrowthTable, t: int) -> int:
    """F(t) = sum_{i<t} f(i) = |E(t)|."""
    if t < 0 or t > table.horizon:
        raise OutOfRangeError(f"F({t}) outside [0, {table.horizon}]")
    return int(table.F_prefix[t])


def _check_window(table: GrowthTable, m: int, t: int) -> None:
    if t > table.horizon:
        raise OutOfRangeError(f"t = {t} exceeds horizon {table.horizon}")
    if m > t:
        raise DomainError(f"m = {m} exceeds t = {t}")
    if m < 0 or prefix_F(table, m) == 0:
        raise DomainError(f"F(m) must be positive, m = {m}")


def integral_f_over_F_pow(table: GrowthTable, m: int, t: int, beta: Union[Fraction, float, int]) -> float:
    """Exact integral of f(s)/F(s)^beta over [m, t] for the step extension of f.

    On [s, s+1] F is linear with slope f(s), so each unit interval contributes
    ln(F(s+1)/F(s)) when beta = 1 and (F(s)^(1-beta) - F(s+1)^(1-beta))/(beta-1)
    otherwise.
    """
    beta = Fraction(beta) if not isinstance(beta, float) else beta
    if beta < 1:
        raise DomainError(f"beta must be >= 1, got {beta}")
    _check_window(table, m, t)
    if m == t:
        return 0.0
    f = table.f_values[m:t].astype(float)
    F0 = table.F_prefix[m:t].astype(float)
    F1 = table.F_prefix[m + 1 : t + 1].astype(float)
    if beta == 1:
        parts = np.log1p(f / F0)
    else:
        b = float(beta)
        parts = (F0 ** (1.0 - b) - F1 ** (1.0 - b)) / (b - 1.0)
    return math.fsum(parts.tolist())


def sum_f_over_F_pow(table: GrowthTable, m: int, t: int, beta: Union[Fraction, float, int]) -> float:
    """sum_{s=m}^{t} f(s)/F(s)^beta."""
    if beta < 1:
        raise DomainError(f"beta must be >= 1, got {beta}")
    _check_window(table, m, t)
    f = table.f_values[m : t + 1].astype(float)
    F = table.F_prefix[m : t + 1].astype(float)
    return math.fsum((f / F ** float(beta)).tolist())


# ---- ASSUMPTION DIAGNOSTICS ----------------------------------------------
class S1Hint(str, Enum):
    DIVERGING = "S1_diverging"
    INCONCLUSIVE = "S1_inconclusive"


class S2Hint(str, Enum):
    CONVERGING = "S2_converging"
    INCONCLUSIVE = "S2_inconclusive"


class AssumptionReport(BaseModel):
    """Partial sums of f/F and (f/F)^2; verdicts are heuristic hints only."""

    horizon: int
    checkpoints: List[int]
    s1_partial: List[float] = Field(..., description="sum_{v'<=s<=T} f(s)/F(s) at each checkpoint")
    s2_partial: List[float] = Field(..., description="sum_{v'<=s<=T} (f(s)/F(s))^2 at each checkpoint")
    doubling_points: List[int] = Field(..., description="checkpoints T with 2T <= horizon")
    s1_doubling_increments: List[float]
    s2_doubling_increments: List[float]
    verdict_hint: Tuple[S1Hint, S2Hint]


def _default_checkpoints(v_prime: int, horizon: int) -> List[int]:
    pts = set()
    T = 1
    while T <= horizon:
        if T >= v_prime:
            pts.add(T)
        T *= 2
    if horizon // 2 >= v_prime:
        pts.add(horizon // 2)
    pts.add(horizon)
    return sorted(pts)


def assumption_report(
    table: GrowthTable,
    horizon: Optional[int] = None,
    checkpoints: Optional[Sequence[int]] = None,
    s2_tolerance: float = DEFAULT_S2_TOLERANCE,
    s1_floor: float = DEFAULT_S1_FLOOR,
) -> AssumptionReport:
    horizon = table.horizon if horizon is None else horizon
    if horizon > table.horizon:
        raise OutOfRangeError(f"horizon {horizon} exceeds table horizon {table.horizon}")
    v_prime = table.v_prime
    pts = sorted(set(checkpoints)) if checkpoints else _default_checkpoints(v_prime, horizon)
    if pts[0] < v_prime or pts[-1] > horizon:
        raise DomainError(f"checkpoints must lie in [{v_prime}, {horizon}]")
    if horizon < 2 * pts[0]:
        raise InsufficientRangeError(
            f"horizon {horizon} < 2 * first checkpoint {pts[0]}: no doubling increment available"
        )

    r = table.ratio_array()[: horizon + 1].copy()
    r[:v_prime] = 0.0
    s1 = np.cumsum(r)
    s2 = np.cumsum(r * r)

    doubling = [T for T in pts if 2 * T <= horizon]
    s1_inc = [float(s1[2 * T] - s1[T]) for T in doubling]
    s2_inc = [float(s2[2 * T] - s2[T]) for T in doubling]
    hint = (
        S1Hint.DIVERGING if s1_inc[-1] > s1_floor else S1Hint.INCONCLUSIVE,
        S2Hint.CONVERGING if s2_inc[-1] < s2_tolerance else S2Hint.INCONCLUSIVE,
    )
    if hint != (S1Hint.DIVERGING, S2Hint.CONVERGING):
        logger.warning("assumption hints inconclusive for %s: %s", table.spec.kind, [h.value for h in hint])
    return AssumptionReport(
        horizon=horizon,
        checkpoints=pts,
        s1_partial=[float(s1[T]) for T in pts],
        s2_partial=[float(s2[T]) for T in pts],
        doubling_points=doubling,
        s1_doubling_increments=s1_inc,
        s2_doubling_increments=s2_inc,
        verdict_hint=hint,
    )


# ---- XI PRODUCT ----------------------------------------------------------
def xi_build(xi: Sequence[Union[str, int, Fraction]], horizon: int) -> TableGrowth:
    """Build f from a positive rational sequence xi and return it as a table spec.

    Raises :class:`ConditionViolation` naming the first t where f(t) is not a
    positive integer.
    """
    spec = XiProductGrowth(xi=list(xi))
    values = _xi_integer_values(spec, horizon)
    # F(t) = xi_0 * prod_{n=1}^{t-1} (xi_n + 1) must match the prefix sums
    product = spec.xi[0]
    running = values[0]
    for t in range(1, horizon + 1):
        if product != running:
            raise InvariantViolation(f"F({t}) = {running} but product form gives {product}")
        product *= spec.xi_at(t) + 1
        running += values[t]
    table = TableGrowth(values=values)
    _check_structure(values, table.e_prime, table.v_prime)
    return table


# ---- ISOLATION -----------------------------------------------------------
def isolation_probability(table: GrowthTable, d: int, t0: int, t1: int) -> float:
    """P(a node of degree d at t0 gains no edge in stages t0..t1-1) under MPA.

    Equals prod_t (1 - d/2F(t))^f(t); it tends to 0 when sum f/F diverges.
    """
    if d < 1:
        raise DomainError(f"degree must be positive, got {d}")
    _check_window(table, t0, t1)
    log_p = 0.0
    for t in range(t0, t1):
        ft = table.f(t)
        if ft == 0:
            continue
        two_F = 2 * table.F(t)
        if d > two_F:
            raise DomainError(f"degree {d} exceeds 2F({t}) = {two_F}")
        if d == two_F:
            return 0.0
        log_p += ft * math.log1p(-d / two_F)
    return math.exp(log_p)
