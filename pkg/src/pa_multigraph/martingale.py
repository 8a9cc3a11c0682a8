"""pa_multigraph.martingale

The normaliser A(t) = prod_{j=1}^{t-1} (1 + f(j)/2F(j)), the martingale
X_u(t) = d_u(t)/A(t), its desk-scale limit estimate x_u, the L2 increment
accumulator and the short-tail (sh) diagnostic.

A(t) is held as a running log-sum and exponentiated on demand; the relative
error budget is 1e-9 up to t = 1e5.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field

from .errors import ConfigError, DomainError, InvariantViolation, OutOfRangeError
from .growth import GrowthTable
from .pa_engine import Trajectory

__all__ = [
    "DEFAULT_ALPHA",
    "NormalizerTable",
    "TrackedNodeStats",
    "XLimitSummary",
    "normalizer_A",
    "normalizer_log_bounds",
    "mu_expected_increment",
    "conditional_variance",
    "X_value",
    "l2_accumulate",
    "sh_check",
    "count_sh_violations",
    "tracked_stats",
    "estimate_x_limits",
    "summarize_x",
    "martingale_mean_check",
    "degree_growth",
]

logger = logging.getLogger(__name__)

DEFAULT_ALPHA = Fraction(3, 4)
SUMMARY_QUANTILES = (0.001, 0.01, 0.05, 0.25, 0.5, 0.75, 0.95)


@dataclass(frozen=True, eq=False)
class NormalizerTable:
    """ln A(t) for t = 1..horizon (index 0 unused)."""

    growth: GrowthTable
    log_A: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, growth: GrowthTable) -> "NormalizerTable":
        h = growth.horizon
        f = growth.f_values[1:h].astype(float)
        F = growth.F_prefix[1:h].astype(float)
        if np.any((F == 0) & (f > 0)):
            raise DomainError("A(t) undefined: F(t) = 0 at a stage that adds edges")
        x = np.zeros_like(f)
        np.divide(f, 2.0 * F, out=x, where=F > 0)
        log_A = np.full(h + 1, np.nan)
        log_A[1] = 0.0
        log_A[2:] = np.cumsum(np.log1p(x))
        log_A.setflags(write=False)
        return cls(growth=growth, log_A=log_A)

    @property
    def horizon(self) -> int:
        return self.growth.horizon

    @property
    def A_values(self) -> np.ndarray:
        """A(1..horizon)."""
        return np.exp(self.log_A[1:])

    def A(self, t: int) -> float:
        return normalizer_A(self, t)


def normalizer_A(table: Union[NormalizerTable, GrowthTable], t: int) -> float:
    """A(t); a bare GrowthTable is turned into a NormalizerTable first (O(horizon))."""
    if isinstance(table, GrowthTable):
        table = NormalizerTable.build(table)
    if t < 1:
        raise DomainError(f"A(t) is defined for t >= 1, got {t}")
    if t > table.horizon:
        raise OutOfRangeError(f"A({t}) beyond horizon {table.horizon}")
    return math.exp(table.log_A[t])


def normalizer_log_bounds(table: NormalizerTable, t: int) -> Tuple[float, float]:
    """(1/2) S1 - (1/8) S2 <= ln A(t) <= (1/2) S1 over s = 1..t-1."""
    if not 1 <= t <= table.horizon:
        raise OutOfRangeError(f"t = {t} outside [1, {table.horizon}]")
    r = table.growth.ratio_array()[1:t]
    s1 = math.fsum(r.tolist())
    s2 = math.fsum((r * r).tolist())
    return 0.5 * s1 - 0.125 * s2, 0.5 * s1


def mu_expected_increment(d: float, f: float, F: float) -> float:
    """E(U_u(t+1) | d_u(t) = d) = d f / 2F."""
    if F <= 0:
        raise DomainError(f"F must be positive, got {F}")
    return d * f / (2 * F)


def conditional_variance(d: float, f: float, F: float) -> float:
    """V(U(t+1) | d(t) = d) = (d f / 2F)(1 - d / 2F); U is binomial(f, d/2F)."""
    if F <= 0:
        raise DomainError(f"F must be positive, got {F}")
    if d < 0:
        raise DomainError(f"degree must be nonnegative, got {d}")
    if d > 2 * F:
        raise InvariantViolation(f"degree {d} exceeds 2F = {2 * F}")
    p = d / (2 * F)
    return f * p * (1 - p)


def X_value(d: float, A: float) -> float:
    if A <= 0:
        raise DomainError(f"A must be positive, got {A}")
    return d / A


def _check_records(trajectory: Trajectory) -> None:
    expected = trajectory.final_time - trajectory.start_time
    if trajectory.degrees.shape[0] != expected or len(trajectory.times) != expected:
        raise DomainError(f"trajectory holds {trajectory.degrees.shape[0]} step records, expected {expected}")


def l2_accumulate(trajectory: Trajectory, table: NormalizerTable) -> Dict[int, np.ndarray]:
    """Running sum of V(U(t+1) | d(t)) / A(t+1)^2 along the realised path, per tracked node.

    Entry i of each series covers steps start..times[i].
    """
    _check_records(trajectory)
    if trajectory.final_time > table.horizon:
        raise OutOfRangeError("normaliser table shorter than trajectory")
    t = trajectory.times
    f = trajectory.f_t.astype(float)
    two_F = 2.0 * trajectory.F_t.astype(float)
    inv_A2 = np.exp(-2.0 * table.log_A[t + 1])
    out: Dict[int, np.ndarray] = {}
    for j, u in enumerate(trajectory.tracked_nodes):
        p = trajectory.degrees[:, j] / two_F
        if np.any(p > 1):
            raise InvariantViolation(f"node {u}: degree exceeds 2F")
        out[u] = np.cumsum(f * p * (1 - p) * inv_A2)
    return out


def _parse_alpha(alpha: Union[Fraction, str, int]) -> Fraction:
    a = Fraction(alpha)
    if not Fraction(1, 2) < a < 1:
        raise ConfigError(f"alpha must lie in (1/2, 1), got {alpha}")
    return a


def sh_check(U: int, t: int, alpha: Union[Fraction, str] = DEFAULT_ALPHA) -> bool:
    """True iff U < t^alpha (exactly: U^q < t^p for alpha = p/q)."""
    a = _parse_alpha(alpha)
    if U < 0 or t < 1:
        raise DomainError(f"need U >= 0 and t >= 1, got U={U}, t={t}")
    return U**a.denominator < t**a.numerator


def count_sh_violations(
    trajectory: Trajectory,
    alpha: Union[Fraction, str] = DEFAULT_ALPHA,
    window: Optional[Tuple[int, int]] = None,
) -> Dict[int, int]:
    """Steps t in ``window`` (inclusive) where a tracked node gains U(t+1) >= t^alpha."""
    a = _parse_alpha(alpha)
    lo, hi = window if window is not None else (trajectory.start_time, trajectory.final_time - 1)
    t = trajectory.times
    mask = (t >= max(lo, 1)) & (t <= hi)
    bound = t[mask].astype(float) ** float(a)
    out: Dict[int, int] = {}
    for j, u in enumerate(trajectory.tracked_nodes):
        U = trajectory.increments[mask, j]
        # float prefilter, exact check on the candidates
        cand = np.nonzero(U >= bound * (1 - 1e-9))[0]
        out[u] = sum(1 for i in cand if not sh_check(int(U[i]), int(t[mask][i]), a))
    return out


@dataclass
class TrackedNodeStats:
    node: int
    checkpoints: List[int]
    x_series: List[float]
    x_hat: float
    l2_sum: float
    l2_reference_time: int
    l2_at_reference: float
    sh_violations: int
    alpha: Fraction

    @property
    def l2_plateau_gap(self) -> float:
        """(L2(T) - L2(reference)) / L2(T); 0 when nothing accumulated."""
        return (self.l2_sum - self.l2_at_reference) / self.l2_sum if self.l2_sum > 0 else 0.0


def tracked_stats(
    trajectory: Trajectory,
    table: NormalizerTable,
    checkpoints: Sequence[int] = (),
    alpha: Union[Fraction, str] = DEFAULT_ALPHA,
    sh_window: Optional[Tuple[int, int]] = None,
    l2_reference_time: Optional[int] = None,
) -> List[TrackedNodeStats]:
    """Per tracked node: X at checkpoints, x_hat = X(T), L2 sums, sh violations."""
    a = _parse_alpha(alpha)
    start, final = trajectory.start_time, trajectory.final_time
    pts = sorted(c for c in checkpoints if start <= c <= final)
    ref = l2_reference_time if l2_reference_time is not None else max(start, final // 10)
    if not start <= ref <= final:
        raise DomainError(f"L2 reference time {ref} outside [{start}, {final}]")
    l2 = l2_accumulate(trajectory, table)
    sh = count_sh_violations(trajectory, a, sh_window)
    A_T = normalizer_A(table, final)
    stats = []
    for u in trajectory.tracked_nodes:
        d = trajectory.degree_series(u)
        series = l2[u]
        stats.append(
            TrackedNodeStats(
                node=u,
                checkpoints=pts,
                x_series=[X_value(float(d[c - start]), normalizer_A(table, c)) for c in pts],
                x_hat=X_value(float(d[-1]), A_T),
                l2_sum=float(series[-1]) if series.size else 0.0,
                l2_reference_time=ref,
                l2_at_reference=float(series[ref - start - 1]) if ref > start else 0.0,
                sh_violations=sh[u],
                alpha=a,
            )
        )
    return stats


class XLimitSummary(BaseModel):
    node: int
    samples: List[float]
    min: float
    quantiles: Dict[str, float] = Field(..., description="quantile level -> value")
    threshold: float
    fraction_below: float = Field(..., description="fraction of runs with x_hat < threshold")


def estimate_x_limits(
    trajectories: Sequence[Trajectory],
    table: NormalizerTable,
    threshold: float = 0.05,
) -> Dict[int, XLimitSummary]:
    """x_hat = X_u(T) per run, summarised across the ensemble."""
    if not trajectories:
        raise DomainError("no trajectories given")
    first = trajectories[0]
    key = (first.variant, tuple(first.tracked_nodes), first.start_time, first.final_time)
    for tr in trajectories[1:]:
        if (tr.variant, tuple(tr.tracked_nodes), tr.start_time, tr.final_time) != key:
            raise ConfigError("trajectories come from different configurations")
    A_T = normalizer_A(table, first.final_time)
    return {
        u: summarize_x(u, [X_value(float(tr.final_degrees[j]), A_T) for tr in trajectories], threshold)
        for j, u in enumerate(first.tracked_nodes)
    }


def summarize_x(node: int, samples: Sequence[float], threshold: float = 0.05) -> XLimitSummary:
    xs = np.asarray(samples, dtype=float)
    if not xs.size:
        raise DomainError("no samples to summarise")
    return XLimitSummary(
        node=node,
        samples=xs.tolist(),
        min=float(xs.min()),
        quantiles={str(q): float(np.quantile(xs, q)) for q in SUMMARY_QUANTILES},
        threshold=threshold,
        fraction_below=float(np.mean(xs < threshold)),
    )


def martingale_mean_check(x_final: Sequence[float], x_start: float, sigmas: float = 3.0) -> Tuple[bool, float, float]:
    """|mean X(T) - X(t0)| <= sigmas * s / sqrt(N); returns (ok, mean, bound)."""
    xs = np.asarray(x_final, dtype=float)
    if xs.size < 2:
        raise DomainError("need at least two continuations")
    mean = float(xs.mean())
    bound = sigmas * float(xs.std(ddof=1)) / math.sqrt(xs.size)
    return abs(mean - x_start) <= bound, mean, bound


def degree_growth(trajectory: Trajectory) -> Dict[int, int]:
    """d_u(T) - d_u(start) per tracked node."""
    return {
        u: int(trajectory.final_degrees[j]) - (int(trajectory.degrees[0, j]) if len(trajectory.times) else int(trajectory.final_degrees[j]))
        for j, u in enumerate(trajectory.tracked_nodes)
    }
