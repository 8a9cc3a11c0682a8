"""pa_multigraph.pa_engine

The MPA_f / GPA_f preferential-attachment processes: at each stage t >= v'
node t+1 arrives with f(t) edges whose end-points are drawn from G(t) with
probability proportional to degree, with replacement (MPA) or without (GPA).
Degrees are frozen at G(t) for the whole batch.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.special import gammaln

from .errors import DomainError, InfeasibleError, InvariantViolation, SeedInvalidError
from .growth import GrowthSpec, GrowthTable
from .multigraph import Multigraph, StorageMode
from .sampler import DegreeSampler
from .utils import make_rng

__all__ = [
    "Variant",
    "ProcessConfig",
    "ProcessState",
    "StepOutcome",
    "Trajectory",
    "Observer",
    "sample_endpoints_with_replacement",
    "sample_endpoints_without_replacement",
    "init_state",
    "step",
    "run",
    "step_distribution_exact",
    "EXACT_ARITHMETIC_MAX_F",
]

logger = logging.getLogger(__name__)

EXACT_ARITHMETIC_MAX_F = 64

Observer = Callable[[int, Multigraph], None]


class Variant(str, Enum):
    MPA = "MPA"
    GPA = "GPA"


class ProcessConfig(BaseModel):
    """One run of MPA_f or GPA_f."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    variant: Variant = Field(Variant.MPA, description="MPA: with replacement; GPA: without")
    growth: GrowthSpec
    seed_graph: Multigraph = Field(..., description="G' (or G(start_time) when continuing a run)")
    horizon: int = Field(..., ge=1, description="Final time T; the run ends with G(T)")
    rng_seed: int = Field(0, ge=0, lt=2**64)
    run_index: int = Field(0, ge=0, description="Stream index split off rng_seed")
    tracked_nodes: List[int] = Field(default_factory=list)
    storage_mode: StorageMode = StorageMode.FULL
    start_time: Optional[int] = Field(None, ge=1, description="Continue from G(start_time) instead of G'")
    checkpoints: List[int] = Field(default_factory=list, description="Times at which the observer is called")

    @model_validator(mode="after")
    def _consistent(self):
        v_prime = self.growth.v_prime
        t0 = self.start_time if self.start_time is not None else v_prime
        if t0 < v_prime:
            raise ValueError(f"start_time {t0} precedes v' = {v_prime}")
        if self.horizon < t0:
            raise ValueError(f"horizon {self.horizon} precedes start time {t0}")
        table = GrowthTable.build(self.growth, self.horizon)
        expected_edges = table.F(t0)
        if self.seed_graph.n != t0:
            raise SeedInvalidError(f"seed graph has {self.seed_graph.n} nodes, expected {t0}")
        if self.seed_graph.total_edges != expected_edges:
            raise SeedInvalidError(
                f"seed graph has {self.seed_graph.total_edges} edges, expected F({t0}) = {expected_edges}"
            )
        if self.storage_mode is StorageMode.FULL and self.seed_graph.storage_mode is not StorageMode.FULL:
            raise ValueError("FULL storage needs a FULL seed graph")
        if len(set(self.tracked_nodes)) != len(self.tracked_nodes):
            raise ValueError("tracked nodes must be distinct")
        if any(not 1 <= u <= t0 for u in self.tracked_nodes):
            raise ValueError(f"tracked nodes must exist at the start time (1..{t0})")
        if any(not t0 <= c <= self.horizon for c in self.checkpoints):
            raise ValueError(f"checkpoints must lie in [{t0}, {self.horizon}]")
        if self.variant is Variant.GPA:
            for t in range(t0, self.horizon):
                if table.f(t) > t:
                    raise ValueError(f"GPA needs f(t) <= t; f({t}) = {table.f(t)}")
        return self

    @property
    def start(self) -> int:
        return self.start_time if self.start_time is not None else self.growth.v_prime

    def growth_table(self) -> GrowthTable:
        return GrowthTable.build(self.growth, self.horizon)


# ---- SAMPLING ------------------------------------------------------------
def sample_endpoints_with_replacement(sampler: DegreeSampler, k: int, rng: np.random.Generator) -> np.ndarray:
    """k i.i.d. end-points, node u with probability d_u(t)/2F(t)."""
    return sampler.sample_with_replacement(k, rng)


def sample_endpoints_without_replacement(
    sampler: DegreeSampler,
    k: int,
    rng: np.random.Generator,
    n_nodes: int,
    degrees: Optional[np.ndarray] = None,
) -> np.ndarray:
    """k distinct end-points among nodes 1..n_nodes, successive degree-weighted law."""
    return sampler.sample_without_replacement(k, n_nodes, rng, weights=degrees)


# ---- PROCESS -------------------------------------------------------------
@dataclass
class StepOutcome:
    t: int
    new_node: int
    f_t: int
    endpoints: np.ndarray
    counts: np.ndarray
    tracked_increments: np.ndarray


@dataclass
class ProcessState:
    t: int
    graph: Multigraph
    sampler: DegreeSampler
    table: GrowthTable
    variant: Variant
    rng: np.random.Generator
    tracked: np.ndarray


def init_state(config: ProcessConfig, table: Optional[GrowthTable] = None) -> ProcessState:
    table = table if table is not None else config.growth_table()
    graph = config.seed_graph.copy(storage_mode=config.storage_mode)
    sampler = DegreeSampler.from_degrees(graph.degrees, max_index=max(config.horizon, graph.n))
    return ProcessState(
        t=config.start,
        graph=graph,
        sampler=sampler,
        table=table,
        variant=config.variant,
        rng=make_rng(config.rng_seed, config.run_index),
        tracked=np.asarray(config.tracked_nodes, dtype=np.int64),
    )


def step(state: ProcessState) -> StepOutcome:
    """Advance G(t) -> G(t+1)."""
    t = state.t
    k = state.table.f(t)
    if state.variant is Variant.MPA:
        draws = sample_endpoints_with_replacement(state.sampler, k, state.rng)
        nodes, counts = np.unique(draws, return_counts=True)
    else:
        if k > t:
            raise InfeasibleError(f"GPA needs f(t) <= t, f({t}) = {k}", step=t)
        draws = sample_endpoints_without_replacement(state.sampler, k, state.rng, t, state.graph.degrees)
        nodes = np.sort(draws)
        counts = np.ones_like(nodes)
    counts = counts.astype(np.int64)

    new = state.graph.add_node_with_counts(nodes, counts)
    if new != t + 1:
        raise InvariantViolation(f"new node is {new}, expected {t + 1}")
    state.sampler.increment_many(nodes, counts)
    state.sampler.increment(new, k)
    state.t = t + 1

    F_next = state.table.F(t + 1)
    if state.sampler.total != 2 * F_next or state.graph.total_edges != F_next:
        raise InvariantViolation(
            f"after step {t}: degree total {state.sampler.total}, edges {state.graph.total_edges}, F = {F_next}"
        )

    increments = np.zeros(state.tracked.size, dtype=np.int64)
    if state.tracked.size and nodes.size:
        pos = np.searchsorted(nodes, state.tracked)
        pos = np.minimum(pos, nodes.size - 1)
        hit = nodes[pos] == state.tracked
        increments[hit] = counts[pos[hit]]
    return StepOutcome(t=t, new_node=new, f_t=k, endpoints=nodes, counts=counts, tracked_increments=increments)


@dataclass
class Trajectory:
    """Per-step records d_u(t), U_u(t+1) for tracked nodes plus f(t), F(t)."""

    variant: Variant
    tracked_nodes: List[int]
    start_time: int
    final_time: int
    times: np.ndarray
    f_t: np.ndarray
    F_t: np.ndarray
    degrees: np.ndarray = field(repr=False)
    increments: np.ndarray = field(repr=False)
    final_degrees: np.ndarray = field(repr=False)
    graph: Optional[Multigraph] = field(default=None, repr=False)
    rng_seed: int = 0
    run_index: int = 0

    def degree_series(self, u: int) -> np.ndarray:
        """d_u(t) for t = start..final (inclusive)."""
        j = self.tracked_nodes.index(u)
        return np.append(self.degrees[:, j], self.final_degrees[j])

    def consistent(self) -> bool:
        """d_u(t+1) = d_u(t) + U_u(t+1) along the whole record."""
        if not len(self.times):
            return True
        nxt = np.vstack([self.degrees[1:], self.final_degrees[None, :]])
        return bool(np.array_equal(self.degrees + self.increments, nxt))


def run(
    config: ProcessConfig,
    table: Optional[GrowthTable] = None,
    observer: Optional[Observer] = None,
    keep_graph: bool = True,
) -> Trajectory:
    """Execute stages start..T-1; deterministic given (rng_seed, run_index, config)."""
    state = init_state(config, table)
    checkpoints = set(config.checkpoints)
    steps = config.horizon - state.t
    n_tracked = state.tracked.size
    times = np.arange(state.t, config.horizon, dtype=np.int64)
    degrees = np.zeros((steps, n_tracked), dtype=np.int64)
    increments = np.zeros((steps, n_tracked), dtype=np.int64)

    logger.debug("run %d: %s from t=%d to T=%d", config.run_index, config.variant.value, state.t, config.horizon)
    if observer is not None:
        observer(state.t, state.graph)
    for i in range(steps):
        if n_tracked:
            degrees[i] = state.graph.degrees_of(state.tracked)
        outcome = step(state)
        increments[i] = outcome.tracked_increments
        if observer is not None and state.t in checkpoints:
            observer(state.t, state.graph)

    tab = state.table
    return Trajectory(
        variant=config.variant,
        tracked_nodes=list(config.tracked_nodes),
        start_time=config.start,
        final_time=config.horizon,
        times=times,
        f_t=np.array([tab.f(int(t)) for t in times], dtype=object if tab.f_values.dtype == object else np.int64),
        F_t=np.array([tab.F(int(t)) for t in times], dtype=object if tab.F_prefix.dtype == object else np.int64),
        degrees=degrees,
        increments=increments,
        final_degrees=state.graph.degrees_of(state.tracked),
        graph=state.graph if keep_graph else None,
        rng_seed=config.rng_seed,
        run_index=config.run_index,
    )


# ---- EXACT STEP LAW ------------------------------------------------------
def step_distribution_exact(degrees: Sequence[int], f: int, F: int, m: Sequence[int]) -> float:
    """P(U = m): tracked nodes with degrees d_i gain exactly m_i edges this MPA stage.

    Multinomial M(f; p_1..p_n, q) with p_i = d_i/2F and q = 1 - sum p_i.
    Exact rational arithmetic for f <= 64, log-gamma beyond.
    """
    if len(degrees) != len(m):
        raise DomainError("degrees and m must have equal length")
    if F <= 0 or f < 0:
        raise DomainError(f"need F > 0 and f >= 0, got f={f}, F={F}")
    if any(d < 0 for d in degrees) or any(x < 0 for x in m):
        raise DomainError("degrees and m must be nonnegative")
    two_F = 2 * F
    if sum(degrees) > two_F:
        raise InvariantViolation(f"tracked degrees sum to {sum(degrees)} > 2F = {two_F}")
    total_m = sum(m)
    if total_m > f:
        return 0.0
    rest = f - total_m

    if f <= EXACT_ARITHMETIC_MAX_F:
        coef = math.factorial(f) // (math.prod(math.factorial(x) for x in m) * math.factorial(rest))
        p = [Fraction(d, two_F) for d in degrees]
        q = 1 - sum(p, Fraction(0))
        value = Fraction(coef) * q**rest * math.prod((pi**mi for pi, mi in zip(p, m)), start=Fraction(1))
        return float(value)

    log_p = gammaln(f + 1) - gammaln(rest + 1) - sum(gammaln(x + 1) for x in m)
    for d, x in zip(degrees, m):
        if x:
            if d == 0:
                return 0.0
            log_p += x * math.log(d / two_F)
    if rest:
        q = 1 - sum(degrees) / two_F
        if q <= 0:
            return 0.0
        log_p += rest * math.log(q)
    return float(math.exp(log_p))
