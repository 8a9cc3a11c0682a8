"""pa_multigraph.harness

Experiment orchestration: a JSON experiment plan, ensembles of independent
runs on a worker pool, witness-satisfaction curves and martingale summaries.

Runs are the unit of parallelism.  Whatever order the pool finishes them in,
results are folded by run index, so (plan, seed) fixes every output.
"""
from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, ValidationError, model_validator
from tqdm import tqdm

from .errors import ConfigError, DomainError, LoopError, ParseError, RunAbortedError, SeedInvalidError
from .growth import GrowthSpec, GrowthTable, Rational
from .martingale import (
    DEFAULT_ALPHA,
    NormalizerTable,
    TrackedNodeStats,
    XLimitSummary,
    martingale_mean_check,
    summarize_x,
    tracked_stats,
)
from .multigraph import Multigraph, StorageMode, WitnessRequest, read_multigraph
from .pa_engine import ProcessConfig, Trajectory, Variant, run
from .rado import AxiomReport, witness_coverage
from .utils import make_rng

__all__ = [
    "DEFAULT_CHECKPOINT_RATIO",
    "DEFAULT_WORKERS",
    "Analysis",
    "GeometricCheckpoints",
    "InlineSeed",
    "CoverageSettings",
    "ExperimentPlan",
    "RunRecord",
    "EnsembleResult",
    "geometric_checkpoints",
    "run_ensemble",
    "witness_satisfaction_curve",
    "martingale_report",
    "martingale_continuation_check",
]

logger = logging.getLogger(__name__)

DEFAULT_CHECKPOINT_RATIO = 1.3
DEFAULT_WORKERS = 4
COVERAGE_STREAM = 1


class Analysis(str, Enum):
    MARTINGALE = "martingale"
    L2 = "l2"
    SH = "sh"
    WITNESS_CURVE = "witness_curve"
    AXIOM_COVERAGE = "axiom_coverage"


class GeometricCheckpoints(BaseModel):
    kind: Literal["geometric"] = "geometric"
    base: Optional[int] = Field(None, ge=1, description="First checkpoint; defaults to the start time")
    ratio: float = Field(DEFAULT_CHECKPOINT_RATIO, gt=1)


class InlineSeed(BaseModel):
    """Seed graph written into the plan: ``[u, v]`` or ``[u, v, k]`` per entry."""

    nodes: Optional[int] = Field(None, ge=1, description="Node count; defaults to v'")
    edges: List[List[int]] = Field(default_factory=list)

    @model_validator(mode="after")
    def _shape(self):
        if any(len(e) not in (2, 3) for e in self.edges):
            raise ValueError("seed edges are [u, v] or [u, v, multiplicity]")
        return self

    def to_multigraph(self, v_prime: int) -> Multigraph:
        pairs: List[Tuple[int, int]] = []
        for e in self.edges:
            k = e[2] if len(e) == 3 else 1
            pairs.extend([(e[0], e[1])] * k)
        return Multigraph.new_seed(pairs, self.nodes or v_prime)


class CoverageSettings(BaseModel):
    n_max: int = Field(2, ge=1)
    m_max: int = Field(2, ge=0)
    samples: int = Field(50, ge=0)


def geometric_checkpoints(t0: int, ratio: float, horizon: int) -> List[int]:
    """Sorted distinct ceil(t0 * ratio^k) up to horizon, horizon included."""
    if t0 < 1 or ratio <= 1:
        raise DomainError(f"need t0 >= 1 and ratio > 1, got t0={t0}, ratio={ratio}")
    if t0 > horizon:
        raise DomainError(f"first checkpoint {t0} beyond horizon {horizon}")
    pts = set()
    k = 0
    while True:
        t = math.ceil(t0 * ratio**k)
        if t > horizon:
            break
        pts.add(t)
        k += 1
    pts.add(horizon)
    return sorted(pts)


class ExperimentPlan(BaseModel):
    """One ensemble: process settings, run count, checkpoints, witnesses, analyses."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    variant: Variant = Variant.MPA
    growth: GrowthSpec
    seed_graph: Union[str, InlineSeed] = Field(..., description="Path to a multigraph file, or inline edges")
    horizon: int = Field(..., ge=1)
    runs: int = Field(1, ge=1)
    start_time: Optional[int] = Field(None, ge=1)
    checkpoints: Union[GeometricCheckpoints, List[int]] = Field(default_factory=GeometricCheckpoints)
    witnesses: List[WitnessRequest] = Field(default_factory=list)
    analyses: List[Analysis] = Field(default_factory=lambda: [Analysis.MARTINGALE, Analysis.WITNESS_CURVE])
    tracked_nodes: List[int] = Field(default_factory=lambda: [1])
    alpha: Rational = DEFAULT_ALPHA
    seed: int = Field(0, ge=0, lt=2**64)
    x_threshold: float = Field(0.05, gt=0, description="theta_0 for the positive-limit proxy")
    l2_plateau_tolerance: float = Field(0.05, gt=0)
    sh_window: Optional[Tuple[int, int]] = None
    storage_mode: StorageMode = StorageMode.FULL
    coverage: CoverageSettings = Field(default_factory=CoverageSettings)
    output_dir: Optional[str] = None

    _base_dir: Path = PrivateAttr(default_factory=Path)

    @model_validator(mode="after")
    def _consistent(self):
        if not Fraction(1, 2) < self.alpha < 1:
            raise ValueError(f"alpha must lie in (1/2, 1), got {self.alpha}")
        if isinstance(self.checkpoints, list):
            if self.checkpoints != sorted(set(self.checkpoints)):
                raise ValueError("checkpoints must be sorted and distinct")
            if any(not self.start <= c <= self.horizon for c in self.checkpoints):
                raise ValueError(f"checkpoints must lie in [{self.start}, {self.horizon}]")
        needs_full = {Analysis.WITNESS_CURVE, Analysis.AXIOM_COVERAGE} & set(self.analyses)
        if needs_full and self.storage_mode is not StorageMode.FULL:
            raise ValueError(f"{sorted(a.value for a in needs_full)} need FULL storage mode")
        return self

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "ExperimentPlan":
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: invalid JSON: {e}") from e
        plan = cls.from_dict(data)
        plan._base_dir = path.parent
        return plan

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentPlan":
        try:
            return cls.model_validate(data)
        except ValidationError as e:
            raise ConfigError(str(e)) from e

    def with_seed(self, seed: int) -> "ExperimentPlan":
        plan = self.model_copy(update={"seed": seed})
        plan._base_dir = self._base_dir
        return plan

    @property
    def start(self) -> int:
        return self.start_time if self.start_time is not None else self.growth.v_prime

    def checkpoint_times(self) -> List[int]:
        if isinstance(self.checkpoints, list):
            return list(self.checkpoints) or [self.horizon]
        base = self.checkpoints.base or self.start
        return geometric_checkpoints(max(base, self.start), self.checkpoints.ratio, self.horizon)

    def resolve_seed_graph(self) -> Multigraph:
        """The seed graph named by the plan; any problem with it is a config error."""
        try:
            if isinstance(self.seed_graph, InlineSeed):
                return self.seed_graph.to_multigraph(self.start)
            path = Path(self.seed_graph)
            return read_multigraph(path if path.is_absolute() else self._base_dir / path)
        except (SeedInvalidError, LoopError, ParseError, OSError) as e:
            raise ConfigError(f"seed graph: {e}") from e

    def process_config(self, run_index: int = 0, seed_graph: Optional[Multigraph] = None) -> ProcessConfig:
        try:
            return ProcessConfig(
                variant=self.variant,
                growth=self.growth,
                seed_graph=seed_graph if seed_graph is not None else self.resolve_seed_graph(),
                horizon=self.horizon,
                rng_seed=self.seed,
                run_index=run_index,
                tracked_nodes=self.tracked_nodes,
                storage_mode=self.storage_mode,
                start_time=self.start_time,
                checkpoints=self.checkpoint_times(),
            )
        except ValidationError as e:
            raise ConfigError(str(e)) from e

    def echo(self) -> dict:
        return self.model_dump(mode="json")


# ---- RUNS ----------------------------------------------------------------
@dataclass
class RunRecord:
    run_index: int
    satisfied_at: List[Optional[int]] = field(default_factory=list)
    stats: List[TrackedNodeStats] = field(default_factory=list)
    coverage: Optional[AxiomReport] = None
    trajectory: Optional[Trajectory] = field(default=None, repr=False)


class _WitnessLatch:
    """Observer recording the first observed time each request is satisfied."""

    def __init__(self, requests: List[WitnessRequest]) -> None:
        self.requests = requests
        self.satisfied_at: List[Optional[int]] = [None] * len(requests)

    def __call__(self, t: int, graph: Multigraph) -> None:
        for i, request in enumerate(self.requests):
            if self.satisfied_at[i] is not None:
                continue
            # requests naming nodes not yet born count as unsatisfied
            if max(request.nodes) > graph.n:
                continue
            if graph.witness_satisfied(request) is not None:
                self.satisfied_at[i] = t


def _execute_run(plan: ExperimentPlan, seed_graph: Multigraph, run_index: int, keep_trajectory: bool) -> RunRecord:
    config = plan.process_config(run_index, seed_graph)
    table = GrowthTable.build(plan.growth, plan.horizon)
    analyses = set(plan.analyses)
    latch = _WitnessLatch(plan.witnesses) if Analysis.WITNESS_CURVE in analyses and plan.witnesses else None
    keep_graph = Analysis.AXIOM_COVERAGE in analyses
    trajectory = run(config, table=table, observer=latch, keep_graph=keep_graph)

    record = RunRecord(run_index=run_index, satisfied_at=latch.satisfied_at if latch else [])
    if analyses & {Analysis.MARTINGALE, Analysis.L2, Analysis.SH} and trajectory.tracked_nodes:
        record.stats = tracked_stats(
            trajectory,
            NormalizerTable.build(table),
            checkpoints=config.checkpoints,
            alpha=plan.alpha,
            sh_window=plan.sh_window,
        )
    if keep_graph:
        cov = plan.coverage
        record.coverage = witness_coverage(
            trajectory.graph,
            min(cov.n_max, trajectory.graph.n),
            cov.m_max,
            cov.samples,
            make_rng(plan.seed, run_index, stream=COVERAGE_STREAM),
        )
        trajectory.graph = None
    if keep_trajectory:
        record.trajectory = trajectory
    return record


@dataclass
class EnsembleResult:
    """Per-checkpoint aggregates folded in run-index order."""

    plan: ExperimentPlan
    checkpoints: List[int]
    records: List[RunRecord] = field(repr=False)
    A_values: List[float]
    F_values: List[int]
    satisfied_counts: Dict[str, List[int]] = field(default_factory=dict)

    @property
    def runs(self) -> int:
        return len(self.records)

    @property
    def request_labels(self) -> List[str]:
        return [w.label for w in self.plan.witnesses]

    def x_samples(self, node: int) -> np.ndarray:
        """runs x checkpoints array of X_u at each checkpoint."""
        rows = []
        for rec in self.records:
            st = next((s for s in rec.stats if s.node == node), None)
            if st is None:
                raise DomainError(f"node {node} was not tracked")
            rows.append(st.x_series)
        return np.asarray(rows, dtype=float)

    def x_limits(self) -> Dict[int, XLimitSummary]:
        nodes = [s.node for s in self.records[0].stats] if self.records else []
        return {
            u: summarize_x(u, [next(s.x_hat for s in r.stats if s.node == u) for r in self.records], self.plan.x_threshold)
            for u in nodes
        }

    def sh_totals(self) -> Dict[int, int]:
        totals: Dict[int, int] = {}
        for rec in self.records:
            for s in rec.stats:
                totals[s.node] = totals.get(s.node, 0) + s.sh_violations
        return totals

    def l2_plateau_fraction(self) -> Dict[int, float]:
        """Fraction of runs whose L2 series grew by at most the tolerance after T/10."""
        tol = self.plan.l2_plateau_tolerance
        out: Dict[int, List[bool]] = {}
        for rec in self.records:
            for s in rec.stats:
                out.setdefault(s.node, []).append(s.l2_plateau_gap <= tol)
        return {u: float(np.mean(v)) for u, v in out.items()}

    def summary(self) -> dict:
        analyses = set(self.plan.analyses)
        data: dict = {
            "runs": self.runs,
            "seed": self.plan.seed,
            "checkpoints": self.checkpoints,
            "A": self.A_values,
            "F": self.F_values,
        }
        if self.satisfied_counts:
            data["witness_curves"] = {
                label: [float(Fraction(c, self.runs)) for c in counts] for label, counts in self.satisfied_counts.items()
            }
        if Analysis.MARTINGALE in analyses and any(r.stats for r in self.records):
            data["x_limits"] = {str(u): s.model_dump() for u, s in self.x_limits().items()}
        if Analysis.L2 in analyses and any(r.stats for r in self.records):
            data["l2_plateau_fraction"] = {str(u): v for u, v in self.l2_plateau_fraction().items()}
        if Analysis.SH in analyses and any(r.stats for r in self.records):
            data["sh_violations"] = {str(u): v for u, v in self.sh_totals().items()}
        if Analysis.AXIOM_COVERAGE in analyses:
            data["axiom_coverage"] = [r.coverage.model_dump(mode="json") for r in self.records if r.coverage]
        return data


def _fold(plan: ExperimentPlan, records: List[RunRecord]) -> EnsembleResult:
    pts = plan.checkpoint_times()
    table = GrowthTable.build(plan.growth, plan.horizon)
    norm = NormalizerTable.build(table)
    counts: Dict[str, List[int]] = {}
    if Analysis.WITNESS_CURVE in plan.analyses:
        for i, w in enumerate(plan.witnesses):
            counts[w.label] = [
                sum(1 for r in records if r.satisfied_at[i] is not None and r.satisfied_at[i] <= t) for t in pts
            ]
    return EnsembleResult(
        plan=plan,
        checkpoints=pts,
        records=records,
        A_values=[norm.A(t) for t in pts],
        F_values=[int(table.F(t)) for t in pts],
        satisfied_counts=counts,
    )


def run_ensemble(
    plan: ExperimentPlan,
    workers: int = DEFAULT_WORKERS,
    progress: bool = False,
    keep_trajectories: bool = False,
) -> EnsembleResult:
    """N independent runs; run i uses stream i of the master seed."""
    seed_graph = plan.resolve_seed_graph()
    # fail fast on an inconsistent plan before any worker starts
    plan.process_config(0, seed_graph)
    n = plan.runs
    logger.info("ensemble: %d %s runs to T=%d (seed %d, %d workers)", n, plan.variant.value, plan.horizon, plan.seed, workers)

    records: Dict[int, RunRecord] = {}
    pbar = tqdm(total=n, desc="runs", disable=not progress)
    try:
        if workers <= 1 or n == 1:
            for i in range(n):
                try:
                    records[i] = _execute_run(plan, seed_graph, i, keep_trajectories)
                except Exception as e:
                    raise RunAbortedError(i, e) from e
                pbar.update(1)
        else:
            with ProcessPoolExecutor(max_workers=min(workers, n)) as pool:
                futures = {pool.submit(_execute_run, plan, seed_graph, i, keep_trajectories): i for i in range(n)}
                for future in as_completed(futures):
                    i = futures[future]
                    try:
                        records[i] = future.result()
                    except Exception as e:
                        for f in futures:
                            f.cancel()
                        raise RunAbortedError(i, e) from e
                    pbar.update(1)
    finally:
        pbar.close()

    result = _fold(plan, [records[i] for i in range(n)])
    logger.info("ensemble finished: %d runs", n)
    return result


def witness_satisfaction_curve(result: EnsembleResult, request: Union[WitnessRequest, str]) -> List[Tuple[int, Fraction]]:
    """(t, fraction of runs with W[t]) per checkpoint; nondecreasing in t."""
    label = request.label if isinstance(request, WitnessRequest) else request
    if label not in result.satisfied_counts:
        raise DomainError(f"unknown witness request {label!r}")
    return [(t, Fraction(c, result.runs)) for t, c in zip(result.checkpoints, result.satisfied_counts[label])]


def martingale_report(result: EnsembleResult) -> List[dict]:
    """Rows of t, A(t), F(t), A/sqrt(F) and per-node mean/std of X_u(t) across runs."""
    nodes = [s.node for s in result.records[0].stats] if result.records else []
    samples = {u: result.x_samples(u) for u in nodes}
    rows = []
    for j, t in enumerate(result.checkpoints):
        A, F = result.A_values[j], result.F_values[j]
        row = {"t": t, "A": A, "F": F, "A_over_sqrt_F": A / math.sqrt(F) if F > 0 else float("nan")}
        for u in nodes:
            col = samples[u][:, j] if samples[u].size else np.zeros(0)
            row[f"x_mean_{u}"] = float(col.mean()) if col.size else float("nan")
            row[f"x_std_{u}"] = float(col.std(ddof=1)) if col.size > 1 else 0.0
        rows.append(row)
    return rows


def martingale_continuation_check(result: EnsembleResult, sigmas: float = 3.0) -> Dict[int, dict]:
    """Mean of X_u(T) over runs against X_u(t0) of the shared start graph G(t0)."""
    plan = result.plan
    seed_graph = plan.resolve_seed_graph()
    table = GrowthTable.build(plan.growth, plan.horizon)
    A0 = NormalizerTable.build(table).A(plan.start)
    out: Dict[int, dict] = {}
    for u, summary in result.x_limits().items():
        x_start = seed_graph.degree(u) / A0
        ok, mean, bound = martingale_mean_check(summary.samples, x_start, sigmas)
        out[u] = {"x_start": x_start, "mean": mean, "bound": bound, "ok": ok}
    return out
