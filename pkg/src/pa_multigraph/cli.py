"""CLI entry point for the pa_multigraph package.

Exit codes: 0 success, 1 configuration or usage error, 2 runtime error.
"""
from __future__ import annotations

import json
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import click
from dotenv import load_dotenv
from pydantic import TypeAdapter, ValidationError

from .errors import ConfigError, PAMultigraphError
from .export import TRAJECTORY_FILE, write_ensemble, write_json, write_meta, write_trajectory_csv
from .growth import (
    ConstantGrowth,
    GrowthSpec,
    GrowthTable,
    LinearFloorGrowth,
    PowerFloorGrowth,
    PowerOfTwoSpikeGrowth,
    assumption_report,
)
from .harness import (
    DEFAULT_WORKERS,
    Analysis,
    ExperimentPlan,
    martingale_continuation_check,
    martingale_report,
    run_ensemble,
)
from .multigraph import read_multigraph, write_multigraph
from .pa_engine import run
from .rado import ERConfig, back_and_forth_extend, check_basic_axioms, er_generate, witness_coverage
from .utils import make_rng, setup_logger

logger = logging.getLogger(__name__)

PROFILES = ["constant", "linear", "power", "spike"]


def _profile_spec(profile: str, c: str, per_stage: int, alpha: str):
    """Named profiles share the single-edge seed on two nodes (e' = 1, v' = 2)."""
    seed = {"e_prime": 1, "v_prime": 2}
    if profile == "linear":
        return LinearFloorGrowth(c=c, **seed)
    if profile == "constant":
        return ConstantGrowth(C=per_stage, **seed)
    if profile == "power":
        return PowerFloorGrowth(c=c, alpha=alpha, **seed)
    return PowerOfTwoSpikeGrowth(**seed)


def _load_plan(config: str, seed: Optional[int]) -> ExperimentPlan:
    plan = ExperimentPlan.from_file(config)
    return plan.with_seed(seed) if seed is not None else plan


def _config_option(f):
    return click.option("--config", "config", required=True, type=click.Path(exists=True, dir_okay=False), help="Experiment plan (JSON).")(f)


def _seed_option(f):
    return click.option("--seed", type=int, default=None, help="Override the master seed.")(f)


@click.group()
@click.option("--log-level", envvar="PA_MULTIGRAPH_LOG_LEVEL", default="INFO", show_default=True)
def cli(log_level: str) -> None:
    """Preferential-attachment multigraph simulation and verification."""
    setup_logger(level=log_level)


@cli.command("simulate")
@_config_option
@click.option("--out", required=True, type=click.Path(file_okay=False), help="Output directory.")
@_seed_option
@click.option("--run-index", default=0, show_default=True, help="Stream index of the run.")
@click.option("--save-graph", is_flag=True, help="Also write the final graph as graph.mg.")
def simulate_cmd(config: str, out: str, seed: Optional[int], run_index: int, save_graph: bool) -> None:
    """Run one process and write trajectory.csv and meta.json."""
    plan = _load_plan(config, seed)
    trajectory = run(plan.process_config(run_index), keep_graph=save_graph)
    write_trajectory_csv(trajectory, Path(out) / TRAJECTORY_FILE)
    if save_graph:
        write_multigraph(trajectory.graph, Path(out) / "graph.mg")
    write_meta(out, plan.echo(), plan.seed, run_index=run_index)


@cli.command("ensemble")
@_config_option
@click.option("--out", required=True, type=click.Path(file_okay=False), help="Output directory.")
@_seed_option
@click.option("--workers", envvar="PA_MULTIGRAPH_WORKERS", default=DEFAULT_WORKERS, show_default=True, type=int)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
@click.option("--quiet", is_flag=True, help="No progress bar.")
def ensemble_cmd(config: str, out: str, seed: Optional[int], workers: int, fmt: str, quiet: bool) -> None:
    """Run N independent processes; write result.json, curves and martingale tables."""
    plan = _load_plan(config, seed)
    result = run_ensemble(plan, workers=workers, progress=not quiet)
    write_ensemble(result, out, fmt)
    write_meta(out, plan.echo(), plan.seed, runs=result.runs)


@cli.command("martingale")
@_config_option
@click.option("--out", required=True, type=click.Path(file_okay=False), help="Output directory.")
@_seed_option
@click.option("--workers", envvar="PA_MULTIGRAPH_WORKERS", default=DEFAULT_WORKERS, show_default=True, type=int)
@click.option("--quiet", is_flag=True, help="No progress bar.")
def martingale_cmd(config: str, out: str, seed: Optional[int], workers: int, quiet: bool) -> None:
    """Ensemble with the martingale, L2 and sh analyses; writes martingale.csv."""
    plan = _load_plan(config, seed)
    plan = plan.model_copy(update={"analyses": [Analysis.MARTINGALE, Analysis.L2, Analysis.SH]})
    result = run_ensemble(plan, workers=workers, progress=not quiet)
    write_ensemble(result, out, "csv")
    write_json(martingale_report(result), Path(out) / "martingale.json")
    if plan.start_time is not None and result.runs > 1:
        check = martingale_continuation_check(result)
        write_json({str(u): v for u, v in check.items()}, Path(out) / "mean_check.json")
    write_meta(out, plan.echo(), plan.seed, runs=result.runs)


@cli.command("axioms")
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--n-max", default=2, show_default=True, help="Largest witness request size.")
@click.option("--m-max", default=2, show_default=True, help="Largest requested multiplicity.")
@click.option("--samples", default=0, show_default=True, help="Witness requests to sample (0 skips coverage).")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write the report here instead of stdout.")
def axioms_cmd(graph_path: str, n_max: int, m_max: int, samples: int, seed: int, out: Optional[str]) -> None:
    """Structural axiom checks and witness coverage for a multigraph file."""
    g = read_multigraph(graph_path)
    if samples:
        report = witness_coverage(g, n_max, m_max, samples, make_rng(seed))
    else:
        report = check_basic_axioms(g)
    _emit(json.loads(report.to_json()), out)


@cli.command("ergen")
@click.option("--nodes", required=True, type=int)
@click.option("--p", "p", required=True, multiple=True, help="p, or repeat for p_0, p_1, ... (last repeats).")
@click.option("--cap", default=None, type=int, help="Multiplicity cap.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def ergen_cmd(nodes: int, p: Sequence[str], cap: Optional[int], seed: int, out: str) -> None:
    """Sample an Erdős–Rényi style multigraph and write it in the text format."""
    fields = {"node_count": nodes, "p_sequence": p[0] if len(p) == 1 else list(p)}
    if cap is not None:
        fields["multiplicity_cap"] = cap
    try:
        config = ERConfig(**fields)
    except ValidationError as e:
        raise ConfigError(str(e)) from e
    write_multigraph(er_generate(config, make_rng(seed)), out)
    logger.info("wrote %s", out)


@cli.command("backforth")
@click.option("--g1", "g1_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--g2", "g2_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--steps", default=6, show_default=True)
@click.option("--tie-break", type=click.Choice(["smallest", "random"]), default="smallest", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def backforth_cmd(g1_path: str, g2_path: str, steps: int, tie_break: str, seed: int, out: Optional[str]) -> None:
    """Extend the empty map between two multigraphs by back-and-forth."""
    g1, g2 = read_multigraph(g1_path), read_multigraph(g2_path)
    result = back_and_forth_extend(g1, g2, steps=steps, rng=make_rng(seed), tie_break=tie_break)
    data = json.loads(result.to_json())
    data["status"] = "failed" if "step" in data else "extended"
    _emit(data, out)


@cli.command("assumptions")
@click.option("--profile", type=click.Choice(PROFILES), default=None)
@click.option("--growth", "growth_path", type=click.Path(exists=True, dir_okay=False), default=None, help="Growth spec (JSON).")
@click.option("--horizon", required=True, type=int)
@click.option("--c", "c", default="1", show_default=True, help="Rational coefficient (linear, power).")
@click.option("--per-stage", default=2, show_default=True, help="Edges per stage (constant).")
@click.option("--alpha", default="1/2", show_default=True, help="Rational exponent (power).")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Also write the report as JSON.")
def assumptions_cmd(
    profile: Optional[str], growth_path: Optional[str], horizon: int, c: str, per_stage: int, alpha: str, out: Optional[str]
) -> None:
    """Print S1/S2 partial sums and doubling increments for a growth function."""
    if (profile is None) == (growth_path is None):
        raise click.UsageError("give exactly one of --profile or --growth")
    try:
        if growth_path is not None:
            spec = TypeAdapter(GrowthSpec).validate_python(json.loads(Path(growth_path).read_text()))
        else:
            spec = _profile_spec(profile, c, per_stage, alpha)
    except (ValidationError, json.JSONDecodeError) as e:
        raise ConfigError(str(e)) from e
    report = assumption_report(GrowthTable.build(spec, horizon))
    click.echo(f"{'T':>10} {'S1':>14} {'S2':>14}")
    for T, s1, s2 in zip(report.checkpoints, report.s1_partial, report.s2_partial):
        click.echo(f"{T:>10} {s1:>14.6f} {s2:>14.6f}")
    click.echo(f"\n{'T':>10} {'S1(2T)-S1(T)':>14} {'S2(2T)-S2(T)':>14}")
    for T, d1, d2 in zip(report.doubling_points, report.s1_doubling_increments, report.s2_doubling_increments):
        click.echo(f"{T:>10} {d1:>14.6f} {d2:>14.6f}")
    click.echo(f"\nhint: {report.verdict_hint[0].value}, {report.verdict_hint[1].value}")
    if out:
        write_json(report.model_dump(mode="json"), out)


def _emit(data: dict, out: Optional[str]) -> None:
    if out:
        write_json(data, out)
    else:
        click.echo(json.dumps(data, indent=2, sort_keys=True))


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    try:
        cli.main(args=argv, prog_name="pa-multigraph", standalone_mode=False)
    except click.ClickException as e:
        e.show()
        return 1
    except click.Abort:
        click.echo("Aborted.", err=True)
        return 1
    except (ConfigError, ValidationError) as e:
        click.echo(f"config error: {e}", err=True)
        return 1
    except (PAMultigraphError, OSError) as e:
        click.echo(f"error: {e}", err=True)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
