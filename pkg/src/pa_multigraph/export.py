"""pa_multigraph.export

CSV and JSON writers for trajectories, ensembles and reports.  Everything
except ``meta.json`` is a pure function of its inputs; the timestamp lives
in the metadata file only.
"""
from __future__ import annotations

import csv
import json
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Sequence, Union

from .harness import EnsembleResult, martingale_report
from .pa_engine import Trajectory
from .utils import GENERATOR_NAME

__all__ = [
    "TRAJECTORY_FILE",
    "META_FILE",
    "RESULT_FILE",
    "CURVES_FILE",
    "MARTINGALE_FILE",
    "CURVE_FIELDS",
    "write_json",
    "write_csv",
    "write_trajectory_csv",
    "write_meta",
    "write_ensemble",
]

logger = logging.getLogger(__name__)

TRAJECTORY_FILE = "trajectory.csv"
META_FILE = "meta.json"
RESULT_FILE = "result.json"
CURVES_FILE = "curves.csv"
MARTINGALE_FILE = "martingale.csv"

CURVE_FIELDS = ["t", "request_id", "fraction"]

PathLike = Union[str, Path]


def write_json(data: Any, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, sort_keys=True)
        f.write("\n")
    logger.info("wrote %s", path)
    return path


def write_csv(rows: Sequence[Dict[str, Any]], fieldnames: List[str], path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=fieldnames)
        writer.writeheader()
        writer.writerows(rows)
    logger.info("wrote %s (%d rows)", path, len(rows))
    return path


def trajectory_fields(trajectory: Trajectory) -> List[str]:
    fields = ["t", "f_t", "F_t"]
    for u in trajectory.tracked_nodes:
        fields += [f"d_{u}", f"U_{u}"]
    return fields


def write_trajectory_csv(trajectory: Trajectory, path: PathLike) -> Path:
    """One row per stage t: f(t), F(t), d_u(t) and U_u(t+1); the last row holds d_u(T)."""
    rows = []
    for i, t in enumerate(trajectory.times.tolist()):
        row: Dict[str, Any] = {"t": t, "f_t": int(trajectory.f_t[i]), "F_t": int(trajectory.F_t[i])}
        for j, u in enumerate(trajectory.tracked_nodes):
            row[f"d_{u}"] = int(trajectory.degrees[i, j])
            row[f"U_{u}"] = int(trajectory.increments[i, j])
        rows.append(row)
    last: Dict[str, Any] = {"t": trajectory.final_time, "f_t": "", "F_t": ""}
    for j, u in enumerate(trajectory.tracked_nodes):
        last[f"d_{u}"] = int(trajectory.final_degrees[j])
        last[f"U_{u}"] = ""
    rows.append(last)
    return write_csv(rows, trajectory_fields(trajectory), path)


def write_meta(out_dir: PathLike, config: Dict[str, Any], seed: int, **extra: Any) -> Path:
    from . import __version__

    meta = {
        "config": config,
        "seed": seed,
        "generator": GENERATOR_NAME,
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    meta.update(extra)
    return write_json(meta, Path(out_dir) / META_FILE)


def curve_rows(result: EnsembleResult) -> List[Dict[str, Any]]:
    rows = []
    for label, counts in result.satisfied_counts.items():
        for t, c in zip(result.checkpoints, counts):
            rows.append({"t": t, "request_id": label, "fraction": c / result.runs})
    return rows


def write_ensemble(result: EnsembleResult, out_dir: PathLike, fmt: str = "csv") -> List[Path]:
    """result.json always; curves and martingale tables as CSV or JSON."""
    out = Path(out_dir)
    written = [write_json(result.summary(), out / RESULT_FILE)]
    curves = curve_rows(result)
    mart = martingale_report(result) if any(r.stats for r in result.records) else []
    if fmt == "csv":
        if curves:
            written.append(write_csv(curves, CURVE_FIELDS, out / CURVES_FILE))
        if mart:
            written.append(write_csv(mart, list(mart[0]), out / MARTINGALE_FILE))
    elif fmt == "json":
        if curves:
            written.append(write_json(curves, out / "curves.json"))
        if mart:
            written.append(write_json(mart, out / "martingale.json"))
    else:
        raise ValueError(f"unknown export format {fmt!r}")
    return written
