import csv
import json

from pa_multigraph.export import curve_rows, write_csv, write_ensemble, write_meta, write_trajectory_csv
from pa_multigraph.harness import ExperimentPlan, run_ensemble
from pa_multigraph.pa_engine import ProcessConfig, run


def test_trajectory_csv(tmp_path, linear, single_edge):
    trajectory = run(ProcessConfig(growth=linear, seed_graph=single_edge, horizon=6, tracked_nodes=[1, 2], rng_seed=1))
    path = write_trajectory_csv(trajectory, tmp_path / "t.csv")
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 5
    assert [r["t"] for r in rows] == ["2", "3", "4", "5", "6"]
    assert rows[0]["F_t"] == "1"
    for before, after in zip(rows, rows[1:]):
        assert int(before["d_1"]) + int(before["U_1"]) == int(after["d_1"])


def test_write_csv_creates_parents(tmp_path):
    path = write_csv([{"a": 1}], ["a"], tmp_path / "deep" / "x.csv")
    assert path.read_text().splitlines() == ["a", "1"]


def test_meta_carries_extras(tmp_path):
    meta = json.loads(write_meta(tmp_path, {"horizon": 3}, 9, runs=2).read_text())
    assert meta["config"] == {"horizon": 3}
    assert meta["runs"] == 2
    assert "timestamp" in meta


def test_write_ensemble(tmp_path):
    plan = ExperimentPlan.from_dict(
        {
            "growth": {"kind": "linear_floor", "c": "1", "e_prime": 1, "v_prime": 2},
            "seed_graph": {"edges": [[1, 2]]},
            "horizon": 20,
            "runs": 2,
            "checkpoints": [2, 10, 20],
            "witnesses": [[[1, 1]]],
        }
    )
    result = run_ensemble(plan, workers=1)
    rows = curve_rows(result)
    assert [r["t"] for r in rows] == [2, 10, 20]
    written = write_ensemble(result, tmp_path)
    assert {p.name for p in written} == {"result.json", "curves.csv", "martingale.csv"}
