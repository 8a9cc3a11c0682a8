import csv
import json

from pa_multigraph.cli import main
from pa_multigraph.multigraph import Multigraph, read_multigraph, write_multigraph

LINEAR = {"kind": "linear_floor", "c": "1", "e_prime": 1, "v_prime": 2}


def write_plan(tmp_path, **overrides):
    data = {"growth": LINEAR, "seed_graph": {"edges": [[1, 2]]}, "horizon": 30, "runs": 3, "seed": 4}
    data.update(overrides)
    path = tmp_path / "plan.json"
    path.write_text(json.dumps(data))
    return str(path)


def test_ergen_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.mg", tmp_path / "b.mg"
    for out in (a, b):
        assert main(["ergen", "--nodes", "100", "--p", "1/2", "--seed", "7", "--out", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert read_multigraph(a).n == 100


def test_ergen_bad_probability(tmp_path):
    assert main(["ergen", "--nodes", "10", "--p", "3/2", "--out", str(tmp_path / "g.mg")]) == 1


def test_simulate_writes_trajectory_and_meta(tmp_path):
    out = tmp_path / "run"
    assert main(["simulate", "--config", write_plan(tmp_path), "--out", str(out), "--save-graph"]) == 0
    with open(out / "trajectory.csv", newline="") as f:
        rows = list(csv.DictReader(f))
    assert list(rows[0]) == ["t", "f_t", "F_t", "d_1", "U_1"]
    assert rows[0]["t"] == "2"
    assert rows[-1]["t"] == "30"
    assert rows[-1]["U_1"] == ""
    meta = json.loads((out / "meta.json").read_text())
    assert meta["seed"] == 4
    assert meta["generator"] == "numpy.random.PCG64"
    assert read_multigraph(out / "graph.mg").total_edges == 1 + sum(range(2, 30))


def test_simulate_seed_override_changes_output(tmp_path):
    plan = write_plan(tmp_path)
    main(["simulate", "--config", plan, "--out", str(tmp_path / "a"), "--seed", "1"])
    main(["simulate", "--config", plan, "--out", str(tmp_path / "b"), "--seed", "1"])
    main(["simulate", "--config", plan, "--out", str(tmp_path / "c"), "--seed", "2"])
    a = (tmp_path / "a" / "trajectory.csv").read_bytes()
    assert a == (tmp_path / "b" / "trajectory.csv").read_bytes()
    assert a != (tmp_path / "c" / "trajectory.csv").read_bytes()


def test_ensemble_outputs(tmp_path):
    plan = write_plan(tmp_path, witnesses=[[[1, 1]]])
    out = tmp_path / "ens"
    assert main(["ensemble", "--config", plan, "--out", str(out), "--workers", "1", "--quiet"]) == 0
    result = json.loads((out / "result.json").read_text())
    assert result["runs"] == 3
    assert "1:1" in result["witness_curves"]
    assert (out / "curves.csv").exists()
    assert (out / "martingale.csv").exists()


def test_ensemble_json_format(tmp_path):
    out = tmp_path / "ens"
    assert main(["ensemble", "--config", write_plan(tmp_path), "--out", str(out), "--workers", "1", "--format", "json", "--quiet"]) == 0
    assert isinstance(json.loads((out / "martingale.json").read_text()), list)


def test_martingale_command(tmp_path):
    out = tmp_path / "mart"
    assert main(["martingale", "--config", write_plan(tmp_path), "--out", str(out), "--workers", "1", "--quiet"]) == 0
    rows = json.loads((out / "martingale.json").read_text())
    assert rows[0]["t"] == 2
    assert "sh_violations" in json.loads((out / "result.json").read_text())


def test_axioms_command(tmp_path, capsys):
    path = tmp_path / "g.mg"
    write_multigraph(Multigraph.new_seed([(1, 2), (1, 2), (2, 3)], 3), path)
    assert main(["axioms", "--graph", str(path)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["max_multiplicity"] == 2
    assert report["a1_ok"] is True


def test_axioms_on_malformed_graph_is_runtime_error(tmp_path):
    path = tmp_path / "bad.mg"
    path.write_text("1 1 1\n")
    assert main(["axioms", "--graph", str(path)]) == 2


def test_backforth_command(tmp_path):
    g1, g2, out = tmp_path / "g1.mg", tmp_path / "g2.mg", tmp_path / "bf.json"
    write_multigraph(Multigraph.new_seed([(1, 2)], 2), g1)
    write_multigraph(Multigraph.new_seed([(1, 2), (1, 2)], 2), g2)
    assert main(["backforth", "--g1", str(g1), "--g2", str(g2), "--steps", "2", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["status"] == "failed"
    assert data["vector"] == [2]


def test_assumptions_profile(capsys):
    assert main(["assumptions", "--profile", "linear", "--horizon", "10000"]) == 0
    text = capsys.readouterr().out
    assert "hint: S1_diverging, S2_converging" in text
    assert any(line.split()[:1] == ["5000"] for line in text.splitlines())


def test_assumptions_growth_file(tmp_path):
    spec = tmp_path / "growth.json"
    spec.write_text(json.dumps({"kind": "table", "values": [1, 0, 1, 1, 1, 1, 1, 1, 1]}))
    out = tmp_path / "report.json"
    assert main(["assumptions", "--growth", str(spec), "--horizon", "8", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["horizon"] == 8


def test_assumptions_needs_one_source(tmp_path):
    assert main(["assumptions", "--horizon", "100"]) == 1


def test_unknown_command():
    assert main(["frobnicate"]) == 1


def test_invalid_plan_is_config_error(tmp_path):
    bad = tmp_path / "plan.json"
    bad.write_text(json.dumps({"growth": LINEAR, "horizon": 10}))
    assert main(["simulate", "--config", str(bad), "--out", str(tmp_path / "x")]) == 1


def test_bad_seed_graph_is_config_error(tmp_path):
    isolated = write_plan(tmp_path, seed_graph={"edges": [[1, 2]], "nodes": 3})
    assert main(["simulate", "--config", isolated, "--out", str(tmp_path / "a")]) == 1
    missing = write_plan(tmp_path, seed_graph="nowhere.mg")
    assert main(["ensemble", "--config", missing, "--out", str(tmp_path / "b"), "--workers", "1", "--quiet"]) == 1
