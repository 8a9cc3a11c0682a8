import math
from fractions import Fraction

import numpy as np
import pytest

from pa_multigraph.errors import ConfigError, DomainError, InvariantViolation, OutOfRangeError
from pa_multigraph.growth import GrowthTable
from pa_multigraph.martingale import (
    NormalizerTable,
    X_value,
    conditional_variance,
    count_sh_violations,
    degree_growth,
    estimate_x_limits,
    l2_accumulate,
    martingale_mean_check,
    mu_expected_increment,
    normalizer_A,
    normalizer_log_bounds,
    sh_check,
    summarize_x,
    tracked_stats,
)
from pa_multigraph.pa_engine import ProcessConfig, Trajectory, Variant, run


def test_normalizer_linear_examples(linear_table):
    norm = NormalizerTable.build(linear_table)
    assert normalizer_A(norm, 1) == 1.0
    for t, expected in [(2, 1), (3, 2), (4, 3), (5, 4)]:
        assert normalizer_A(norm, t) == pytest.approx(expected, rel=1e-12)


def test_normalizer_accepts_growth_table(linear_table):
    assert normalizer_A(linear_table, 5) == pytest.approx(4, rel=1e-12)


def test_normalizer_domain(linear_table):
    norm = NormalizerTable.build(linear_table)
    with pytest.raises(DomainError):
        normalizer_A(norm, 0)
    with pytest.raises(OutOfRangeError):
        normalizer_A(norm, 101)


def test_normalizer_linear_closed_form(linear):
    table = GrowthTable.build(linear, 10_000)
    norm = NormalizerTable.build(table)
    t = np.arange(2, 10_001)
    assert np.allclose(norm.A_values[1:], t - 1, rtol=1e-9, atol=0)
    ratio = norm.A(10_000) / math.sqrt(table.F(10_000))
    assert ratio == pytest.approx(math.sqrt(2 * 9_999 / 10_000), abs=1e-3)


@pytest.mark.parametrize("profile", ["linear", "constant2", "spike"])
def test_martingale_identity(profile, request):
    growth = request.getfixturevalue(profile)
    table = GrowthTable.build(growth, 10_000)
    norm = NormalizerTable.build(table)
    rng = np.random.default_rng(17)
    t = rng.integers(2, 10_000, size=10_000)
    f = table.f_values[t].astype(float)
    F = table.F_prefix[t].astype(float)
    d = np.floor(rng.random(t.size) * (2 * F + 1))
    A_t = np.exp(norm.log_A[t])
    A_next = np.exp(norm.log_A[t + 1])
    lhs = (d + d * f / (2 * F)) / A_next
    assert np.allclose(lhs, d / A_t, rtol=1e-12, atol=0)


def test_log_bounds_bracket_normalizer(linear_table):
    norm = NormalizerTable.build(linear_table)
    lower, upper = normalizer_log_bounds(norm, 100)
    assert lower <= math.log(norm.A(100)) <= upper


def test_mu_examples():
    assert mu_expected_increment(2, 2, 3) == pytest.approx(2 / 3)
    assert mu_expected_increment(0, 5, 7) == 0
    assert mu_expected_increment(1, 100, 5000) == pytest.approx(0.01)
    with pytest.raises(DomainError):
        mu_expected_increment(1, 1, 0)


def test_conditional_variance_examples():
    assert conditional_variance(1, 2, 1) == pytest.approx(0.5)
    assert conditional_variance(6, 4, 3) == 0
    with pytest.raises(InvariantViolation):
        conditional_variance(7, 4, 3)
    with pytest.raises(DomainError):
        conditional_variance(-1, 4, 3)


def test_X_value():
    assert X_value(3, 4) == 0.75
    assert X_value(0, 5) == 0
    with pytest.raises(DomainError):
        X_value(1, 0)


def test_X_value_composes_with_normalizer(linear_table):
    assert X_value(3, normalizer_A(linear_table, 5)) == pytest.approx(0.75, rel=1e-12)


def _one_step_trajectory(f_t):
    return Trajectory(
        variant=Variant.MPA,
        tracked_nodes=[1],
        start_time=2,
        final_time=3,
        times=np.array([2]),
        f_t=np.array([f_t]),
        F_t=np.array([1]),
        degrees=np.array([[1]]),
        increments=np.array([[0]]),
        final_degrees=np.array([1]),
    )


def test_l2_first_stage(linear, single_edge):
    trajectory = run(ProcessConfig(growth=linear, seed_graph=single_edge, horizon=3, tracked_nodes=[1], rng_seed=2))
    series = l2_accumulate(trajectory, NormalizerTable.build(GrowthTable.build(linear, 3)))
    assert series[1].tolist() == pytest.approx([1 / 8], rel=1e-12)


def test_l2_stage_without_edges(linear):
    series = l2_accumulate(_one_step_trajectory(0), NormalizerTable.build(GrowthTable.build(linear, 3)))
    assert series[1].tolist() == [0.0]


def test_l2_missing_records(linear):
    trajectory = _one_step_trajectory(2)
    trajectory.final_time = 5
    with pytest.raises(DomainError):
        l2_accumulate(trajectory, NormalizerTable.build(GrowthTable.build(linear, 10)))


def test_l2_is_nondecreasing(linear, single_edge):
    trajectory = run(ProcessConfig(growth=linear, seed_graph=single_edge, horizon=500, tracked_nodes=[1, 2], rng_seed=6))
    for series in l2_accumulate(trajectory, NormalizerTable.build(GrowthTable.build(linear, 500))).values():
        assert np.all(np.diff(series) >= 0)


def test_sh_check_examples():
    assert sh_check(5, 100, Fraction(3, 4)) is True
    assert sh_check(32, 100, Fraction(3, 4)) is False
    assert sh_check(0, 1) is True
    assert sh_check(1, 1) is False


def test_sh_check_alpha_range():
    with pytest.raises(ConfigError):
        sh_check(1, 10, "1/2")
    with pytest.raises(ConfigError):
        sh_check(1, 10, "1")


def test_no_sh_violations_on_linear_growth(linear, single_edge):
    trajectory = run(ProcessConfig(growth=linear, seed_graph=single_edge, horizon=2000, tracked_nodes=[1], rng_seed=12))
    assert count_sh_violations(trajectory, "3/4", window=(1000, 1999)) == {1: 0}


def test_tracked_stats(linear, single_edge):
    trajectory = run(ProcessConfig(growth=linear, seed_graph=single_edge, horizon=200, tracked_nodes=[1, 2], rng_seed=3))
    norm = NormalizerTable.build(GrowthTable.build(linear, 200))
    stats = tracked_stats(trajectory, norm, checkpoints=[2, 50, 200])
    assert [s.node for s in stats] == [1, 2]
    first = stats[0]
    assert first.checkpoints == [2, 50, 200]
    assert first.x_series[0] == pytest.approx(1.0)
    assert first.x_hat == pytest.approx(trajectory.final_degrees[0] / norm.A(200))
    assert first.x_series[-1] == pytest.approx(first.x_hat)
    assert first.l2_reference_time == 20
    assert 0 <= first.l2_at_reference <= first.l2_sum
    assert 0 <= first.l2_plateau_gap <= 1


def test_estimate_x_limits(linear, single_edge):
    norm = NormalizerTable.build(GrowthTable.build(linear, 50))
    trajectories = [
        run(ProcessConfig(growth=linear, seed_graph=single_edge, horizon=50, tracked_nodes=[1], rng_seed=1, run_index=i))
        for i in range(5)
    ]
    summary = estimate_x_limits(trajectories, norm)[1]
    assert len(summary.samples) == 5
    for x, tr in zip(summary.samples, trajectories):
        assert x * norm.A(50) == pytest.approx(tr.final_degrees[0])
    assert summary.min == min(summary.samples)


def test_estimate_x_limits_identical_runs(linear, single_edge):
    norm = NormalizerTable.build(GrowthTable.build(linear, 50))
    config = ProcessConfig(growth=linear, seed_graph=single_edge, horizon=50, tracked_nodes=[1], rng_seed=1)
    summary = estimate_x_limits([run(config), run(config)], norm)[1]
    assert summary.samples[0] == summary.samples[1]


def test_estimate_x_limits_mixed_configs(linear, single_edge):
    norm = NormalizerTable.build(GrowthTable.build(linear, 50))
    a = run(ProcessConfig(growth=linear, seed_graph=single_edge, horizon=50, tracked_nodes=[1]))
    b = run(ProcessConfig(growth=linear, seed_graph=single_edge, horizon=40, tracked_nodes=[1]))
    with pytest.raises(ConfigError):
        estimate_x_limits([a, b], norm)


def test_summarize_x():
    summary = summarize_x(1, [0.01, 0.5, 1.0, 2.0], threshold=0.05)
    assert summary.min == 0.01
    assert summary.fraction_below == 0.25
    assert summary.quantiles["0.5"] == pytest.approx(0.75)


def test_martingale_mean_check():
    ok, mean, bound = martingale_mean_check([0.9, 1.1, 1.0, 1.0], 1.0)
    assert ok
    assert mean == pytest.approx(1.0)
    assert bound > 0
    assert not martingale_mean_check([2.0, 2.1, 1.9, 2.0], 1.0)[0]


def test_degree_growth(linear, single_edge):
    trajectory = run(ProcessConfig(growth=linear, seed_graph=single_edge, horizon=30, tracked_nodes=[1], rng_seed=5))
    assert degree_growth(trajectory)[1] == trajectory.final_degrees[0] - 1
