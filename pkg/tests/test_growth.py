import math
from fractions import Fraction

import numpy as np
import pytest
from pydantic import TypeAdapter

from pa_multigraph.errors import (
    ConditionViolation,
    DomainError,
    InsufficientRangeError,
    OutOfRangeError,
)
from pa_multigraph.growth import (
    ConstantGrowth,
    GrowthSpec,
    GrowthTable,
    LinearFloorGrowth,
    PowerFloorGrowth,
    S1Hint,
    S2Hint,
    TableGrowth,
    XiProductGrowth,
    assumption_report,
    eval_f,
    integral_f_over_F_pow,
    isolation_probability,
    prefix_F,
    sum_f_over_F_pow,
    xi_build,
)


def test_eval_f_linear(linear):
    assert eval_f(linear, 5) == 5
    assert eval_f(linear, 1) == 0
    assert eval_f(linear, 0) == 1


def test_eval_f_spike(spike):
    assert eval_f(spike, 8) == 8
    assert eval_f(spike, 9) == 1
    assert eval_f(spike, 2) == 2


def test_eval_f_negative_time(linear):
    with pytest.raises(DomainError):
        eval_f(linear, -1)


def test_power_floor_is_exact():
    spec = PowerFloorGrowth(c="1", alpha="1/2", e_prime=1, v_prime=2)
    assert eval_f(spec, 16) == 4
    assert eval_f(spec, 17) == 4
    assert eval_f(spec, 2) == 1


def test_linear_floor_has_minimum_one():
    spec = LinearFloorGrowth(c="1/3", e_prime=1, v_prime=2)
    assert eval_f(spec, 2) == 1
    assert eval_f(spec, 9) == 3


def test_table_out_of_range():
    spec = TableGrowth(values=[1, 0, 2, 3])
    assert spec.v_prime == 2
    assert eval_f(spec, 3) == 3
    with pytest.raises(OutOfRangeError):
        eval_f(spec, 4)


def test_spec_parsed_from_json_dict():
    spec = TypeAdapter(GrowthSpec).validate_python({"kind": "linear_floor", "c": "1", "e_prime": 1, "v_prime": 2})
    assert isinstance(spec, LinearFloorGrowth)
    assert spec.c == Fraction(1)
    assert spec.model_dump(mode="json")["c"] == "1"


def test_spec_refuses_float_rationals():
    with pytest.raises(ValueError):
        LinearFloorGrowth(c=0.5, e_prime=1, v_prime=2)


def test_prefix_F(linear_table):
    assert prefix_F(linear_table, 0) == 0
    assert prefix_F(linear_table, 2) == 1
    assert prefix_F(linear_table, 3) == 3
    assert prefix_F(linear_table, 100) == 4950


def test_prefix_F_beyond_horizon(linear_table):
    with pytest.raises(OutOfRangeError):
        prefix_F(linear_table, 101)


def test_table_prefix_sums_match(linear_table):
    f = linear_table.f_values
    F = linear_table.F_prefix
    assert np.array_equal(F[1:], np.cumsum(f))


def test_table_horizon_below_v_prime():
    spec = ConstantGrowth(C=1, e_prime=3, v_prime=3)
    with pytest.raises(DomainError):
        GrowthTable.build(spec, 2)


def test_step_extension(linear_table):
    assert linear_table.f_real(5.7) == 5
    assert linear_table.F_real(3.5) == pytest.approx(4.5)
    assert linear_table.F_real(4.0) == 6.0


def test_integral_one_stage(linear_table):
    assert integral_f_over_F_pow(linear_table, 2, 3, 1) == pytest.approx(math.log(3), rel=1e-12)


def test_integral_empty_window(linear_table):
    assert integral_f_over_F_pow(linear_table, 5, 5, 1) == 0.0


def test_integral_telescopes_for_beta_one(linear_table):
    value = integral_f_over_F_pow(linear_table, 10, 90, 1)
    assert value == pytest.approx(math.log(linear_table.F(90) / linear_table.F(10)), rel=1e-9)


def test_integral_domain_errors(linear_table):
    with pytest.raises(DomainError):
        integral_f_over_F_pow(linear_table, 6, 5, 1)
    with pytest.raises(DomainError):
        integral_f_over_F_pow(linear_table, 0, 5, 1)
    with pytest.raises(DomainError):
        integral_f_over_F_pow(linear_table, 2, 5, Fraction(1, 2))


def test_sum_rejects_beta_below_one(linear_table):
    with pytest.raises(DomainError):
        sum_f_over_F_pow(linear_table, 2, 5, Fraction(1, 2))
    with pytest.raises(DomainError):
        sum_f_over_F_pow(linear_table, 2, 5, 0.9)


def test_sum_examples(linear_table):
    assert sum_f_over_F_pow(linear_table, 2, 2, 1) == pytest.approx(2.0)
    assert sum_f_over_F_pow(linear_table, 2, 3, 1) == pytest.approx(3.0)
    assert sum_f_over_F_pow(linear_table, 2, 4, 2) == pytest.approx(2 + 3 / 9 + 4 / 36)


@pytest.mark.parametrize("beta", [Fraction(1), Fraction(3, 2), Fraction(2)])
def test_integral_and_sum_stay_close(linear, beta):
    table = GrowthTable.build(linear, 10_000)
    rng = np.random.default_rng(11)
    for _ in range(100):
        m, t = sorted(rng.integers(10, 10_001, size=2).tolist())
        first = table.f(m) / table.F(m) ** float(beta)
        gap = abs(integral_f_over_F_pow(table, m, t, beta) - sum_f_over_F_pow(table, m, t, beta))
        assert gap <= first + 1


def test_assumption_report_linear(linear):
    report = assumption_report(GrowthTable.build(linear, 10_000))
    i = report.doubling_points.index(5000)
    assert report.s2_doubling_increments[i] < 0.01
    assert report.s1_doubling_increments[i] == pytest.approx(2 * math.log(2), rel=0.05)
    assert report.verdict_hint == (S1Hint.DIVERGING, S2Hint.CONVERGING)


def test_assumption_report_constant(constant2):
    report = assumption_report(GrowthTable.build(constant2, 10_000))
    assert report.verdict_hint == (S1Hint.DIVERGING, S2Hint.CONVERGING)


def test_assumption_report_spike_never_converges(spike):
    report = assumption_report(GrowthTable.build(spike, 2**14))
    assert all(inc >= 0.05 for inc in report.s2_doubling_increments)
    assert report.verdict_hint[1] is S2Hint.INCONCLUSIVE


def test_assumption_report_needs_a_doubling(linear):
    with pytest.raises(InsufficientRangeError):
        assumption_report(GrowthTable.build(linear, 10), checkpoints=[8])


def test_xi_build_powers_of_two():
    table_spec = xi_build(["1"], 10)
    assert table_spec.values[5] == 16
    assert GrowthTable.build(table_spec, 10).F(4) == 8


def test_xi_build_reports_first_bad_stage():
    with pytest.raises(ConditionViolation) as exc:
        xi_build(["1", "1/2"], 5)
    assert exc.value.t == 1
    with pytest.raises(ConditionViolation) as exc:
        xi_build(["1/2"], 5)
    assert exc.value.t == 0


def test_large_values_switch_to_exact_integers():
    table = GrowthTable.build(XiProductGrowth(xi=["1", "3"]), 40)
    assert table.f_values.dtype == object
    assert table.F(40) == 4**39
    assert table.f(40) == 3 * 4**39


def test_isolation_probability(linear_table):
    assert isolation_probability(linear_table, 1, 3, 4) == pytest.approx((5 / 6) ** 3)
    assert isolation_probability(linear_table, 1, 2, 3) == 0.0
    assert isolation_probability(linear_table, 1, 10, 40) < isolation_probability(linear_table, 1, 10, 20)
