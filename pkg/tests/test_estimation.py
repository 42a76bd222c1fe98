"""Unit tests for pooled prevalence estimation and planning."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import gammaln

from poolscreen.estimation import (
    CostModel,
    GibbsGowerPlan,
    InfeasibleDesignError,
    PoolTestOutcome,
    dorfman_estimation_rmse,
    estimation_rule_of_thumb,
    gg_asymptotic_variance,
    gg_estimate,
    gg_expected_estimate,
    gg_minimize_cost,
    gg_mse,
    gg_nrmse,
    gg_optimal_pool,
    gg_tests_needed,
    gg_tests_needed_real,
    pool_positive_prob,
    report_for_outcome,
    report_for_plan,
)


# ---------------------------------------------------------------------------
# the estimator itself
# ---------------------------------------------------------------------------

class TestEstimator:
    def test_worked_example(self):
        # 2 of 6 pools of 7 positive -> roughly 5.6% prevalence
        assert gg_estimate(PoolTestOutcome(6, 2, 7)) == pytest.approx(0.0563, abs=5e-4)

    def test_edge_values(self):
        assert gg_estimate(PoolTestOutcome(10, 0, 8)) == 0.0
        assert gg_estimate(PoolTestOutcome(10, 10, 8)) == 1.0

    def test_reduces_to_proportion_at_b1(self):
        assert gg_estimate(PoolTestOutcome(100, 13, 1)) == pytest.approx(0.13, abs=1e-15)

    def test_outcome_validation(self):
        with pytest.raises(ValueError):
            PoolTestOutcome(5, 6, 4)
        with pytest.raises(ValueError):
            PoolTestOutcome(0, 0, 4)

    @settings(deadline=None, max_examples=200)
    @given(st.integers(1, 200), st.integers(1, 30), st.data())
    def test_monotone_in_positives(self, t, b, data):
        k = data.draw(st.integers(0, t - 1))
        lower = gg_estimate(PoolTestOutcome(t, k, b))
        upper = gg_estimate(PoolTestOutcome(t, k + 1, b))
        assert 0.0 <= lower <= upper <= 1.0


# ---------------------------------------------------------------------------
# exact moments
# ---------------------------------------------------------------------------

def _moments_reference(p, b, t):
    """Alternate arrangement of the same sums, over the negative-pool count,
    with the MSE assembled as S2 + (p-1)(p+1-2E)."""
    P = pool_positive_prob(p, b)
    q_b = 1.0 - P
    i = np.arange(t + 1)
    logw = gammaln(t + 1) - gammaln(i + 1) - gammaln(t - i + 1)
    with np.errstate(divide="ignore"):
        logw = logw + np.where(i == 0, 0.0, i * np.log(q_b))
        logw = logw + np.where(t - i == 0, 0.0, (t - i) * np.log(P))
    w = np.exp(logw)
    with np.errstate(divide="ignore"):
        frac_pow = np.where(i == 0, 0.0, np.exp(np.log(i / t) / b))
        frac_pow2 = np.where(i == 0, 0.0, np.exp(2 * np.log(i / t) / b))
    s1 = float(np.sum(w * frac_pow))
    s2 = float(np.sum(w * frac_pow2))
    expected = 1.0 - s1
    mse = s2 + (p - 1.0) * (p + 1.0 - 2.0 * expected)
    return expected, mse


class TestExactMoments:
    def test_b1_specializations_exact(self):
        assert gg_expected_estimate(0.05, 1, 100) == 0.05
        assert gg_mse(0.05, 1, 100) == 0.05 * 0.95 / 100
        assert gg_asymptotic_variance(0.05, 1, 100) == pytest.approx(4.75e-4, rel=1e-12)

    def test_zero_prevalence(self):
        assert gg_expected_estimate(0.0, 12, 50) == 0.0
        assert gg_mse(0.0, 12, 50) == 0.0

    def test_positive_bias(self):
        assert gg_expected_estimate(0.05, 28, 100) > 0.05

    def test_against_alternate_arrangement(self):
        for p, b, t in [(0.05, 28, 100), (0.01, 143, 100), (0.3, 4, 40), (0.02, 7, 250)]:
            e_ref, m_ref = _moments_reference(p, b, t)
            assert gg_expected_estimate(p, b, t) == pytest.approx(e_ref, rel=1e-10)
            assert gg_mse(p, b, t) == pytest.approx(m_ref, rel=1e-8)

    def test_reference_rmse_cells(self):
        assert math.sqrt(gg_mse(0.05, 28, 100)) == pytest.approx(6.28e-3, rel=0.002)
        assert math.sqrt(gg_mse(0.001, 1428, 100)) == pytest.approx(1.29e-4, rel=0.005)
        assert math.sqrt(gg_mse(0.05, 1, 100)) == pytest.approx(2.18e-2, rel=0.002)

    def test_pool_count_bound(self):
        with pytest.raises(ValueError):
            gg_mse(0.05, 4, 100_001)

    def test_windowed_sum_matches_full_sum(self):
        # the 40-sigma window cannot differ from the full sum
        p, b, t = 0.02, 9, 500
        P = pool_positive_prob(p, b)
        k = np.arange(t + 1)
        logw = (
            gammaln(t + 1) - gammaln(k + 1) - gammaln(t - k + 1)
            + np.where(k == 0, 0.0, k * np.log(P))
            + np.where(t - k == 0, 0.0, (t - k) * math.log1p(-P))
        )
        w = np.exp(logw)
        with np.errstate(divide="ignore"):
            ph = -np.expm1(np.log1p(-k / t) / b)
        ph[-1] = 1.0
        assert gg_mse(p, b, t) == pytest.approx(float(np.sum(w * (ph - p) ** 2)), rel=1e-13)


class TestAsymptoticVariance:
    def test_guideline_cell(self):
        nrmse = gg_nrmse(0.01, 8, 600, method="asymptotic")
        assert nrmse == pytest.approx(0.146, abs=5e-4)

    def test_converges_to_exact_mse(self):
        # the approximation error shrinks like 1/t once saturation is gone
        p, b = 0.05, 28
        gaps = []
        for t in (100, 1000, 10000):
            mse = gg_mse(p, b, t)
            gaps.append(abs(mse - gg_asymptotic_variance(p, b, t)) / mse)
        assert gaps[0] < 0.10
        assert gaps[1] < 0.01
        assert gaps[2] < 0.001

    def test_underestimates_under_saturation(self):
        # with nearly all pools positive the exact MSE carries a point mass at
        # p_hat = 1 that no variance expansion sees
        p, b, t = 0.3, 8, 50
        assert gg_asymptotic_variance(p, b, t) < 0.2 * gg_mse(p, b, t)

    def test_rejects_degenerate_prevalence(self):
        with pytest.raises(ValueError):
            gg_asymptotic_variance(0.0, 5, 10)
        with pytest.raises(ValueError):
            gg_asymptotic_variance(1.0, 5, 10)


# ---------------------------------------------------------------------------
# planning
# ---------------------------------------------------------------------------

class TestTestsNeeded:
    def test_individual_testing_column(self):
        for p, expected in [(0.05, 845), (0.01, 4400), (0.001, 44400), (0.0001, 444400)]:
            assert gg_tests_needed(p, 1, 0.15) == expected
            assert gg_tests_needed(p, 1, 0.15) == math.ceil((1 - p) / (0.0225 * p) - 1e-9)

    def test_pool_of_five_column(self):
        for p, expected in [(0.05, 189), (0.01, 899), (0.001, 8899), (0.0001, 88899)]:
            assert gg_tests_needed(p, 5, 0.15) == expected

    def test_result_is_minimal(self):
        for p, b in [(0.05, 27), (0.01, 5), (0.1, 13)]:
            t = gg_tests_needed(p, b, 0.15)
            assert gg_nrmse(p, b, t) <= 0.15 * (1 + 1e-9)
            assert gg_nrmse(p, b, t - 1) > 0.15

    def test_asymptotic_method_is_closed_form(self):
        # slightly optimistic: one pool short of the exact answer here
        assert gg_tests_needed(0.01, 5, 0.15, method="asymptotic") == 898

    def test_plan_at_published_optimum(self):
        # the published table prints 73 pools at pool size 27; the exact
        # crossing is one pool earlier
        assert gg_tests_needed(0.05, 27, 0.15) == 72

    def test_real_valued_crossing_brackets_integer(self):
        for p, b in [(0.05, 13), (0.01, 37), (0.001, 131)]:
            tr = gg_tests_needed_real(p, b, 0.15)
            assert math.ceil(tr - 1e-9) == gg_tests_needed(p, b, 0.15)

    def test_loose_target_needs_one_pool(self):
        # exact NRMSE at a single pool of 2 at 30% prevalence is ~1.8
        assert gg_tests_needed(0.3, 2, 2.0) == 1

    def test_infeasible_target(self):
        with pytest.raises(InfeasibleDesignError):
            gg_tests_needed(0.01, 5, 1e-4)

    def test_validation(self):
        with pytest.raises(ValueError):
            gg_tests_needed(0.01, 5, 0.0)
        with pytest.raises(ValueError):
            gg_tests_needed(0.0, 5, 0.15)


class TestOptimalPool:
    def test_fixed_budget_optima(self):
        assert gg_optimal_pool(0.05, fixed_tests=100).pool_size == 28
        assert gg_optimal_pool(0.01, fixed_tests=100).pool_size == 143
        assert gg_optimal_pool(0.001, fixed_tests=100).pool_size == 1428

    def test_target_mode_capped(self):
        plan = gg_optimal_pool(0.01, target_nrmse=0.15, cap=20)
        assert plan == GibbsGowerPlan(20, 244)
        plan = gg_optimal_pool(0.3, target_nrmse=0.15, cap=20)
        assert plan.pool_size == 4

    def test_target_mode_uncapped(self):
        plan = gg_optimal_pool(0.05, target_nrmse=0.15)
        assert plan.num_pools == 72
        assert abs(plan.pool_size - 27) <= 1
        plan = gg_optimal_pool(0.01, target_nrmse=0.15)
        assert plan.num_pools == 76
        assert plan.pool_size == 138

    def test_gain_vs_individual(self):
        plan = gg_optimal_pool(0.01, target_nrmse=0.15, cap=20)
        gain = gg_tests_needed(0.01, 1, 0.15) / plan.num_pools
        assert gain == pytest.approx(18.0, abs=0.2)
        plan = gg_optimal_pool(0.3, target_nrmse=0.15, cap=20)
        gain = gg_tests_needed(0.3, 1, 0.15) / plan.num_pools
        assert gain == pytest.approx(2.0, abs=0.1)

    def test_mode_exclusivity(self):
        with pytest.raises(ValueError):
            gg_optimal_pool(0.05)
        with pytest.raises(ValueError):
            gg_optimal_pool(0.05, fixed_tests=100, target_nrmse=0.15)


class TestMinimizeCost:
    def test_samples_plus_ten_tests(self):
        opt = gg_minimize_cost(0.05, CostModel(1.0, 10.0), 0.15)
        assert (opt.plan.pool_size, opt.plan.num_pools, opt.total_samples) == (13, 93, 1209)
        opt = gg_minimize_cost(0.01, CostModel(1.0, 10.0), 0.15)
        assert opt.plan.pool_size == 37
        assert opt.total_samples == opt.plan.pool_size * opt.plan.num_pools

    def test_pure_test_cost_reduces_to_min_tests(self):
        opt = gg_minimize_cost(0.05, CostModel(0.0, 1.0), 0.15)
        assert abs(opt.plan.pool_size - 27) <= 1
        assert abs(opt.plan.num_pools - 73) <= 1

    def test_objective_value_consistent(self):
        cost = CostModel(1.0, 10.0)
        opt = gg_minimize_cost(0.05, cost, 0.15)
        assert opt.objective_value == cost.objective(opt.total_samples, opt.plan.num_pools)

    def test_cost_model_validation(self):
        with pytest.raises(ValueError):
            CostModel(0.0, 0.0)
        with pytest.raises(ValueError):
            CostModel(-1.0, 1.0)


class TestRuleOfThumb:
    def test_published_rows(self):
        assert estimation_rule_of_thumb(0.01) == GibbsGowerPlan(8, 600)
        assert estimation_rule_of_thumb(0.30) == GibbsGowerPlan(4, 40)
        assert estimation_rule_of_thumb(0.05) == GibbsGowerPlan(8, 120)

    def test_switch_at_ten_percent(self):
        assert estimation_rule_of_thumb(0.10).pool_size == 8
        assert estimation_rule_of_thumb(0.101).pool_size == 4

    def test_domain(self):
        with pytest.raises(ValueError):
            estimation_rule_of_thumb(0.0)
        with pytest.raises(ValueError):
            estimation_rule_of_thumb(0.6)


class TestDorfmanBaseline:
    def test_reference_cells(self):
        assert dorfman_estimation_rmse(0.05, 100) == pytest.approx(1.42e-2, rel=0.005)
        assert dorfman_estimation_rmse(0.001, 100) == pytest.approx(7.92e-4, rel=0.005)

    def test_no_gain_at_even_odds(self):
        # pooling never pays at 50% prevalence: falls back to individual testing
        assert dorfman_estimation_rmse(0.5, 100) == pytest.approx(math.sqrt(0.25 / 100))


# ---------------------------------------------------------------------------
# saturation pathology and reports
# ---------------------------------------------------------------------------

class TestSaturation:
    def test_oversized_pools_destroy_the_estimate(self):
        # at 30% prevalence a pool of 30 is positive 99.998% of the time;
        # the study is effectively blind however it is analyzed
        assert pool_positive_prob(0.3, 30) > 0.999
        assert gg_nrmse(0.3, 30, 100) > 1.0

    def test_saturated_outcome_flagged(self):
        report = report_for_outcome(PoolTestOutcome(10, 10, 8))
        assert report.saturated
        assert report.p_hat == 1.0
        assert report.mse is None

    def test_plan_report_fields(self):
        report = report_for_plan(0.01, 8, 600)
        assert report.p_hat is None
        assert report.nrmse == pytest.approx(0.146, abs=5e-4)
        assert not report.saturated

    def test_outcome_report_fields(self):
        report = report_for_outcome(PoolTestOutcome(6, 2, 7))
        assert report.p_hat == pytest.approx(0.0563, abs=5e-4)
        assert report.pool_positive_rate_hat == pytest.approx(1 / 3)
        assert report.mse is not None and report.mse > 0
