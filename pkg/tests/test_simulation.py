"""Unit tests for the Monte Carlo harness and single-run procedures."""

import math

import numpy as np
import pytest

from poolscreen.designs import (
    ArrayDesign,
    DorfmanDesign,
    HypercubeDesign,
    SterrettDesign,
    array_expected_tests_exact,
    dorfman_expected_tests_per_person,
    hypercube_expected_tests_exact,
    sterrett_expected_tests_per_batch,
)
from poolscreen.dilution import DilutionScenario, pooled_false_negative_rate
from poolscreen.estimation import GibbsGowerPlan, gg_expected_estimate, gg_mse
from poolscreen import simulation
from poolscreen.simulation import (
    PopulationSample,
    monte_carlo,
    run_array,
    run_dorfman,
    run_gibbs_gower,
    run_hypercube,
    run_sterrett,
    simulate_population,
)


def pop_of(statuses, p=0.1) -> PopulationSample:
    return PopulationSample(np.asarray(statuses, dtype=bool), p, 0)


# ---------------------------------------------------------------------------
# populations
# ---------------------------------------------------------------------------

class TestPopulations:
    def test_extremes(self):
        assert not simulate_population(500, 0.0, 3).statuses.any()
        assert simulate_population(500, 1.0, 3).statuses.all()

    def test_regeneration_is_bit_identical(self):
        a = simulate_population(10_000, 0.07, 99)
        b = simulate_population(10_000, 0.07, 99)
        assert np.array_equal(a.statuses, b.statuses)

    def test_binomial_concentration(self):
        pop = simulate_population(1_000_000, 0.01, seed=7)
        count = int(pop.statuses.sum())
        sd = math.sqrt(1_000_000 * 0.01 * 0.99)
        assert abs(count - 10_000) <= 3 * sd

    def test_validation(self):
        with pytest.raises(ValueError):
            simulate_population(0, 0.1, 1)


# ---------------------------------------------------------------------------
# single-run procedures
# ---------------------------------------------------------------------------

class TestRunners:
    def test_dorfman_all_negative(self):
        out = run_dorfman(pop_of([False] * 100), 5)
        assert out.tests_used == 20

    def test_dorfman_all_positive(self):
        out = run_dorfman(pop_of([True] * 100), 5)
        assert out.tests_used == 120

    def test_dorfman_partial_tail_pool(self):
        # 7 people in pools of 5: tail pool has 2 real members
        statuses = [False] * 5 + [True, False]
        out = run_dorfman(pop_of(statuses), 5)
        assert out.tests_used == 2 + 2

    def test_classification_partitions_population(self):
        pop = simulate_population(101, 0.2, 11)
        for out in (run_dorfman(pop, 5), run_sterrett(pop, 6), run_array(pop, 4)):
            merged = np.sort(np.concatenate([out.classified_positive, out.classified_negative]))
            assert np.array_equal(merged, np.arange(101))
            assert out.false_negatives == 0

    def test_array_all_negative_cluster(self):
        out = run_array(pop_of([False] * 64), 8)
        assert out.tests_used == 16

    def test_array_single_positive(self):
        statuses = np.zeros(64, dtype=bool)
        statuses[37] = True
        out = run_array(pop_of(statuses), 8)
        assert out.tests_used == 17
        assert list(out.classified_positive) == [37]

    def test_array_presumptive_counts_false_positives(self):
        # two positives on a diagonal light up 2 rows and 2 columns: the two
        # off-diagonal cells are presumed positive wrongly
        statuses = np.zeros(16, dtype=bool)
        statuses[0] = statuses[5] = True  # (0,0) and (1,1) of a 4x4 grid
        out = run_array(pop_of(statuses), 4, confirm=False)
        assert out.tests_used == 8
        assert out.false_positives == 2
        assert out.false_negatives == 0

    def test_hypercube_d2_equals_array(self):
        pop = simulate_population(256, 0.06, 21)
        assert run_hypercube(pop, 8, 2).tests_used == run_array(pop, 8).tests_used

    def test_hypercube_single_positive(self):
        statuses = np.zeros(512, dtype=bool)
        statuses[100] = True
        out = run_hypercube(pop_of(statuses), 8, 3)
        assert out.tests_used == 3 * 64 + 1

    def test_sterrett_hand_traces(self):
        # positive at the front: pool, hit on first test, clean remainder pool
        assert run_sterrett(pop_of([1, 0, 0, 0, 0]), 5).tests_used == 3
        # all negative: single pool test
        assert run_sterrett(pop_of([0] * 5), 5).tests_used == 1
        # positive only at the back: pool + walk of b-1 with the last inferred
        assert run_sterrett(pop_of([0, 0, 0, 0, 1]), 5).tests_used == 5
        # two positives up front: pool, hit, pool, hit, remainder pool
        assert run_sterrett(pop_of([1, 1, 0, 0, 0]), 5).tests_used == 5

    def test_gibbs_gower_runs(self):
        assert run_gibbs_gower(0.0, GibbsGowerPlan(8, 50), seed=4) == 0.0
        value = run_gibbs_gower(0.05, GibbsGowerPlan(8, 500), seed=4)
        assert 0.0 < value < 0.2


# ---------------------------------------------------------------------------
# kernels agree with the reference runners
# ---------------------------------------------------------------------------

class TestKernelEquivalence:
    def test_dorfman_kernel(self):
        rng = np.random.default_rng(0)
        statuses = rng.random((200, 47)) < 0.08
        kernel = simulation._kernel_dorfman(statuses, 47, 5)
        reference = [run_dorfman(row, 5).tests_used for row in statuses]
        assert np.array_equal(kernel, reference)

    def test_sterrett_kernel(self):
        rng = np.random.default_rng(1)
        statuses = rng.random((200, 45)) < 0.1
        kernel = simulation._kernel_sterrett(statuses, 45, 9)
        reference = [run_sterrett(row, 9).tests_used for row in statuses]
        assert np.array_equal(kernel, reference)

    def test_grid_kernels(self):
        rng = np.random.default_rng(2)
        statuses = rng.random((60, 128)) < 0.05
        kernel, _ = simulation._kernel_grid(statuses, 128, 8, 2, True)
        reference = [run_array(row, 8).tests_used for row in statuses]
        assert np.array_equal(kernel, reference)

        kernel, fp = simulation._kernel_grid(statuses, 128, 8, 2, False)
        ref_runs = [run_array(row, 8, confirm=False) for row in statuses]
        assert np.array_equal(kernel, [r.tests_used for r in ref_runs])
        assert np.array_equal(fp, [r.false_positives for r in ref_runs])

        statuses = rng.random((30, 512)) < 0.02
        kernel, _ = simulation._kernel_grid(statuses, 512, 8, 3, True)
        reference = [run_hypercube(row, 8, 3).tests_used for row in statuses]
        assert np.array_equal(kernel, reference)


# ---------------------------------------------------------------------------
# the Monte Carlo harness
# ---------------------------------------------------------------------------

class TestMonteCarlo:
    def test_deterministic_and_worker_independent(self):
        a = monte_carlo(DorfmanDesign(5), 0.05, 100, 5000, seed=42)
        b = monte_carlo(DorfmanDesign(5), 0.05, 100, 5000, seed=42)
        c = monte_carlo(DorfmanDesign(5), 0.05, 100, 5000, seed=42, workers=4)
        assert a == b == c

    def test_seed_changes_result(self):
        a = monte_carlo(DorfmanDesign(5), 0.05, 100, 2000, seed=1)
        b = monte_carlo(DorfmanDesign(5), 0.05, 100, 2000, seed=2)
        assert a.mean_tests != b.mean_tests

    def test_zero_prevalence_single_rep(self):
        out = monte_carlo(DorfmanDesign(5), 0.0, 100, 1, seed=0)
        assert out.mean_tests == pytest.approx(0.2)
        assert out.se_tests == 0.0

    def test_dorfman_matches_formula(self):
        out = monte_carlo(DorfmanDesign(5), 0.05, 100, 100_000, seed=42)
        expected = dorfman_expected_tests_per_person(0.05, 5)
        assert abs(out.mean_tests - expected) <= 3 * out.se_tests
        assert abs(out.mean_tests - expected) / expected < 0.01
        assert out.sensitivity == 1.0 and out.specificity == 1.0

    def test_sterrett_matches_recursion(self):
        out = monte_carlo(SterrettDesign(9), 0.03, 90, 60_000, seed=9)
        expected = sterrett_expected_tests_per_batch(0.03, 9) / 9
        assert abs(out.mean_tests - expected) <= 3 * out.se_tests

    def test_array_matches_exact_expectation(self):
        out = monte_carlo(ArrayDesign(8), 0.05, 64, 60_000, seed=5)
        expected = array_expected_tests_exact(0.05, 8)
        assert abs(out.mean_tests - expected) <= 3 * out.se_tests

    def test_hypercube_matches_exact_expectation(self):
        out = monte_carlo(HypercubeDesign(8, 3), 0.01, 512, 40_000, seed=6)
        expected = hypercube_expected_tests_exact(0.01, 8, 3)
        assert abs(out.mean_tests - expected) <= 3 * out.se_tests

    def test_presumptive_array_sensitivity_one(self):
        out = monte_carlo(ArrayDesign(6, confirm_stage=False), 0.08, 72, 20_000, seed=8)
        assert out.sensitivity == 1.0
        assert out.specificity < 1.0

    def test_estimator_run_matches_exact_moments(self):
        plan = GibbsGowerPlan(28, 100)
        out = monte_carlo(plan, 0.05, None, 100_000, seed=3)
        assert out.empirical_rmse == pytest.approx(math.sqrt(gg_mse(0.05, 28, 100)), rel=0.02)

    def test_estimator_million_rep_agreement(self):
        # tighter check: a million replications pin the RMSE to ~0.2%
        out = monte_carlo(GibbsGowerPlan(28, 100), 0.05, None, 1_000_000, seed=31)
        assert out.empirical_rmse == pytest.approx(
            math.sqrt(gg_mse(0.05, 28, 100)), rel=0.006
        )

    def test_estimator_mean_matches_expected_estimate(self):
        plan = GibbsGowerPlan(8, 600)
        reps = 100_000
        p_hats = np.array(
            [run_gibbs_gower(0.01, GibbsGowerPlan(8, 60), seed=s) for s in range(300)]
        )
        # literal pool-by-pool runs: mean within 3 SE of the exact bias sum
        expected = gg_expected_estimate(0.01, 8, 60)
        se = p_hats.std(ddof=1) / math.sqrt(len(p_hats))
        assert abs(p_hats.mean() - expected) <= 3 * se

        # and the vectorized harness agrees with the exact MSE
        out = monte_carlo(plan, 0.01, None, reps, seed=12)
        assert out.empirical_rmse == pytest.approx(math.sqrt(gg_mse(0.01, 8, 600)), rel=0.02)

    def test_validation(self):
        with pytest.raises(ValueError):
            monte_carlo(DorfmanDesign(5), 0.05, None, 100, seed=0)
        with pytest.raises(ValueError):
            monte_carlo(DorfmanDesign(5), 0.05, 100, 0, seed=0)


class TestDilutionNoise:
    def scenario(self, pool_size=10):
        return DilutionScenario(
            aliquot_volume=1.0,
            sample_volume=20.0,
            concentration=5.0,
            pool_size=pool_size,
            prevalence=0.01,
        )

    def test_pool_miss_rate_matches_model(self):
        noise = self.scenario()
        out = monte_carlo(DorfmanDesign(10), 0.01, 100, 60_000, seed=13, noise=noise)
        expected = pooled_false_negative_rate(noise.with_pool_size(10))
        n_events = 60_000 * 10 * (1 - 0.99**10)  # ~ positive pools observed
        se = math.sqrt(expected * (1 - expected) / n_events)
        assert out.pool_miss_rate == pytest.approx(expected, abs=3.5 * se)
        assert out.sensitivity < 1.0
        assert out.specificity == 1.0

    def test_noise_only_for_sequential_designs(self):
        with pytest.raises(ValueError):
            monte_carlo(ArrayDesign(8), 0.01, 64, 10, seed=0, noise=self.scenario())

    def test_noisy_run_deterministic(self):
        noise = self.scenario()
        a = monte_carlo(DorfmanDesign(10), 0.01, 50, 2000, seed=3, noise=noise)
        b = monte_carlo(DorfmanDesign(10), 0.01, 50, 2000, seed=3, noise=noise, workers=3)
        assert a == b

    def test_sterrett_noise_supported(self):
        noise = self.scenario(pool_size=6)
        out = monte_carlo(SterrettDesign(6), 0.01, 60, 5000, seed=4, noise=noise)
        assert out.pool_miss_rate is not None
        assert 0.0 < out.sensitivity < 1.0
