"""Seeded Monte Carlo execution of every pooling architecture.

Each run draws synthetic populations of i.i.d. Bernoulli statuses, executes a
pooling procedure literally (pool tests, retests, sequential walks), and
aggregates test counts, classification accuracy and estimator error.  These
empirical numbers are the ground truth the closed-form module is validated
against.

Reproducibility contract: replication r of a run with root seed s draws its
randomness from a fixed block of a counter-based bit stream (Philox keyed by
(s, block_index), BLOCK_REPS replications per block).  Results therefore
depend only on (design, parameters, seed) - not on chunking, scheduling or
the number of workers - and rerunning with the same seed is bit-identical.
Aggregation happens on per-replication arrays indexed by r, which makes it
order-insensitive by construction.

Pool membership is consecutive-block assignment; statuses are i.i.d., so any
assignment rule yields the same distribution.  Populations that do not divide
evenly are padded with known-negative placeholders that are excluded from
test counts and accuracy tallies.

The optional dilution noise model makes a test on a pool with at least one
positive come back negative with the probability given by the dilution
module for that pool size (individual retests use the pool-size-1 rate).
False positives are not modeled.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import dilution as _dilution
from . import estimation as _estimation
from .designs import ArrayDesign, DorfmanDesign, HypercubeDesign, SterrettDesign
from .estimation import GibbsGowerPlan, PoolTestOutcome

__all__ = [
    "BLOCK_REPS",
    "PoolingDesign",
    "PopulationSample",
    "RunOutcome",
    "MonteCarloSummary",
    "simulate_population",
    "run_dorfman",
    "run_array",
    "run_hypercube",
    "run_sterrett",
    "run_gibbs_gower",
    "monte_carlo",
    "simulate_particle_miss_rate",
]

PoolingDesign = Union[DorfmanDesign, ArrayDesign, HypercubeDesign, SterrettDesign, GibbsGowerPlan]

#: Replications per random block.  Fixed: changing it changes which stream
#: each replication reads, i.e. it is part of the reproducibility contract.
BLOCK_REPS = 4096


def _block_rng(seed: int, block: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator for one block of replications."""
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(seed, spawn_key=(stream, block)))
    )


# ---------------------------------------------------------------------------
# populations and outcomes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PopulationSample:
    """Boolean infection statuses drawn i.i.d. Bernoulli(prevalence).

    Regenerating with the same (size, prevalence, seed) via
    simulate_population is bit-identical (PCG64 behind default_rng).
    """

    statuses: np.ndarray
    prevalence: float
    seed: int

    def __post_init__(self):
        if self.statuses.ndim != 1 or len(self.statuses) < 1:
            raise ValueError("statuses must be a nonempty 1-d boolean array")


@dataclass(frozen=True)
class RunOutcome:
    """Result of one architecture run on one population."""

    tests_used: int
    classified_positive: np.ndarray
    classified_negative: np.ndarray
    false_negatives: int
    false_positives: int


@dataclass(frozen=True)
class MonteCarloSummary:
    reps: int
    mean_tests: float  # per person
    se_tests: float
    empirical_rmse: float | None  # estimation runs only
    sensitivity: float | None
    specificity: float | None
    pool_miss_rate: float | None = None  # noise runs: observed pooled miss rate


def simulate_population(size: int, p: float, seed: int) -> PopulationSample:
    if not isinstance(size, (int, np.integer)) or size < 1:
        raise ValueError(f"population size must be a positive integer, got {size!r}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"prevalence must lie in [0, 1], got {p}")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    statuses = rng.random(int(size)) < p
    return PopulationSample(statuses, float(p), int(seed))


def _statuses_of(pop) -> np.ndarray:
    if isinstance(pop, PopulationSample):
        return np.asarray(pop.statuses, dtype=bool)
    return np.asarray(pop, dtype=bool)


def _classify_exact(statuses: np.ndarray, tests: int) -> RunOutcome:
    idx = np.arange(len(statuses))
    return RunOutcome(
        tests_used=int(tests),
        classified_positive=idx[statuses],
        classified_negative=idx[~statuses],
        false_negatives=0,
        false_positives=0,
    )


# ---------------------------------------------------------------------------
# single-population reference runners
# ---------------------------------------------------------------------------

def run_dorfman(pop, b: int) -> RunOutcome:
    """Dorfman testing: one test per pool, b retests per positive pool.

    The padded tail pool only retests its real members.  Classification is
    exact in the noise-free model.
    """
    statuses = _statuses_of(pop)
    if b < 1:
        raise ValueError("batch size must be >= 1")
    n = len(statuses)
    if b == 1:
        return _classify_exact(statuses, n)
    n_pools = -(-n // b)
    tests = n_pools
    for i in range(n_pools):
        members = statuses[i * b : min((i + 1) * b, n)]
        if members.any():
            tests += len(members)
    return _classify_exact(statuses, tests)


def _array_candidates(grid: np.ndarray) -> np.ndarray:
    rows = grid.any(axis=1)
    cols = grid.any(axis=0)
    return rows[:, None] & cols[None, :]


def run_array(pop, b: int, confirm: bool = True) -> RunOutcome:
    """Array testing on consecutive b*b clusters (padded with negatives).

    confirm=True retests every row+column-positive cell individually;
    confirm=False presumes those cells positive, which can only create false
    positives.
    """
    statuses = _statuses_of(pop)
    if b < 2:
        raise ValueError("array side must be >= 2")
    return _run_grid(statuses, b, 2, confirm)


def run_hypercube(pop, b: int, d: int, confirm: bool = True) -> RunOutcome:
    """Hypercube testing: pools are the axis-parallel lines of side-b cubes."""
    statuses = _statuses_of(pop)
    if b < 2 or d < 2:
        raise ValueError("hypercube needs side >= 2 and dimension >= 2")
    return _run_grid(statuses, b, d, confirm)


def _grid_candidates(cube: np.ndarray) -> np.ndarray:
    """Cells whose every axis-parallel line pooled positive."""
    d = cube.ndim
    cand = np.ones(cube.shape, dtype=bool)
    for axis in range(d):
        line_pos = cube.any(axis=axis)  # positivity of each line along `axis`
        cand &= np.expand_dims(line_pos, axis=axis)
    return cand


def _run_grid(statuses: np.ndarray, b: int, d: int, confirm: bool) -> RunOutcome:
    n = len(statuses)
    cluster = b**d
    n_clusters = -(-n // cluster)
    padded = np.zeros(n_clusters * cluster, dtype=bool)
    padded[:n] = statuses
    real = np.zeros_like(padded)
    real[:n] = True

    tests = n_clusters * d * b ** (d - 1)
    presumed = np.zeros(n, dtype=bool)
    for c in range(n_clusters):
        cube = padded[c * cluster : (c + 1) * cluster].reshape((b,) * d)
        cand = _grid_candidates(cube)
        real_cand = cand.reshape(-1) & real[c * cluster : (c + 1) * cluster]
        if confirm:
            tests += int(real_cand.sum())
        else:
            presumed[c * cluster : c * cluster + min(cluster, n - c * cluster)] |= real_cand[
                : min(cluster, n - c * cluster)
            ]
    if confirm:
        return _classify_exact(statuses, tests)

    idx = np.arange(n)
    false_pos = int((presumed & ~statuses).sum())
    return RunOutcome(
        tests_used=int(tests),
        classified_positive=idx[presumed],
        classified_negative=idx[~presumed],
        false_negatives=0,  # every true positive makes all its lines positive
        false_positives=false_pos,
    )


def _sterrett_segment_tests(positions: np.ndarray, m: int) -> int:
    """Tests used by the Sterrett walk on one batch of m with given positive positions."""
    tests = 0
    start = 0
    i = 0  # index into positions
    while start < m:
        tests += 1  # pool the segment [start, m)
        if i >= len(positions):
            break  # pooled remainder is clean
        j = positions[i] - start  # first positive, relative to the segment
        seg_len = m - start
        if j == seg_len - 1:
            tests += seg_len - 1  # walked everyone else; last one inferred
            break
        tests += j + 1  # tested up to and including the first positive
        start = positions[i] + 1
        i += 1
    return tests


def run_sterrett(pop, b: int) -> RunOutcome:
    """Sterrett testing: walk positive pools individual-by-individual,
    re-pooling the untested remainder after each positive found."""
    statuses = _statuses_of(pop)
    if b < 2:
        raise ValueError("batch size must be >= 2")
    n = len(statuses)
    tests = 0
    for s in range(0, n, b):
        batch = statuses[s : s + b]
        tests += _sterrett_segment_tests(np.flatnonzero(batch), len(batch))
    return _classify_exact(statuses, tests)


def run_gibbs_gower(p: float, plan: GibbsGowerPlan, seed: int) -> float:
    """Draw plan.num_pools pools of plan.pool_size i.i.d. samples; estimate p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"prevalence must lie in [0, 1], got {p}")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    pools = rng.random((plan.num_pools, plan.pool_size)) < p
    positive = int(pools.any(axis=1).sum())
    return _estimation.gg_estimate(
        PoolTestOutcome(plan.num_pools, positive, plan.pool_size)
    )


# ---------------------------------------------------------------------------
# vectorized per-block kernels (noise-free); each matches its reference
# runner test-for-test on identical statuses
# ---------------------------------------------------------------------------

def _kernel_dorfman(statuses: np.ndarray, n: int, b: int) -> np.ndarray:
    reps = statuses.shape[0]
    n_pools = -(-n // b)
    padded = np.zeros((reps, n_pools * b), dtype=bool)
    padded[:, :n] = statuses
    pools = padded.reshape(reps, n_pools, b)
    pos = pools.any(axis=2)
    members = np.full(n_pools, b)
    members[-1] = n - (n_pools - 1) * b
    return n_pools + pos @ members


def _kernel_sterrett(statuses: np.ndarray, n: int, b: int) -> np.ndarray:
    reps = statuses.shape[0]
    out = np.empty(reps, dtype=np.int64)
    for r in range(reps):
        row = statuses[r]
        tests = 0
        for s in range(0, n, b):
            batch = row[s : s + b]
            tests += _sterrett_segment_tests(np.flatnonzero(batch), len(batch))
        out[r] = tests
    return out


def _kernel_grid(statuses: np.ndarray, n: int, b: int, d: int, confirm: bool):
    """(tests, false_positives) per replication for array/hypercube runs."""
    reps = statuses.shape[0]
    cluster = b**d
    n_clusters = -(-n // cluster)
    padded = np.zeros((reps, n_clusters * cluster), dtype=bool)
    padded[:, :n] = statuses
    real = np.zeros(n_clusters * cluster, dtype=bool)
    real[:n] = True

    cubes = padded.reshape((reps * n_clusters,) + (b,) * d)
    cand = np.ones(cubes.shape, dtype=bool)
    for axis in range(1, d + 1):
        cand &= np.expand_dims(cubes.any(axis=axis), axis=axis)
    cand = cand.reshape(reps, n_clusters * cluster) & real

    tests = np.full(reps, n_clusters * d * b ** (d - 1), dtype=np.int64)
    if confirm:
        return tests + cand.sum(axis=1), np.zeros(reps, dtype=np.int64)
    false_pos = (cand & ~padded).sum(axis=1)
    return tests, false_pos


# ---------------------------------------------------------------------------
# noisy per-replication runner (dilution false negatives)
# ---------------------------------------------------------------------------

def _miss_probs(noise: _dilution.DilutionScenario, max_pool: int) -> np.ndarray:
    """Miss probability for a positive pool of each size 1..max_pool."""
    probs = np.empty(max_pool + 1)
    probs[0] = 0.0
    for k in range(1, max_pool + 1):
        probs[k] = _dilution.pooled_false_negative_rate(noise.with_pool_size(k))
    return probs


def _noisy_dorfman_rep(row, b, miss, rng):
    """(tests, detected_mask, pos_pools, missed_pools) for one noisy Dorfman rep."""
    n = len(row)
    n_pools = -(-n // b)
    tests = n_pools
    detected = np.zeros(n, dtype=bool)
    pos_pools = missed_pools = 0
    for i in range(n_pools):
        lo, hi = i * b, min((i + 1) * b, n)
        members = row[lo:hi]
        if not members.any():
            continue
        pos_pools += 1
        if rng.random() < miss[hi - lo]:
            missed_pools += 1
            continue
        tests += hi - lo
        for j in range(lo, hi):
            if row[j] and rng.random() >= miss[1]:
                detected[j] = True
    return tests, detected, pos_pools, missed_pools


def _noisy_sterrett_rep(row, b, miss, rng):
    """Noisy Sterrett walk; pooled tests miss with the size-k dilution rate."""
    n = len(row)
    tests = 0
    detected = np.zeros(n, dtype=bool)
    pos_pools = missed_pools = 0
    for s0 in range(0, n, b):
        start, end = s0, min(s0 + b, n)
        while start < end:
            seg = row[start:end]
            tests += 1
            truly_pos = bool(seg.any())
            if truly_pos:
                pos_pools += 1
            flagged = truly_pos and rng.random() >= miss[end - start]
            if truly_pos and not flagged:
                missed_pools += 1
            if not flagged:
                break
            # walk the segment; the last individual is inferred, not tested
            found = None
            for j in range(end - start - 1):
                tests += 1
                if row[start + j] and rng.random() >= miss[1]:
                    found = start + j
                    break
            if found is None:
                detected[end - 1] = True  # inferred positive (may be wrong under noise)
                break
            detected[found] = True
            start = found + 1
    return tests, detected, pos_pools, missed_pools


# ---------------------------------------------------------------------------
# the Monte Carlo harness
# ---------------------------------------------------------------------------

def monte_carlo(
    design: PoolingDesign,
    p: float,
    population_size: int | None,
    reps: int,
    seed: int,
    noise: _dilution.DilutionScenario | None = None,
    workers: int = 1,
) -> MonteCarloSummary:
    """Run a design `reps` times on fresh populations and aggregate.

    Classification designs need population_size; a Gibbs-Gower plan fixes its
    own sample count.  Identical arguments give bit-identical summaries for
    any worker count.
    """
    if reps < 1:
        raise ValueError("reps must be >= 1")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"prevalence must lie in [0, 1], got {p}")

    if isinstance(design, GibbsGowerPlan):
        return _monte_carlo_estimation(design, p, reps, seed, workers)
    if population_size is None or population_size < 1:
        raise ValueError("classification runs need a positive population_size")
    return _monte_carlo_classification(design, p, int(population_size), reps, seed, noise, workers)


def _block_ranges(reps: int):
    return [(lo, min(lo + BLOCK_REPS, reps)) for lo in range(0, reps, BLOCK_REPS)]


def _run_blocks(fn, reps: int, workers: int):
    blocks = list(enumerate(_block_ranges(reps)))
    if workers <= 1:
        for item in blocks:
            fn(item)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fn, blocks))


def _monte_carlo_estimation(plan, p, reps, seed, workers):
    pool_prob = _estimation.pool_positive_prob(p, plan.pool_size)
    p_hats = np.empty(reps)

    def do_block(item):
        block, (lo, hi) = item
        rng = _block_rng(seed, block)
        t_plus = rng.binomial(plan.num_pools, pool_prob, size=hi - lo)
        p_hats[lo:hi] = _estimation._estimates_for_counts(
            t_plus, plan.num_pools, plan.pool_size
        )

    _run_blocks(do_block, reps, workers)
    sq_err = (p_hats - p) ** 2
    tests_per_person = plan.num_pools / plan.total_samples
    return MonteCarloSummary(
        reps=reps,
        mean_tests=tests_per_person,
        se_tests=0.0,
        empirical_rmse=float(np.sqrt(sq_err.mean())),
        sensitivity=None,
        specificity=None,
    )


def _monte_carlo_classification(design, p, n, reps, seed, noise, workers):
    tests = np.empty(reps, dtype=np.int64)
    fp = np.zeros(reps, dtype=np.int64)
    fn = np.zeros(reps, dtype=np.int64)
    n_pos = np.zeros(reps, dtype=np.int64)
    pool_pos = np.zeros(reps, dtype=np.int64)
    pool_missed = np.zeros(reps, dtype=np.int64)

    if noise is not None:
        max_pool = _design_pool_size(design)
        miss = _miss_probs(noise, max_pool)

    def do_block(item):
        block, (lo, hi) = item
        rng = _block_rng(seed, block)
        statuses = rng.random((hi - lo, n)) < p
        n_pos[lo:hi] = statuses.sum(axis=1)
        if noise is None:
            if isinstance(design, DorfmanDesign):
                tests[lo:hi] = (
                    np.full(hi - lo, n)
                    if design.batch_size == 1
                    else _kernel_dorfman(statuses, n, design.batch_size)
                )
            elif isinstance(design, SterrettDesign):
                tests[lo:hi] = _kernel_sterrett(statuses, n, design.batch_size)
            elif isinstance(design, ArrayDesign):
                t, f = _kernel_grid(statuses, n, design.side, 2, design.confirm_stage)
                tests[lo:hi], fp[lo:hi] = t, f
            elif isinstance(design, HypercubeDesign):
                t, f = _kernel_grid(statuses, n, design.side, design.dimension, True)
                tests[lo:hi], fp[lo:hi] = t, f
            else:
                raise ValueError(f"unsupported design {design!r}")
        else:
            for r in range(lo, hi):
                row = statuses[r - lo]
                if isinstance(design, DorfmanDesign):
                    t, detected, pp, pm = _noisy_dorfman_rep(row, design.batch_size, miss, rng)
                elif isinstance(design, SterrettDesign):
                    t, detected, pp, pm = _noisy_sterrett_rep(row, design.batch_size, miss, rng)
                else:
                    raise ValueError(
                        "dilution noise is modeled for Dorfman and Sterrett runs"
                    )
                tests[r] = t
                fn[r] = int((row & ~detected).sum())
                fp[r] = int((detected & ~row).sum())
                pool_pos[r], pool_missed[r] = pp, pm

    _run_blocks(do_block, reps, workers)

    per_person = tests / n
    total_pos = int(n_pos.sum())
    total_neg = reps * n - total_pos
    sensitivity = 1.0 if total_pos == 0 else 1.0 - fn.sum() / total_pos
    specificity = 1.0 if total_neg == 0 else 1.0 - fp.sum() / total_neg
    miss_rate = None
    if noise is not None:
        total_pool_pos = int(pool_pos.sum())
        miss_rate = 0.0 if total_pool_pos == 0 else float(pool_missed.sum() / total_pool_pos)
    return MonteCarloSummary(
        reps=reps,
        mean_tests=float(per_person.mean()),
        se_tests=float(per_person.std(ddof=1) / math.sqrt(reps)) if reps > 1 else 0.0,
        empirical_rmse=None,
        sensitivity=float(sensitivity),
        specificity=float(specificity),
        pool_miss_rate=miss_rate,
    )


def _design_pool_size(design) -> int:
    if isinstance(design, DorfmanDesign):
        return design.batch_size
    if isinstance(design, SterrettDesign):
        return design.batch_size
    if isinstance(design, ArrayDesign):
        return design.side
    if isinstance(design, HypercubeDesign):
        return design.side
    raise ValueError(f"unsupported design {design!r}")


# ---------------------------------------------------------------------------
# dilution oracle: stochastic particle placement
# ---------------------------------------------------------------------------

def simulate_particle_miss_rate(
    scenario: _dilution.DilutionScenario, reps: int, seed: int
) -> float:
    """Empirical individual false-negative rate by placing particles at random.

    ceil(c*T) particles are scattered uniformly over the sample's T/l parts;
    the test misses when the aliquot part catches none.  (The count in one
    part of a uniform multinomial is binomial, which is what is drawn.)
    """
    n_particles = math.ceil(scenario.particle_count)
    frac = scenario.aliquot_volume / scenario.sample_volume
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    if n_particles == 0:
        return 1.0
    in_aliquot = rng.binomial(n_particles, frac, size=reps)
    return float((in_aliquot == 0).mean())
