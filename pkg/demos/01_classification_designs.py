"""Choosing a pooled classification design.

Walks through the closed-form costs of Dorfman, Sterrett, array and
hypercube testing, finds optimal pool sizes across a range of prevalences,
and locates the narrow band where array testing edges out Dorfman.
"""

from poolscreen import (
    ConstraintSet,
    best_classification_design,
    classification_crossovers,
    dorfman_expected_tests_per_person,
    dorfman_optimal_batch,
    dorfman_optimal_batch_continuous,
    sterrett_expected_tests_per_batch,
    sterrett_optimal_batch,
    array_optimal_side,
    array_expected_tests_per_person,
)

print("=" * 72)
print("How much does pooling save?")
print("=" * 72)
print()
print("Expected chemical tests per person under Dorfman testing (pool, then")
print("retest members of positive pools). Cost 1.0 = individual testing.")
print()
print(f"{'prevalence':>10} {'batch 4':>9} {'batch 8':>9} {'batch 16':>9} {'best b':>7} {'best cost':>10}")
for rho in (0.001, 0.005, 0.01, 0.02, 0.05, 0.10, 0.20, 0.30):
    best = dorfman_optimal_batch(rho)
    costs = [dorfman_expected_tests_per_person(rho, b) for b in (4, 8, 16)]
    best_cost = dorfman_expected_tests_per_person(rho, best.batch_size)
    print(
        f"{rho:>10.3f} {costs[0]:>9.4f} {costs[1]:>9.4f} {costs[2]:>9.4f}"
        f" {best.batch_size:>7d} {best_cost:>10.4f}"
    )

print()
print("The optimal batch tracks 1/sqrt(prevalence): the continuous optimum")
print("(via the Lambert W function) brackets the integer one.")
print()
for rho in (0.003, 0.01, 0.05):
    b0 = dorfman_optimal_batch_continuous(rho)
    b = dorfman_optimal_batch(rho).batch_size
    print(f"  prevalence {rho:>6.3f}: continuous optimum {b0:6.2f}, integer optimum {b}")

print()
print("=" * 72)
print("Sequential early stopping (Sterrett) squeezes out a bit more")
print("=" * 72)
print()
print("Members of a positive pool are tested one at a time; after the first")
print("positive, the untested remainder is pooled again. More rounds of")
print("testing, fewer tests; the last member of a walked pool is inferred.")
print()
for rho in (0.3, 0.03, 0.003):
    dorf = dorfman_optimal_batch(rho)
    ster = sterrett_optimal_batch(rho)
    dorf_gain = 1.0 / dorfman_expected_tests_per_person(rho, dorf.batch_size)
    ster_gain = ster.batch_size / sterrett_expected_tests_per_batch(rho, ster.batch_size)
    print(
        f"  prevalence {rho:>6.3f}:  Dorfman b={dorf.batch_size:<3d}"
        f" gain {dorf_gain:5.2f}   |  Sterrett b={ster.batch_size:<3d} gain {ster_gain:5.2f}"
    )

print()
print("=" * 72)
print("Array testing and the Dorfman/array crossover")
print("=" * 72)
print()
for rho in (0.03, 0.003):
    arr = array_optimal_side(rho)
    gain = 1.0 / array_expected_tests_per_person(rho, arr.side)
    print(f"  prevalence {rho:>6.3f}: best {arr.side}x{arr.side} array, gain {gain:5.2f}")

lo, hi = classification_crossovers(dorfman_cap=8, array_side=8)
print()
print(f"With pools capped at 8, an 8x8 array beats capped Dorfman only between")
print(f"prevalences {lo:.2%} and {hi:.2%}; the margin in between is slim.")

print()
print("=" * 72)
print("Putting it together: one recommendation per prevalence")
print("=" * 72)
print()
cons = ConstraintSet(max_pool_size=8)
for rho in (0.001, 0.02, 0.05, 0.30, 0.45):
    ev = best_classification_design(rho, cons, candidates=("dorfman", "array", "hypercube"))
    kind = ev.design.kind
    size = getattr(ev.design, "batch_size", None) or getattr(ev.design, "side", None)
    print(
        f"  prevalence {rho:>6.3f}: {kind:<10s} size {size}"
        f"  ({ev.individuals_per_test:5.2f} people per test)"
    )
print()
print("At high prevalence nothing beats testing everyone individually, and")
print("the recommendation falls back to a batch of one.")
