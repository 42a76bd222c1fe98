"""Regenerate every reference table.

The same tables are available from the command line, e.g.

    poolscreen tables rmse-100
    poolscreen tables exec-estimation --format json

Each is computed from first principles on every call - nothing is stored.
"""

from poolscreen.tables import TABLE_IDS, build_table

DESCRIPTIONS = {
    "exec-classification": "Recommended Dorfman pool size by prevalence band (pools capped at 8)",
    "exec-estimation": "Best estimation pool size (capped at 20) and gain, 15% NRMSE target",
    "guidelines-nrmse": "Accuracy of the 6/p-pools-of-8 rule of thumb",
    "examples-classification": "Optimal batches for three worked prevalences",
    "rmse-100": "Root-MSE of the prevalence estimate from 100 tests",
    "tests-for-15pct": "Tests needed to reach 15% relative error",
    "cost-optimized": "Plans minimizing samples + 10 * tests at 15% NRMSE",
}

for table_id in TABLE_IDS:
    print("=" * 72)
    print(f"{table_id}: {DESCRIPTIONS[table_id]}")
    print("=" * 72)
    print(build_table(table_id).to_csv())
