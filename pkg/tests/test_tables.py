"""Tests for the regenerated reference tables."""

import json
import math

import pytest

from poolscreen import designs, estimation
from poolscreen.tables import TABLE_IDS, build_table


class TestRegistry:
    def test_all_ids_build(self):
        for table_id in TABLE_IDS:
            table = build_table(table_id)
            assert table.table_id == table_id
            assert table.rows and table.columns
            for row in table.rows:
                assert len(row) == len(table.columns)

    def test_unknown_id(self):
        with pytest.raises(ValueError):
            build_table("no-such-table")

    def test_pure_regeneration(self):
        # no caching anywhere: repeated builds are equal, fresh objects
        a, b = build_table("rmse-100"), build_table("rmse-100")
        assert a is not b
        assert a == b


class TestClassificationTables:
    def test_exec_chart_pool_sizes(self):
        table = build_table("exec-classification")
        assert [row[1] for row in table.rows] == [3, 4, 5, 6, 7, 8]

    def test_examples_cells_match_api(self):
        table = build_table("examples-classification")
        by_key = {(row[0], row[1]): row for row in table.rows}
        dorf = by_key[(0.03, "simple Dorfman")]
        assert dorf[2] == 6
        assert dorf[3] == pytest.approx(
            1.0 / designs.dorfman_expected_tests_per_person(0.03, 6)
        )
        arr = by_key[(0.003, "batched array testing")]
        assert arr[2] == 52
        # array testing cannot beat individual testing at 30% prevalence
        assert by_key[(0.3, "batched array testing")][2] is None


class TestEstimationTables:
    def test_exec_estimation_pool_sizes(self):
        table = build_table("exec-estimation")
        assert [row[1] for row in table.rows] == [20, 20, 20, 20, 20, 20, 13, 6, 4]

    def test_guidelines_rows(self):
        table = build_table("guidelines-nrmse")
        assert [tuple(row[:3]) for row in table.rows] == [
            (0.001, 8, 6000),
            (0.01, 8, 600),
            (0.05, 8, 120),
            (0.10, 8, 60),
            (0.10, 4, 120),
            (0.30, 4, 40),
        ]
        for row in table.rows:
            assert row[3] == estimation.gg_nrmse(row[0], row[1], row[2])

    def test_rmse_100_cells(self):
        table = build_table("rmse-100")
        row = {r[0]: r for r in table.rows}[0.05]
        assert row[1] == pytest.approx(math.sqrt(0.05 * 0.95 / 100))
        assert row[3] == pytest.approx(6.28e-3, rel=0.01)
        assert row[4] == 28

    def test_tests_for_15pct_cells(self):
        table = build_table("tests-for-15pct")
        rows = {r[0]: r for r in table.rows}
        assert rows[0.01][1] == 4400
        assert rows[0.01][2] == 899
        assert rows[0.01][3] == 76
        assert rows[0.01][4] == 138

    def test_cost_optimized_consistency(self):
        table = build_table("cost-optimized")
        for p, b, t, s in table.rows:
            assert s == b * t
            # the winner satisfies the target at its integer test count
            assert estimation.gg_nrmse(p, b, t) <= 0.15 * (1 + 1e-9)


class TestSerialization:
    def test_csv_shape_and_style(self):
        csv = build_table("rmse-100").to_csv()
        lines = csv.strip().split("\n")
        assert len(lines) == 5
        assert lines[0].startswith("prevalence,")
        # dot decimal separators, scientific notation below 1e-3, no
        # thousands separators
        assert "e-0" in csv
        assert "," not in lines[1].replace(",", " ", 5).split()[0]

    def test_csv_na_cells(self):
        csv = build_table("examples-classification").to_csv()
        assert "N/A" in csv

    def test_json_round_trip(self):
        for table_id in TABLE_IDS:
            text = build_table(table_id).to_json()
            parsed = json.loads(text)
            assert json.loads(json.dumps(parsed, sort_keys=True)) == parsed
            assert parsed["table"] == table_id
            rebuilt = build_table(table_id)
            assert parsed["rows"] == json.loads(rebuilt.to_json())["rows"]
