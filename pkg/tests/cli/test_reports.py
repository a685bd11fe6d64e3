import csv
import json

import numpy as np

from cli.reports import flatten, write_json, write_report, write_rows


class TestWriteJson:
    def test_schema_version_and_non_finite_values(self, tmp_path):
        """Reports are versioned and non-finite floats become null."""
        path = write_json(
            tmp_path / "report.json",
            {"value": np.float64(0.5), "bad": float("nan"), "items": np.array([1.0, np.inf])},
        )

        document = json.loads(path.read_text())
        assert document == {"schema": "v1", "value": 0.5, "bad": None, "items": [1.0, None]}

    def test_leaves_no_temporary_files(self, tmp_path):
        write_json(tmp_path / "nested" / "report.json", {"a": 1})
        assert [p.name for p in (tmp_path / "nested").iterdir()] == ["report.json"]


class TestCsv:
    def test_rows_keep_full_precision(self, tmp_path):
        value = 1 / 3
        path = write_rows(tmp_path / "rows.csv", ("k", "mu"), [{"k": 1, "mu": value}])

        with open(path) as handle:
            rows = list(csv.DictReader(handle))
        assert rows[0]["k"] == "1"
        assert float(rows[0]["mu"]) == value

    def test_missing_values_are_empty(self, tmp_path):
        path = write_rows(tmp_path / "rows.csv", ("k", "mu"), [{"k": 1}])
        assert path.read_text().splitlines() == ["k,mu", "1,"]

    def test_flatten_drops_lists(self):
        assert flatten({"a": 1, "b": {"c": 2.0, "d": [1, 2]}, "e": [3]}) == {"a": 1, "b.c": 2.0}

    def test_report_in_csv_format(self, tmp_path):
        path = write_report(tmp_path, "certify", {"phi": {"verdict": True}}, format="csv")

        assert path.name == "certify.csv"
        assert path.read_text().splitlines() == ["schema,phi.verdict", "v1,True"]
