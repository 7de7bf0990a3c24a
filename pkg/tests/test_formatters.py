"""
Unit tests for the formatters module.

Tests follow the Given/When/Then pattern for clarity.
"""

import io
import json
import os
import tempfile
from unittest.mock import patch

import numpy as np
import pytest
from openpyxl import load_workbook

from scripts.lib.formatters import (
    load_witness,
    report_to_json,
    to_json,
    validate_report,
    write_report,
    write_report_to_stream,
    write_witness,
    write_xlsx,
)
from scripts.lib.models import SUMMARY_COLUMNS, RunReport, WitnessFile


def make_report(**overrides):
    fields = dict(
        command="stripfact",
        version="0.1.0",
        config={"group": "cyclic:3", "prng": "xoshiro256**", "seed": 0, "k": 2},
        results={"hypothesis_certified": False},
        counts={"candidates_checked": 4, "factorisations_found": 2},
        witnesses={"first_factorisation": [{"pair_index": 1, "x": [0, 1]}]},
        elapsed_ms=3,
    )
    fields.update(overrides)
    return RunReport(**fields)


class TestToJson:
    """Tests for to_json and report_to_json."""

    def test_keys_are_sorted_and_text_ends_with_newline(self):
        """
        Given a dict with unsorted keys
        When serialising
        Then keys should be sorted and the text newline-terminated
        """
        # Given
        data = {"b": 1, "a": {"d": 2, "c": 3}}

        # When
        text = to_json(data)

        # Then
        assert text.endswith("}\n")
        assert text.index('"a"') < text.index('"b"')
        assert text.index('"c"') < text.index('"d"')

    def test_numpy_and_tuple_values_become_plain_json(self):
        """
        Given numpy scalars, arrays, tuples and sets
        When serialising
        Then they should load back as plain ints, lists and sorted lists
        """
        # Given
        data = {"n": np.int64(5), "flag": np.bool_(True), "arr": np.arange(3), "t": (1, 2), "s": {3, 1}}

        # When
        loaded = json.loads(to_json(data))

        # Then
        assert loaded == {"n": 5, "flag": True, "arr": [0, 1, 2], "t": [1, 2], "s": [1, 3]}

    def test_unknown_types_are_rejected(self):
        """
        Given an object with no JSON form
        When serialising
        Then a TypeError should be raised
        """
        # When / Then
        with pytest.raises(TypeError, match="object is not JSON serialisable"):
            to_json({"x": object()})

    def test_reports_differ_only_in_elapsed_time(self):
        """
        Given two reports from the same configuration with different timings
        When serialising both
        Then only the elapsed_ms line should differ
        """
        # Given
        first = report_to_json(make_report(elapsed_ms=3)).splitlines()
        second = report_to_json(make_report(elapsed_ms=40)).splitlines()

        # When
        differing = [a for a, b in zip(first, second) if a != b]

        # Then
        assert len(first) == len(second)
        assert differing == ['  "elapsed_ms": 3,']


class TestValidateReport:
    """Tests for validate_report."""

    def test_valid_report_passes(self):
        """
        Given a well-formed report
        When validating
        Then no error should be raised
        """
        # When / Then
        validate_report(make_report())

    def test_missing_prng_is_rejected(self):
        """
        Given a report whose config has no PRNG name
        When validating
        Then the error should point at config
        """
        # Given
        report = make_report(config={"group": "cyclic:3"})

        # When / Then
        with pytest.raises(ValueError, match="Report does not match schema at config"):
            validate_report(report)

    def test_negative_count_is_rejected(self):
        """
        Given a report dict with a negative count
        When validating
        Then a ValueError should be raised
        """
        # Given
        data = make_report().to_dict()
        data["counts"]["factorisations_found"] = -1

        # When / Then
        with pytest.raises(ValueError, match="counts/factorisations_found"):
            validate_report(data)

    def test_unknown_command_is_rejected(self):
        """
        Given a report with a command the CLI does not have
        When validating
        Then a ValueError should be raised
        """
        # When / Then
        with pytest.raises(ValueError, match="does not match schema at command"):
            validate_report(make_report(command="scan"))


class TestWriteReport:
    """Tests for write_report and write_report_to_stream."""

    def test_writes_to_stream(self):
        """
        Given a report and a text stream
        When writing
        Then the stream should hold the report JSON
        """
        # Given
        stream = io.StringIO()

        # When
        write_report_to_stream(make_report(), stream)

        # Then
        assert json.loads(stream.getvalue())["command"] == "stripfact"

    def test_writes_to_file_creating_directories(self):
        """
        Given an output path in a missing directory
        When writing the report
        Then the directory should be created and the path returned
        """
        # Given
        with tempfile.TemporaryDirectory() as tmpdir:
            path = os.path.join(tmpdir, "reports", "run.json")

            # When
            written = write_report(make_report(), path)

            # Then
            assert written == path
            with open(path, encoding="utf-8") as f:
                assert json.load(f)["counts"]["factorisations_found"] == 2

    @patch("scripts.lib.formatters.sys.stdout", new_callable=io.StringIO)
    def test_writes_to_stdout_without_path(self, mock_stdout):
        """
        Given no output path
        When writing the report
        Then it should go to stdout and None be returned
        """
        # When
        written = write_report(make_report())

        # Then
        assert written is None
        assert json.loads(mock_stdout.getvalue())["version"] == "0.1.0"


class TestWriteXlsx:
    """Tests for write_xlsx."""

    def test_summary_and_witness_sheets(self, tmp_path):
        """
        Given a report with one witness list
        When writing a spreadsheet
        Then it should hold a summary sheet and one sheet with a column per key
        """
        # Given
        path = tmp_path / "run.xlsx"

        # When
        write_xlsx(make_report(), str(path))

        # Then
        wb = load_workbook(path)
        assert wb.sheetnames == ["summary", "first_factorisation"]
        summary = list(wb["summary"].values)
        assert list(summary[0]) == SUMMARY_COLUMNS
        assert ("counts", "factorisations_found", "2") in summary
        rows = list(wb["first_factorisation"].values)
        assert rows[0] == ("pair_index", "x")
        assert rows[1] == (1, "[0, 1]")

    def test_long_and_clashing_sheet_titles(self, tmp_path):
        """
        Given witness names that collide after truncation to 31 characters
        When writing a spreadsheet
        Then the titles should be made unique
        """
        # Given
        name = "a_very_long_witness_list_name_number"
        report = make_report(witnesses={name + "_1": [1, 2], name + "_2": ["x"]})
        path = tmp_path / "long.xlsx"

        # When
        write_xlsx(report, str(path))

        # Then
        titles = load_workbook(path).sheetnames
        assert len(titles) == 3
        assert len(set(titles)) == 3
        assert all(len(t) <= 31 for t in titles)


class TestWitnessFiles:
    """Tests for write_witness and load_witness."""

    def test_written_witness_loads_back(self, tmp_path):
        """
        Given a witness file
        When writing and loading it
        Then group, k and witness should be restored
        """
        # Given
        wf = WitnessFile(version="0.1.0", group="alternating:5", k=4, stabilizer={"full": []},
                         witness={"r": 2, "bijection": np.arange(4)}, seed=0)
        path = tmp_path / "w" / "witness.json"

        # When
        write_witness(wf, str(path))
        loaded = load_witness(str(path))

        # Then
        assert loaded.group == "alternating:5"
        assert loaded.k == 4
        assert loaded.witness == {"r": 2, "bijection": [0, 1, 2, 3]}

    def test_invalid_json_is_rejected(self, tmp_path):
        """
        Given a file that is not JSON
        When loading it as a witness
        Then a ValueError should be raised
        """
        # Given
        path = tmp_path / "broken.json"
        path.write_text("{not json", encoding="utf-8")

        # When / Then
        with pytest.raises(ValueError, match="is not valid JSON"):
            load_witness(str(path))

    def test_non_object_is_rejected(self, tmp_path):
        """
        Given a file holding a JSON list
        When loading it as a witness
        Then a ValueError should be raised
        """
        # Given
        path = tmp_path / "list.json"
        path.write_text("[1, 2]", encoding="utf-8")

        # When / Then
        with pytest.raises(ValueError, match="does not hold a JSON object"):
            load_witness(str(path))
