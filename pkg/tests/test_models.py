"""
Unit tests for the data models.

Tests follow the Given/When/Then pattern for clarity.
"""

import pytest

from scripts.lib.models import SUMMARY_COLUMNS, WITNESS_FILE_KIND, RunReport, WitnessFile


def make_report(**overrides):
    fields = dict(
        command="uniform",
        version="0.1.0",
        config={"group": "cyclic:9", "prng": "xoshiro256**", "element_cap": 10000},
        results={"has_uniform": True},
        counts={"uniform": 3, "automorphisms": 6},
        witnesses={"uniform_automorphisms": [{"index": 1, "images": [0, 2, 4, 6, 8, 1, 3, 5, 7]}]},
        elapsed_ms=12,
    )
    fields.update(overrides)
    return RunReport(**fields)


class TestRunReport:
    """Tests for the RunReport model."""

    def test_to_dict_has_all_fields(self):
        """
        Given a populated report
        When converting to a dict
        Then every field should be present under its own key
        """
        # Given
        report = make_report()

        # When
        data = report.to_dict()

        # Then
        assert set(data) == {"command", "version", "config", "results", "counts", "witnesses", "elapsed_ms"}
        assert data["command"] == "uniform"
        assert data["counts"]["uniform"] == 3
        assert data["elapsed_ms"] == 12

    def test_defaults_are_empty(self):
        """
        Given a report created with only command, version and config
        When reading the other fields
        Then they should be empty and elapsed_ms zero
        """
        # Given / When
        report = RunReport(command="g6", version="0.1.0", config={"group": "cyclic:7", "prng": "xoshiro256**"})

        # Then
        assert report.results == {}
        assert report.counts == {}
        assert report.witnesses == {}
        assert report.elapsed_ms == 0

    def test_summary_rows_are_sorted_by_key(self):
        """
        Given a report with config and counts
        When building summary rows
        Then config and counts should appear in key order between the report rows
        """
        # Given
        report = make_report()

        # When
        rows = report.summary_rows()

        # Then
        assert all(len(row) == len(SUMMARY_COLUMNS) for row in rows)
        assert rows[0] == ["report", "command", "uniform"]
        assert rows[1] == ["report", "version", "0.1.0"]
        assert [r[1] for r in rows if r[0] == "config"] == ["element_cap", "group", "prng"]
        assert [r[1] for r in rows if r[0] == "counts"] == ["automorphisms", "uniform"]
        assert rows[-1] == ["report", "elapsed_ms", "12"]

    def test_summary_values_are_strings(self):
        """
        Given integer config and count values
        When building summary rows
        Then values should be rendered as text
        """
        # Given
        report = make_report()

        # When
        values = [row[2] for row in report.summary_rows()]

        # Then
        assert all(isinstance(v, str) for v in values)
        assert "10000" in values


class TestWitnessFile:
    """Tests for the WitnessFile model."""

    def test_to_dict_carries_kind(self):
        """
        Given a witness file
        When converting to a dict
        Then it should be tagged as an embedding witness
        """
        # Given
        wf = WitnessFile(version="0.1.0", group="alternating:5", k=4, stabilizer={"strips": []}, witness={"r": 2})

        # When
        data = wf.to_dict()

        # Then
        assert data["kind"] == WITNESS_FILE_KIND
        assert data["top"] == []
        assert data["seed"] is None

    def test_from_dict_reads_back(self):
        """
        Given a witness file dict with a seed and top automorphisms
        When reading it
        Then every field should be restored
        """
        # Given
        data = WitnessFile(
            version="0.1.0", group="alternating:5", k=4, stabilizer={"full": []}, witness={"r": 2},
            top=[{"perm": [2, 1, 3, 4]}], seed=7,
        ).to_dict()

        # When
        wf = WitnessFile.from_dict(data)

        # Then
        assert wf.group == "alternating:5"
        assert wf.k == 4
        assert wf.top == [{"perm": [2, 1, 3, 4]}]
        assert wf.seed == 7

    def test_from_dict_rejects_other_kinds(self):
        """
        Given a run report dict
        When reading it as a witness file
        Then a ValueError should be raised
        """
        # When / Then
        with pytest.raises(ValueError, match="Not an embedding witness file"):
            WitnessFile.from_dict(make_report().to_dict())

    def test_from_dict_names_missing_fields(self):
        """
        Given a witness file dict without stabilizer and witness
        When reading it
        Then the error should name both fields
        """
        # Given
        data = {"kind": WITNESS_FILE_KIND, "version": "0.1.0", "group": "alternating:5", "k": 4}

        # When / Then
        with pytest.raises(ValueError, match="missing stabilizer, witness"):
            WitnessFile.from_dict(data)
