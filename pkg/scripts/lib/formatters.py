"""
Output formatters for strip factorisation reports.

This module handles JSON serialisation with a stable key order, schema
validation, spreadsheet export and embedding witness files.
"""

import json
import sys
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, List, Optional, TextIO, Union

import jsonschema
import numpy as np
from openpyxl import Workbook

from .models import SUMMARY_COLUMNS, RunReport, WitnessFile


SCHEMA_PATH = Path(__file__).parent / "schemas" / "run_report.schema.json"

# Excel limits sheet titles to 31 characters
MAX_SHEET_TITLE = 31


def _json_default(value: Any) -> Any:
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (set, frozenset)):
        return sorted(value)
    if isinstance(value, tuple):
        return list(value)
    raise TypeError(f"{type(value).__name__} is not JSON serialisable")


def to_json(data: Dict[str, Any]) -> str:
    """Serialise with sorted keys and a two-space indent, newline-terminated."""
    return json.dumps(data, sort_keys=True, indent=2, default=_json_default, ensure_ascii=False) + "\n"


def report_to_json(report: RunReport) -> str:
    """
    Serialise a report.

    Args:
        report: The report to serialise

    Returns:
        JSON text; two runs with the same configuration differ only in elapsed_ms
    """
    return to_json(report.to_dict())


@lru_cache(maxsize=1)
def load_schema() -> Dict[str, Any]:
    with open(SCHEMA_PATH, encoding="utf-8") as f:
        return json.load(f)


def validate_report(report: Union[RunReport, Dict[str, Any]]) -> None:
    """
    Validate a report against the published schema.

    Raises:
        ValueError: If the report does not match the schema
    """
    data = report.to_dict() if isinstance(report, RunReport) else report
    # Round-trip through JSON so tuples and numpy scalars validate as plain values
    data = json.loads(to_json(data))
    try:
        jsonschema.validate(instance=data, schema=load_schema())
    except jsonschema.ValidationError as e:
        path = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise ValueError(f"Report does not match schema at {path}: {e.message}") from e


def write_report_to_stream(report: RunReport, stream: TextIO) -> None:
    stream.write(report_to_json(report))


def write_report(report: RunReport, output_path: Optional[str] = None) -> Optional[str]:
    """
    Write a report to a file or stdout.

    Args:
        report: The report to write
        output_path: Destination file. If None, writes to stdout.

    Returns:
        The path written, or None for stdout
    """
    if output_path is None:
        write_report_to_stream(report, sys.stdout)
        return None

    path = Path(output_path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        write_report_to_stream(report, f)
    return str(path)


def _sheet_title(name: str, taken: List[str]) -> str:
    title = "".join(ch if ch not in '[]:*?/\\' else "_" for ch in name)[:MAX_SHEET_TITLE] or "witnesses"
    base, n = title, 2
    while title in taken:
        suffix = f"_{n}"
        title = base[: MAX_SHEET_TITLE - len(suffix)] + suffix
        n += 1
    return title


def _cell(value: Any) -> Any:
    if isinstance(value, (int, float, str, bool)) or value is None:
        return value
    if isinstance(value, np.integer):
        return int(value)
    return json.dumps(value, sort_keys=True, default=_json_default)


def write_xlsx(report: RunReport, output_path: str) -> str:
    """
    Write a spreadsheet with a summary sheet and one sheet per witness list.

    Witness entries that are mappings become rows with one column per key;
    other entries are written as JSON text in a single column.

    Returns:
        The path written
    """
    wb = Workbook()
    summary = wb.active
    summary.title = "summary"
    summary.append(SUMMARY_COLUMNS)
    for row in report.summary_rows():
        summary.append(row)

    taken = ["summary"]
    for name in sorted(report.witnesses):
        entries = report.witnesses[name]
        ws = wb.create_sheet(_sheet_title(name, taken))
        taken.append(ws.title)
        if entries and all(isinstance(e, dict) for e in entries):
            columns = sorted({key for e in entries for key in e})
            ws.append(columns)
            for e in entries:
                ws.append([_cell(e.get(key)) for key in columns])
        else:
            ws.append(["value"])
            for e in entries:
                ws.append([_cell(e)])

    path = Path(output_path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    wb.save(path)
    return str(path)


def write_witness(witness_file: WitnessFile, output_path: str) -> str:
    """Write an embedding witness file as JSON."""
    path = Path(output_path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(to_json(witness_file.to_dict()))
    return str(path)


def load_witness(path: str) -> WitnessFile:
    """
    Read an embedding witness file.

    Raises:
        ValueError: If the file is not valid JSON or not a witness file
    """
    try:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise ValueError(f"Witness file {path} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise ValueError(f"Witness file {path} does not hold a JSON object")
    return WitnessFile.from_dict(data)
