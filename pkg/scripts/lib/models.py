"""
Data models for strip factorisation reports.

This module defines the RunReport emitted by every CLI command and the
witness file written for product-action embeddings.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional


# Column order for the summary sheet of spreadsheet output
SUMMARY_COLUMNS = [
    "section",
    "key",
    "value",
]

WITNESS_FILE_KIND = "embedding_witness"


@dataclass
class RunReport:
    """
    Result of one CLI command.

    Re-running a command with the same configuration reproduces every field
    except ``elapsed_ms``.
    """

    command: str  # Subcommand path, e.g. "diag embed"
    version: str  # Package version that produced the report
    config: Dict[str, Any]  # Echo of the group spec, caps, budgets, seed and PRNG
    results: Dict[str, Any] = field(default_factory=dict)  # Per-check results
    counts: Dict[str, int] = field(default_factory=dict)
    witnesses: Dict[str, List[Any]] = field(default_factory=dict)  # Named witness lists
    elapsed_ms: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "command": self.command,
            "version": self.version,
            "config": self.config,
            "results": self.results,
            "counts": self.counts,
            "witnesses": self.witnesses,
            "elapsed_ms": self.elapsed_ms,
        }

    def summary_rows(self) -> List[List[str]]:
        """Rows for the summary sheet: config and counts, in key order."""
        rows = [["report", "command", self.command], ["report", "version", self.version]]
        rows += [["config", key, str(self.config[key])] for key in sorted(self.config)]
        rows += [["counts", key, str(self.counts[key])] for key in sorted(self.counts)]
        rows.append(["report", "elapsed_ms", str(self.elapsed_ms)])
        return rows


@dataclass
class WitnessFile:
    """
    An embedding witness together with the action it was built for.

    The action is rebuilt from ``group``, ``k``, ``stabilizer`` and ``top``
    before the witness is checked again.
    """

    version: str
    group: str  # Group spec string, e.g. "alternating:5"
    k: int
    stabilizer: Dict[str, Any]  # StripProduct.to_dict()
    witness: Dict[str, Any]  # EmbeddingWitness.to_dict()
    top: List[Dict[str, Any]] = field(default_factory=list)  # FactorAutomorphism.to_dict() each
    kind: str = WITNESS_FILE_KIND
    seed: Optional[int] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "version": self.version,
            "group": self.group,
            "k": self.k,
            "stabilizer": self.stabilizer,
            "top": self.top,
            "seed": self.seed,
            "witness": self.witness,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "WitnessFile":
        if data.get("kind") != WITNESS_FILE_KIND:
            raise ValueError(f"Not an embedding witness file (kind={data.get('kind')!r})")
        missing = [key for key in ("version", "group", "k", "stabilizer", "witness") if key not in data]
        if missing:
            raise ValueError(f"Witness file is missing {', '.join(missing)}")
        return cls(
            version=str(data["version"]),
            group=str(data["group"]),
            k=int(data["k"]),
            stabilizer=data["stabilizer"],
            witness=data["witness"],
            top=list(data.get("top", [])),
            seed=data.get("seed"),
        )
