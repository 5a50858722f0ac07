"""Lemma comparison records and JSON report emission."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

SCHEMA_PATH = Path(__file__).with_name("report.schema.json")

_RELATIONS = {
    "<=": lambda m, b: m <= b,
    ">=": lambda m, b: m >= b,
    ">": lambda m, b: m > b,
}


@dataclass(frozen=True)
class LemmaReport:
    """One inequality evaluated at a concrete scale.

    ``measured`` is compared to ``bound`` with ``relation``.  ``asymptotic``
    marks statements that only hold for sufficiently large parameters, whose
    failure is informational.  ``margin`` is positive exactly when the
    inequality holds (strictly positive for ``>``).
    """

    name: str
    relation: str
    measured: float
    bound: float
    passed: bool
    margin: float
    asymptotic: bool = False
    status: str = ""
    details: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def compare(
        cls,
        name: str,
        measured: float,
        relation: str,
        bound: float,
        *,
        asymptotic: bool = False,
        status: str | None = None,
        details: dict[str, Any] | None = None,
    ) -> "LemmaReport":
        if relation not in _RELATIONS:
            raise ValueError(f"unknown relation {relation!r}")
        measured = float(measured)
        bound = float(bound)
        if math.isnan(measured) or math.isnan(bound):
            passed = False
            margin = math.nan
        else:
            passed = bool(_RELATIONS[relation](measured, bound))
            margin = bound - measured if relation == "<=" else measured - bound
        if status is None:
            status = "pass" if passed else "fail"
        return cls(name, relation, measured, bound, passed, margin,
                   asymptotic, status, dict(details or {}))

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "relation": self.relation,
            "measured": jsonable(self.measured),
            "bound": jsonable(self.bound),
            "margin": jsonable(self.margin),
            "passed": self.passed,
            "asymptotic": self.asymptotic,
            "status": self.status,
            "details": jsonable(self.details),
        }


def jsonable(value: Any) -> Any:
    """Convert numpy scalars, fractions, sets and non-finite floats to JSON types."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, (set, frozenset)):
        return [jsonable(v) for v in sorted(value)]
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, Fraction):
        return str(value)
    if hasattr(value, "item") and not isinstance(value, (int, float)):
        value = value.item()
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    raise TypeError(f"cannot serialize {type(value).__name__}")


def emit_report(results: dict[str, Any], path: str | Path, *,
                csv_dir: str | Path | None = None) -> Path:
    """Write ``results`` as canonical JSON (sorted keys, fixed indent).

    With ``csv_dir``, also writes ``lemma_margins.csv`` and, when present,
    ``per_color_counts.csv``.
    """
    path = Path(path)
    text = json.dumps(jsonable(results), indent=2, sort_keys=True,
                      allow_nan=False) + "\n"
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc
    if csv_dir is not None:
        write_csv_tables(results, csv_dir)
    return path


def write_csv_tables(results: dict[str, Any], csv_dir: str | Path) -> list[Path]:
    out = Path(csv_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    lemmas = results.get("lemma_reports", [])
    p = out / "lemma_margins.csv"
    with p.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["name", "relation", "measured", "bound", "margin",
                         "passed", "asymptotic", "status"])
        for rep in lemmas:
            d = rep.to_dict() if isinstance(rep, LemmaReport) else rep
            writer.writerow([d["name"], d["relation"], d["measured"], d["bound"],
                             d["margin"], d["passed"], d["asymptotic"], d["status"]])
    written.append(p)
    counts = results.get("per_color_counts")
    if counts:
        p = out / "per_color_counts.csv"
        with p.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["color", "count"])
            for color, count in sorted(counts.items(), key=lambda kv: int(kv[0])):
                writer.writerow([color, count])
        written.append(p)
    return written


def load_schema() -> dict[str, Any]:
    return json.loads(SCHEMA_PATH.read_text(encoding="utf-8"))
