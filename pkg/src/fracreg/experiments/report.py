"""Machine-readable experiment reports.

Reports serialize to deterministic JSON (schema = 1): identical (seed, config)
pairs produce byte-identical files.  Wall-clock time is therefore kept out of
the main report and written to a sidecar timing file instead.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

SCHEMA_VERSION = 1

KERNEL_FAMILY_NOTE = (
    "kernel and data families (constant/oscillatory/rough/checkerboard) are "
    "implementation choices; measured constants are surrogates tied to them")


@dataclass
class Criterion:
    name: str
    passed: bool
    details: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": bool(self.passed),
                "details": self.details}


@dataclass
class RefinementRow:
    h: float
    constants: dict

    def to_dict(self) -> dict:
        return {"h": self.h, "constants": _jsonable(self.constants)}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in sorted(obj.items(), key=lambda kv: str(kv[0]))}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "item"):
        return obj.item()
    if isinstance(obj, float):
        return float(obj)
    return obj


@dataclass
class ExperimentReport:
    experiment: str
    params: dict
    refinement_rows: list = field(default_factory=list)
    criteria: list = field(default_factory=list)
    notes: list = field(default_factory=lambda: [KERNEL_FAMILY_NOTE])
    wall_clock: float = 0.0

    def add_row(self, h: float, constants: dict) -> None:
        self.refinement_rows.append(RefinementRow(float(h), constants))

    def add_criterion(self, name: str, passed: bool, details: str = "") -> None:
        self.criteria.append(Criterion(name, bool(passed), details))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.criteria)

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "experiment": self.experiment,
            "params": _jsonable(self.params),
            "refinements": [r.to_dict() for r in self.refinement_rows],
            "criteria": [c.to_dict() for c in self.criteria],
            "notes": list(self.notes),
            "passed": self.passed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def write(self, out_dir) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        path = out / f"{self.experiment}.json"
        path.write_text(self.to_json())
        self._write_csv(out / f"{self.experiment}_constants.csv")
        (out / f"{self.experiment}_timing.json").write_text(
            json.dumps({"wall_clock_seconds": self.wall_clock}) + "\n")
        return path

    def _write_csv(self, path: Path) -> None:
        keys = sorted({k for row in self.refinement_rows
                       for k, v in row.constants.items()
                       if isinstance(v, (int, float))})
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["h"] + keys)
            for row in self.refinement_rows:
                writer.writerow([row.h] + [row.constants.get(k, "") for k in keys])


def stable_within(values, factor: float = 2.0) -> bool:
    """Refinement stability: max/min of positive values within `factor`.
    All-zero sequences count as stable (nothing measured to drift)."""
    vals = [float(v) for v in values]
    if any(not (v == v) or v in (float("inf"), float("-inf")) for v in vals):
        return False
    nz = [v for v in vals if v != 0.0]
    if not nz:
        return True
    if min(nz) < 0:
        return False
    return max(nz) <= factor * min(nz)


def growth_bounded(values, factor: float = 2.0) -> bool:
    """Coarsest-to-finest growth of nonnegative values bounded by `factor`."""
    vals = [float(v) for v in values]
    if any(v != v for v in vals):
        return False
    first, last = vals[0], vals[-1]
    if first == 0.0:
        return last == 0.0 or last < float("inf")
    return last <= factor * first
