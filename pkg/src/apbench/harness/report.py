"""Run reports: checked inequalities, measured stages, tables and constants."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = ["Check", "Table", "RunReport", "write_csv", "emit", "load_report"]


def _clean(x):
    """JSON-safe copy: numpy scalars unwrapped, non-finite floats as strings."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [_clean(float(x.real)), _clean(float(x.imag))]
    return x


@dataclass
class Check:
    """``lhs REL rhs`` with ``REL`` one of ``<=``, ``<``, ``>=``, ``>``, ``==``.

    ``kind`` is ``invariant`` (counts toward pass/fail) or ``trend``
    (a measured comparison that is reported only).
    """

    name: str
    lhs: float
    rel: str
    rhs: float
    holds: bool
    kind: str = "invariant"
    detail: str = ""

    @property
    def slack(self) -> float:
        if self.rel in ("<=", "<"):
            return self.rhs - self.lhs
        if self.rel in (">=", ">"):
            return self.lhs - self.rhs
        return -abs(self.lhs - self.rhs)

    @classmethod
    def compare(cls, name: str, lhs: float, rel: str, rhs: float, kind: str = "invariant",
                detail: str = "", tol: float = 0.0) -> "Check":
        lhs, rhs = float(lhs), float(rhs)
        ops = {
            "<=": lambda a, b: a <= b + tol,
            "<": lambda a, b: a < b + tol,
            ">=": lambda a, b: a >= b - tol,
            ">": lambda a, b: a > b - tol,
            "==": lambda a, b: abs(a - b) <= tol,
        }
        return cls(name, lhs, rel, rhs, bool(ops[rel](lhs, rhs)), kind, detail)

    def as_dict(self) -> dict:
        return dict(name=self.name, lhs=self.lhs, rel=self.rel, rhs=self.rhs, holds=self.holds,
                    slack=self.slack, kind=self.kind, detail=self.detail)


@dataclass
class Table:
    columns: list[str]
    rows: list[list] = field(default_factory=list)

    def add(self, row: dict):
        self.rows.append([row.get(c) for c in self.columns])


@dataclass
class RunReport:
    command: str
    config: dict
    stages: dict = field(default_factory=dict)
    checks: list[Check] = field(default_factory=list)
    tables: dict[str, Table] = field(default_factory=dict)
    constants: list[dict] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def check(self, *args, **kwargs) -> Check:
        c = Check.compare(*args, **kwargs)
        self.checks.append(c)
        return c

    @property
    def passed(self) -> bool:
        return all(c.holds for c in self.checks if c.kind == "invariant")

    def failures(self) -> list[Check]:
        return [c for c in self.checks if c.kind == "invariant" and not c.holds]

    def to_dict(self) -> dict:
        return _clean(dict(
            command=self.command, config=self.config, stages=self.stages,
            checks=[c.as_dict() for c in self.checks],
            tables={k: dict(columns=t.columns, rows=t.rows) for k, t in self.tables.items()},
            constants=self.constants, notes=self.notes, passed=self.passed,
        ))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, allow_nan=False) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "RunReport":
        checks = [Check(c["name"], c["lhs"], c["rel"], c["rhs"], c["holds"], c["kind"], c["detail"])
                  for c in d["checks"]]
        tables = {k: Table(list(t["columns"]), [list(r) for r in t["rows"]]) for k, t in d["tables"].items()}
        return cls(d["command"], d["config"], d["stages"], checks, tables, d["constants"], d["notes"])

    def summary_lines(self) -> list[str]:
        out = [f"{self.command}: {'PASS' if self.passed else 'FAIL'} "
               f"({sum(c.holds for c in self.checks)}/{len(self.checks)} checks hold)"]
        for c in self.checks:
            if not c.holds:
                out.append(f"  {'FAIL' if c.kind == 'invariant' else 'trend miss'} {c.name}: "
                           f"{c.lhs:.6g} {c.rel} {c.rhs:.6g}")
        return out


def load_report(path) -> RunReport:
    return RunReport.from_dict(json.loads(Path(path).read_text()))


def write_csv(path, columns, rows) -> Path:
    """RFC-4180 style CSV with a header row; an empty table gives the header only."""
    path = Path(path)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(columns)
    for r in rows:
        w.writerow(["" if v is None else (repr(float(v)) if isinstance(v, (float, np.floating)) else v)
                    for v in r])
    path.write_text(buf.getvalue(), encoding="utf-8", newline="")
    return path


def emit(report: RunReport, outdir) -> list[Path]:
    """One CSV per table plus ``<command>.json``; returns the written paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    stem = report.command.replace("-", "_")
    paths = [write_csv(outdir / f"{stem}_{name}.csv", t.columns, t.rows)
             for name, t in sorted(report.tables.items())]
    js = outdir / f"{stem}.json"
    js.write_text(report.to_json(), encoding="utf-8")
    return paths + [js]
