"""Named residuals with tolerances: the common currency of every check."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Iterable


@dataclass
class ReportEntry:
    name: str
    residual: float
    tolerance: float
    points: int = 1

    @property
    def passed(self) -> bool:
        return math.isfinite(self.residual) and self.residual <= self.tolerance

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "residual": _json_float(self.residual),
            "tolerance": self.tolerance,
            "passed": self.passed,
            "points": self.points,
        }


def _json_float(v: float):
    return v if math.isfinite(v) else ("inf" if v > 0 else "nan")


@dataclass
class InvariantReport:
    """Max-abs residuals per named check; passes iff every entry passes."""

    entries: list[ReportEntry] = field(default_factory=list)
    metadata: dict[str, Any] = field(default_factory=dict)

    def add(self, name: str, residual, tolerance: float) -> None:
        residual = float(residual)
        if math.isnan(residual):
            residual = math.inf
        self.entries.append(ReportEntry(name, residual, float(tolerance)))

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def __getitem__(self, name: str) -> ReportEntry:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    def __contains__(self, name: str) -> bool:
        return any(e.name == name for e in self.entries)

    def names(self) -> list[str]:
        return [e.name for e in self.entries]

    def failures(self) -> list[ReportEntry]:
        return [e for e in self.entries if not e.passed]

    def with_tolerances(self, overrides: dict[str, float]) -> "InvariantReport":
        """Copy with tolerances replaced for entries whose name matches a key or prefix."""
        out = InvariantReport(metadata=dict(self.metadata))
        for e in self.entries:
            tol = e.tolerance
            for key, val in overrides.items():
                if e.name == key or e.name.startswith(key + "."):
                    tol = float(val)
            out.entries.append(ReportEntry(e.name, e.residual, tol, e.points))
        return out

    @classmethod
    def aggregate(cls, reports: Iterable["InvariantReport"], metadata=None) -> "InvariantReport":
        """Max residual per entry name across reports (e.g. across sample points)."""
        merged: dict[str, ReportEntry] = {}
        for rep in reports:
            for e in rep.entries:
                cur = merged.get(e.name)
                if cur is None:
                    merged[e.name] = ReportEntry(e.name, e.residual, e.tolerance, e.points)
                else:
                    cur.residual = max(cur.residual, e.residual)
                    cur.tolerance = min(cur.tolerance, e.tolerance)
                    cur.points += e.points
        return cls(list(merged.values()), dict(metadata or {}))

    def summary_lines(self) -> list[str]:
        return [
            f"{'PASS' if e.passed else 'FAIL'} {e.name} residual={e.residual:.3e} "
            f"tol={e.tolerance:.1e} points={e.points}"
            for e in self.entries
        ]

    def to_dict(self) -> dict[str, Any]:
        return {
            "passed": self.passed,
            "entries": [e.to_dict() for e in self.entries],
            "metadata": self.metadata,
        }
