"""Run configuration, pipeline orchestration over sample points, report documents."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from . import __version__
from .connections import (
    MIN_CLASSIFY_POINTS,
    berwald_cartan_bridge,
    check_berwald,
    check_cartan,
    classify,
    landsberg_tensor,
    metricity_defects,
)
from .curvature import cartan_curvatures, check_curvature_identities
from .errors import ConfigError, EmptyDomainError, FinslerError, InternalInconsistencyError
from .geometry import local_geometry
from .invariants import InvariantReport
from .jets import TangentPoint
from .metrics import FAMILIES, MetricSpec, check_regularity, sample_points
from .spray import check_barthel

SCHEMA_VERSION = "1.0"
CHECKS = ("regularity", "barthel", "cartan", "berwald", "bridge", "metricity", "curvature", "classify")
FORMATS = ("json", "csv")
DEFAULT_SAMPLE_COUNT = 20
DEFAULT_DIMENSIONS = (2, 3, 4)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2

POINT_CHECKS = {
    "regularity": check_regularity,
    "barthel": check_barthel,
    "cartan": check_cartan,
    "berwald": check_berwald,
    "bridge": berwald_cartan_bridge,
    "metricity": metricity_defects,
    "curvature": check_curvature_identities,
}

# Families whose classification is fixed by the family alone.
EXPECTED_CLASS = {
    "euclidean": {"riemannian": True, "landsberg": True},
    "poincare_half_plane": {"riemannian": True, "landsberg": True},
    "riemannian_diagonal": {"riemannian": True, "landsberg": True},
    "quartic_minkowski": {"riemannian": False, "landsberg": True},
}

CONVENTIONS = {
    "coordinates": "vectors on the slit tangent bundle list d/dx^1..d/dx^n then d/dy^1..d/dy^n",
    "g": "g[i][j] = d^2 E / dy^i dy^j with E = L^2 / 2",
    "C": "C[i][j][k] = (1/2) d g_ij / dy^k",
    "G": "spray = y^i d/dx^i - 2 G^i d/dy^i",
    "N": "N[i][j] = d G^i / dy^j; delta_j = d/dx^j - N[i][j] d/dy^i",
    "F": "F[i][j][k] means nabla_{delta_k} dbar_j = F^i_{jk} dbar_i",
    "V": "V[i][j][k] means nabla_{d/dy^k} dbar_j = V^i_{jk} dbar_i",
    "Phat": "Phat[i][j][k] = Phat(dbar_j, dbar_k)^i = (nabla_{y^k delta_k} T)^i_{jk}",
    "Rhat": "Rhat[i][j][k] = (R(dbar_j, dbar_k) eta)^i",
    "R": "R[a][b][c][d] = g(R(dbar_a, dbar_b) dbar_c, dbar_d); P, S alike with vertical slots",
    "curvature_sign": "K(X,Y)Z = -nabla_X nabla_Y Z + nabla_Y nabla_X Z + nabla_[X,Y] Z",
}


@dataclass
class RunConfig:
    metrics: list[MetricSpec]
    points: list[TangentPoint] = field(default_factory=list)
    sample_count: int = 0
    seed: int = 0
    checks: tuple[str, ...] | None = None
    tolerances: dict[str, float] = field(default_factory=dict)
    output_path: str | None = None
    output_format: str = "json"
    tensors: bool = True
    curvature_tensors: bool = False

    def __post_init__(self):
        if not self.metrics:
            raise ConfigError("config names no metric")
        if not self.points and self.sample_count < 1:
            raise ConfigError("sample_count must be >= 1 when no explicit points are given")
        if self.checks is None:
            # classification needs a sample; leave it out for a handful of explicit points
            few = (len(self.points) if self.points else self.sample_count) < MIN_CLASSIFY_POINTS
            self.checks = tuple(c for c in CHECKS if not (few and c == "classify"))
        self.checks = tuple(self.checks)
        unknown = [c for c in self.checks if c not in CHECKS]
        if unknown:
            raise ConfigError(f"unknown checks {unknown}; choose from {list(CHECKS)}")
        if self.output_format not in FORMATS:
            raise ConfigError(f"output format must be one of {FORMATS}")
        for key, tol in self.tolerances.items():
            if not isinstance(tol, (int, float)) or isinstance(tol, bool) or tol < 0:
                raise ConfigError(f"tolerance for {key!r} must be a non-negative number")
        for u in self.points:
            for spec in self.metrics:
                if u.n != spec.dimension:
                    raise ConfigError(
                        f"point of dimension {u.n} given for a {spec.dimension}-dimensional metric"
                    )

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "metrics": [m.to_dict() for m in self.metrics],
            "points": [{"x": list(u.x), "y": list(u.y)} for u in self.points],
            "sample_count": self.sample_count,
            "seed": self.seed,
            "checks": list(self.checks),
            "tolerances": dict(sorted(self.tolerances.items())),
            "output": {"path": self.output_path, "format": self.output_format},
            "tensors": self.tensors,
            "curvature_tensors": self.curvature_tensors,
        }


def _int(value, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
        raise ConfigError(f"{name} must be an integer")
    return int(value)


def parse_point(item) -> TangentPoint:
    """A point as {"x": [...], "y": [...]}, a pair [x, y], or the string "x1,..;y1,..."."""
    try:
        if isinstance(item, str):
            parts = item.split(";")
            if len(parts) != 2:
                raise ValueError("expected 'x1,...;y1,...'")
            x, y = ([float(v) for v in p.split(",")] for p in parts)
        elif isinstance(item, Mapping):
            x, y = item["x"], item["y"]
        else:
            x, y = item
        return TangentPoint(x, y)
    except FinslerError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed point {item!r}: {exc}") from exc


def config_from_dict(doc: Mapping[str, Any]) -> RunConfig:
    if not isinstance(doc, Mapping):
        raise ConfigError("config must be a JSON object")
    version = doc.get("schema_version", SCHEMA_VERSION)
    if str(version).split(".")[0] != SCHEMA_VERSION.split(".")[0]:
        raise ConfigError(f"unsupported schema_version {version!r}")
    if "metric" in doc and "metrics" in doc:
        raise ConfigError("give either 'metric' or 'metrics', not both")
    raw = doc.get("metrics", [doc["metric"]] if "metric" in doc else None)
    if raw is None:
        raise ConfigError("config needs 'metric' or 'metrics'")
    if not isinstance(raw, list):
        raise ConfigError("'metrics' must be a list")
    metrics = [MetricSpec.from_dict(m) for m in raw]
    points = [parse_point(p) for p in doc.get("points", [])]
    output = doc.get("output", {}) or {}
    if not isinstance(output, Mapping):
        raise ConfigError("'output' must be an object")
    checks = doc.get("checks")
    if checks is not None and not isinstance(checks, list):
        raise ConfigError("'checks' must be a list")
    tolerances = doc.get("tolerances", {}) or {}
    if not isinstance(tolerances, Mapping):
        raise ConfigError("'tolerances' must be an object")
    return RunConfig(
        metrics=metrics,
        points=points,
        sample_count=_int(doc.get("sample_count", 0 if points else DEFAULT_SAMPLE_COUNT), "sample_count"),
        seed=_int(doc.get("seed", 0), "seed"),
        checks=checks,
        tolerances=dict(tolerances),
        output_path=output.get("path"),
        output_format=output.get("format", "json"),
        tensors=bool(doc.get("tensors", True)),
        curvature_tensors=bool(doc.get("curvature_tensors", False)),
    )


def read_config_document(path: str | Path) -> dict[str, Any]:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    return doc


def load_config(path: str | Path) -> RunConfig:
    return config_from_dict(read_config_document(path))


def default_config() -> RunConfig:
    """Every built-in family in dimensions 2, 3, 4, 20 seeded points each, all checks."""
    metrics = [MetricSpec.create(f, n) for f in FAMILIES for n in DEFAULT_DIMENSIONS]
    return RunConfig(metrics=metrics, sample_count=DEFAULT_SAMPLE_COUNT, seed=0)


def _tolist(a) -> Any:
    return np.asarray(a, dtype=float).tolist()


def point_tensors(spec: MetricSpec, u: TangentPoint, curvature_tensors: bool = False) -> dict[str, Any]:
    geo = local_geometry(spec, u)
    curv = cartan_curvatures(spec, u)
    out = {
        "g": _tolist(geo.g.value),
        "C": _tolist(geo.C.value),
        "G": _tolist(geo.G.value),
        "N": _tolist(geo.N.value),
        "F_cartan": _tolist(geo.cartan_F.value),
        "V_cartan": _tolist(geo.cartan_V.value),
        "F_berwald": _tolist(geo.berwald_F),
        "Phat": _tolist(landsberg_tensor(spec, u).Phat),
        "Rhat": _tolist(curv.Rhat),
    }
    if curvature_tensors:
        out.update(R=_tolist(curv.R), P=_tolist(curv.P), S=_tolist(curv.S))
    return out


def _classification_report(spec: MetricSpec, verdict: dict[str, bool]) -> InvariantReport:
    rep = InvariantReport()
    ok = (not verdict["riemannian"]) or verdict["landsberg"]
    rep.add("classify.riemannian_implies_landsberg", 0.0 if ok else np.inf, 0.0)
    expected = EXPECTED_CLASS.get(spec.family)
    if expected is not None:
        rep.add("classify.family", 0.0 if verdict == expected else np.inf, 0.0)
    return rep


def _metric_run(spec: MetricSpec, config: RunConfig) -> tuple[dict[str, Any], InvariantReport]:
    if config.points:
        candidates = list(config.points)
        seed = None
    else:
        candidates = sample_points(spec, config.sample_count, seed=config.seed)
        seed = config.seed
    reports = []
    points_doc = []
    admissible = []
    for u in candidates:
        reg = check_regularity(spec, u)
        entry: dict[str, Any] = {"x": list(u.x), "y": list(u.y), "admissible": reg.passed}
        if "regularity" in config.checks:
            reports.append(reg)
        if reg.passed:
            admissible.append(u)
            for name in config.checks:
                if name in POINT_CHECKS and name != "regularity":
                    reports.append(POINT_CHECKS[name](spec, u))
            if config.tensors:
                entry["tensors"] = point_tensors(spec, u, config.curvature_tensors)
        points_doc.append(entry)
    if not admissible:
        raise EmptyDomainError(f"every sample point was rejected for {spec!r}")
    verdict = None
    if "classify" in config.checks:
        verdict = classify(spec, admissible)
        reports.append(_classification_report(spec, verdict))
    merged = InvariantReport.aggregate(reports).with_tolerances(config.tolerances)
    merged.metadata = {"metric": spec.to_dict(), "seed": seed, "version": __version__}
    doc = {
        "metric": spec.to_dict(),
        "seed": seed,
        "points": points_doc,
        "classification": verdict,
        "report": merged.to_dict(),
    }
    return doc, merged


def _config_echo(config: RunConfig) -> dict[str, Any]:
    # the destination path is not part of the content, so reports compare byte for byte
    doc = config.to_dict()
    doc["output"] = {"format": config.output_format}
    return doc


def run_report(config: RunConfig) -> dict[str, Any]:
    """Full report document: tensors per point and aggregated checks per metric."""
    runs = []
    overall = []
    for spec in config.metrics:
        doc, rep = _metric_run(spec, config)
        runs.append(doc)
        overall.append(rep)
    return {
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": "finsler_connections", "version": __version__},
        "conventions": CONVENTIONS,
        "config": _config_echo(config),
        "passed": all(r.passed for r in overall),
        "runs": runs,
    }


def summary_lines(document: Mapping[str, Any]) -> list[str]:
    lines = []
    for run in document["runs"]:
        m = run["metric"]
        tag = f"{m['family']}/n={m['dimension']}"
        for e in run["report"]["entries"]:
            verdict = "PASS" if e["passed"] else "FAIL"
            res = e["residual"]
            res = f"{res:.3e}" if isinstance(res, float) else str(res)
            lines.append(
                f"{verdict} {tag} {e['name']} residual={res} tol={e['tolerance']:.1e} points={e['points']}"
            )
    lines.append(f"{'PASS' if document['passed'] else 'FAIL'} overall")
    return lines


def render(document: Mapping[str, Any], fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps(document, indent=2, allow_nan=False) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["schema_version", "family", "dimension", "check", "residual", "tolerance", "passed", "points"])
        for run in document["runs"]:
            m = run["metric"]
            for e in run["report"]["entries"]:
                res = e["residual"]
                w.writerow([
                    document["schema_version"], m["family"], m["dimension"], e["name"],
                    repr(res) if isinstance(res, float) else res,
                    repr(e["tolerance"]), e["passed"], e["points"],
                ])
        return buf.getvalue()
    raise ConfigError(f"output format must be one of {FORMATS}")


@dataclass
class CheckOutcome:
    status: int
    lines: list[str]
    text: str | None = None


def run_check(config: RunConfig) -> CheckOutcome:
    """Run all checks; status 0 on pass, 1 on a failed check, 2 on config/domain errors."""
    try:
        doc = run_report(config)
    except InternalInconsistencyError as exc:
        return CheckOutcome(EXIT_FAIL, [f"FAIL {type(exc).__name__}: {exc}"])
    except FinslerError as exc:
        return CheckOutcome(EXIT_CONFIG, [f"ERROR {type(exc).__name__}: {exc}"])
    text = render(doc, config.output_format)
    if config.output_path:
        Path(config.output_path).write_text(text)
    return CheckOutcome(EXIT_PASS if doc["passed"] else EXIT_FAIL, summary_lines(doc), text)


__all__ = [
    "SCHEMA_VERSION",
    "CHECKS",
    "RunConfig",
    "CheckOutcome",
    "config_from_dict",
    "load_config",
    "default_config",
    "parse_point",
    "run_report",
    "run_check",
    "render",
    "summary_lines",
    "point_tensors",
]
