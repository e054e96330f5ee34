"""Finsler function families and the first-layer tensors g and C."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from .errors import ConfigError, DomainError, RegularityError
from .jets import Jet, TangentPoint, evaluate_jet, value_of
from .invariants import InvariantReport

FAMILIES = (
    "euclidean",
    "poincare_half_plane",
    "riemannian_diagonal",
    "randers",
    "quartic_minkowski",
)

# Closed forms available for the diagonal entries a_i(x) of riemannian_diagonal.
# Each takes the selected coordinate value t and a scale s.
DIAGONAL_FORMS = {
    "constant": lambda t, s: 0.0 * t + s,
    "exp": lambda t, s: np.exp(s * t),
    "one_plus_square": lambda t, s: 1.0 + s * t * t,
    "cosh": lambda t, s: np.cosh(s * t),
}

# Smallest admissible eigenvalue ratio of g before a point counts as degenerate.
PD_RATIO = 1e-8
HOMOGENEITY_FACTORS = (0.5, 2.0, 3.0)


def _freeze(v):
    if isinstance(v, Mapping):
        return tuple(sorted((k, _freeze(w)) for k, w in v.items()))
    if isinstance(v, (list, tuple, np.ndarray)):
        return tuple(_freeze(w) for w in v)
    return v


@dataclass(frozen=True, eq=False)
class MetricSpec:
    """Immutable description of a Finsler function from the built-in catalog.

    Use :meth:`create` (or :meth:`from_dict`) rather than the constructor; it
    fills family defaults and validates parameters.
    """

    family: str
    dimension: int
    params: Mapping[str, Any] = field(default_factory=dict)

    def _key(self):
        return (self.family, self.dimension, _freeze(self.params))

    def __eq__(self, other):
        return isinstance(other, MetricSpec) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    @classmethod
    def create(cls, family: str, dimension: int = 2, **params) -> "MetricSpec":
        if family not in FAMILIES:
            raise ConfigError(f"unknown metric family {family!r}")
        try:
            n = int(dimension)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"dimension must be an integer, got {dimension!r}") from exc
        if n != dimension or n < 2:
            raise ConfigError("dimension must be at least 2")
        full = _default_params(family, n)
        unknown = set(params) - set(full)
        if unknown:
            raise ConfigError(f"unknown parameters for {family}: {sorted(unknown)}")
        full.update(params)
        full = _validate(family, n, full)
        return cls(family, n, full)

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "MetricSpec":
        if "family" not in doc:
            raise ConfigError("metric description needs a 'family'")
        params = doc.get("params", {})
        if not isinstance(params, Mapping):
            raise ConfigError("metric params must be an object")
        return cls.create(doc["family"], doc.get("dimension", 2), **params)

    def to_dict(self) -> dict[str, Any]:
        return {
            "family": self.family,
            "dimension": self.dimension,
            "params": json.loads(json.dumps(self.params)),
        }

    @property
    def riemannian(self) -> bool:
        """Whether the family is Riemannian by construction (C = 0)."""
        return self.family in ("euclidean", "poincare_half_plane", "riemannian_diagonal")

    # -- the Finsler function -------------------------------------------------

    def finsler_function(self, x, y):
        """L(x, y) for plain arrays or jets (no domain checks)."""
        p = self.params
        fam = self.family
        if fam == "euclidean":
            return np.sqrt((y * y).sum())
        if fam == "poincare_half_plane":
            return np.sqrt((y * y).sum()) / x[self.dimension - 1]
        if fam == "riemannian_diagonal":
            a = self.diagonal(x)
            return np.sqrt(sum(a[i] * y[i] * y[i] for i in range(self.dimension)))
        if fam == "randers":
            a = np.asarray(p["a"])
            alpha = np.sqrt((y[:, None] * y[None, :] * a).sum())
            return alpha + (self.one_form(x) * y).sum()
        if fam == "quartic_minkowski":
            y2 = y * y
            return ((y2 * y2).sum()) ** 0.25
        raise ConfigError(fam)

    def diagonal(self, x) -> list:
        """Diagonal entries a_i(x) of a riemannian_diagonal metric."""
        out = []
        for entry in self.params["diagonal"]:
            form = DIAGONAL_FORMS[entry["form"]]
            out.append(form(x[entry["coord"]], entry["scale"]))
        return out

    def one_form(self, x):
        """Randers covector field b(x) = b + B x."""
        b = np.asarray(self.params["b"])
        B = np.asarray(self.params["b_slope"])
        return (B * x[None, :]).sum(axis=1) + b

    def energy_function(self, x, y):
        L = self.finsler_function(x, y)
        return 0.5 * L * L

    # -- domain -----------------------------------------------------------

    def check_domain(self, u: TangentPoint) -> None:
        if u.n != self.dimension:
            raise DomainError(f"point has dimension {u.n}, metric {self.dimension}")
        if self.family == "poincare_half_plane" and u.x[-1] <= 0:
            raise DomainError("poincare_half_plane needs a positive last coordinate")
        if self.family == "randers":
            b = self.one_form(u.xa)
            ainv = np.linalg.inv(np.asarray(self.params["a"]))
            if b @ ainv @ b >= 1.0:
                raise DomainError("randers one-form has a-norm >= 1 at this point")

    def sample_box(self) -> np.ndarray:
        """(n, 2) array of lower/upper bounds for sampled base points."""
        box = np.tile([-1.0, 1.0], (self.dimension, 1))
        if self.family == "poincare_half_plane":
            box[-1] = [0.5, 2.0]
        return box

    def __repr__(self):
        return f"MetricSpec({self.family!r}, dimension={self.dimension})"


def _default_params(family: str, n: int) -> dict[str, Any]:
    if family == "riemannian_diagonal":
        diag = []
        for i in range(n):
            j = (i + 1) % n
            if i % 2 == 0:
                diag.append({"form": "one_plus_square", "coord": j, "scale": 1.0})
            else:
                diag.append({"form": "exp", "coord": j, "scale": 0.5})
        return {"diagonal": diag}
    if family == "randers":
        slope = np.zeros((n, n))
        s = min(1.0, np.sqrt(4.0 / n))
        for i in range(n - 1):
            slope[i, i + 1] = 0.2 * s
            slope[i + 1, i] = -0.1 * s
        b = np.zeros(n)
        b[:2] = [0.3, 0.1]
        return {"a": np.eye(n).tolist(), "b": b.tolist(), "b_slope": slope.tolist()}
    return {}


def _validate(family: str, n: int, p: dict[str, Any]) -> dict[str, Any]:
    if family == "riemannian_diagonal":
        diag = p["diagonal"]
        if len(diag) != n:
            raise ConfigError(f"riemannian_diagonal needs {n} diagonal entries")
        clean = []
        for e in diag:
            if e.get("form") not in DIAGONAL_FORMS:
                raise ConfigError(f"unknown diagonal form {e.get('form')!r}")
            coord = int(e.get("coord", 0))
            if not 0 <= coord < n:
                raise ConfigError(f"diagonal coord {coord} out of range")
            scale = float(e.get("scale", 1.0))
            if e["form"] in ("constant", "one_plus_square") and scale <= 0:
                raise ConfigError(f"{e['form']} needs a positive scale")
            clean.append({"form": e["form"], "coord": coord, "scale": scale})
        return {"diagonal": clean}
    if family == "randers":
        a = np.asarray(p["a"], dtype=float)
        b = np.asarray(p["b"], dtype=float)
        B = np.asarray(p["b_slope"], dtype=float)
        if a.shape != (n, n) or b.shape != (n,) or B.shape != (n, n):
            raise ConfigError("randers parameters have the wrong shape")
        if not np.allclose(a, a.T, atol=1e-14):
            raise ConfigError("randers matrix a must be symmetric")
        if np.linalg.eigvalsh(a).min() <= 0:
            raise ConfigError("randers matrix a must be positive definite")
        ainv = np.linalg.inv(a)
        if b @ ainv @ b >= 1.0:
            raise ConfigError("randers covector must satisfy |b|_a < 1")
        # the one-form must stay admissible on the whole sampling box
        worst = np.sqrt(np.linalg.eigvalsh(ainv).max())
        reach = np.abs(B).sum(axis=1)
        if np.sqrt(b @ ainv @ b) + worst * np.linalg.norm(reach) >= 1.0:
            raise ConfigError("randers b + b_slope x leaves |b|_a < 1 on the unit box")
        return {"a": a.tolist(), "b": b.tolist(), "b_slope": B.tolist()}
    return dict(p)


# ---------------------------------------------------------------------------
# first-layer tensors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FundamentalTensor:
    g: np.ndarray
    g_inv: np.ndarray


@dataclass(frozen=True)
class CartanTensorComponents:
    """Fully covariant Cartan tensor C_ijk = 1/2 dg_ij/dy^k."""

    C: np.ndarray


def finsler_value(spec: MetricSpec, u: TangentPoint) -> float:
    spec.check_domain(u)
    return float(spec.finsler_function(u.xa, u.ya))


def energy(spec: MetricSpec, u: TangentPoint) -> float:
    spec.check_domain(u)
    return float(spec.energy_function(u.xa, u.ya))


def energy_jet(spec: MetricSpec, u: TangentPoint, order: int = 4) -> Jet:
    spec.check_domain(u)
    return evaluate_jet(spec.energy_function, u, order)


def _g_from_jet(E: Jet, n: int) -> np.ndarray:
    hess = E.grad().grad().value
    return hess[n:, n:]


def fundamental_tensor(spec: MetricSpec, u: TangentPoint) -> FundamentalTensor:
    """g_ij = d^2 E / dy^i dy^j; raises RegularityError if not positive definite."""
    g = _g_from_jet(energy_jet(spec, u, 2), u.n)
    g = 0.5 * (g + g.T)
    eig = np.linalg.eigvalsh(g)
    if eig[0] <= PD_RATIO * abs(eig[-1]):
        raise RegularityError(f"fundamental tensor is not positive definite at {u}")
    return FundamentalTensor(g, np.linalg.inv(g))


def cartan_tensor(spec: MetricSpec, u: TangentPoint) -> CartanTensorComponents:
    E = energy_jet(spec, u, 3)
    n = u.n
    third = E.grad().grad().grad().value
    return CartanTensorComponents(0.5 * third[n:, n:, n:])


def check_regularity(spec: MetricSpec, u: TangentPoint) -> InvariantReport:
    """Positive definiteness, homogeneity, y^T g y = L^2 and symmetry of g at u."""
    report = InvariantReport(metadata={"metric": spec.to_dict()})
    try:
        spec.check_domain(u)
    except DomainError:
        report.add("regularity.domain", np.inf, 0.0)
        return report
    report.add("regularity.domain", 0.0, 0.0)
    E = energy_jet(spec, u, 2)
    g_raw = _g_from_jet(E, u.n)
    eig = np.linalg.eigvalsh(0.5 * (g_raw + g_raw.T))
    # residual is the shortfall of the eigenvalue ratio below the PD threshold
    ratio = eig[0] / max(abs(eig[-1]), 1e-300)
    report.add("regularity.positive_definite", max(0.0, PD_RATIO - ratio), 0.0)
    L = spec.finsler_function(u.xa, u.ya)
    hom = max(
        abs(spec.finsler_function(u.xa, lam * u.ya) - lam * L) / abs(lam * L)
        for lam in HOMOGENEITY_FACTORS
    )
    report.add("regularity.homogeneity", hom, 1e-10)
    y = u.ya
    report.add("regularity.norm_identity", abs(y @ g_raw @ y - L * L) / (L * L), 1e-10)
    report.add("regularity.symmetry", np.abs(g_raw - g_raw.T).max(), 1e-12)
    return report


def sample_points(spec: MetricSpec, count: int, seed: int = 0, max_tries: int = 100):
    """Seeded admissible sample points.

    x is uniform in the family's box, y uniform on a sphere with radius uniform
    in [0.5, 2]; points failing :func:`check_regularity` are redrawn.
    """
    rng = np.random.default_rng(seed)
    box = spec.sample_box()
    n = spec.dimension
    points = []
    tries = 0
    while len(points) < count:
        tries += 1
        if tries > max_tries * max(count, 1):
            break
        x = rng.uniform(box[:, 0], box[:, 1])
        d = rng.normal(size=n)
        d /= np.linalg.norm(d)
        y = rng.uniform(0.5, 2.0) * d
        u = TangentPoint(x, y)
        if check_regularity(spec, u).passed:
            points.append(u)
    return points


def metric_scalar_fields(spec: MetricSpec) -> dict[str, object]:
    """Named scalar fields derived from L, for oracle comparisons."""
    return {"L": spec.finsler_function, "E": spec.energy_function}


__all__ = [
    "FAMILIES",
    "MetricSpec",
    "FundamentalTensor",
    "CartanTensorComponents",
    "finsler_value",
    "energy",
    "energy_jet",
    "fundamental_tensor",
    "cartan_tensor",
    "check_regularity",
    "sample_points",
    "value_of",
]
