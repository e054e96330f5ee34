"""Cartan and Berwald connections on the pullback bundle, torsion, Landsberg tensor.

Coefficient convention (both connections):

    nabla_{delta_k} dbar_j = F[i, j, k] dbar_i,   nabla_{d/dy^k} dbar_j = V[i, j, k] dbar_i.

Index kinds of pi-tensors are strings over {"u", "l"}: contravariant (upper)
and covariant (lower) slots in storage order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InsufficientSamplesError, InternalInconsistencyError, RegularityError
from .geometry import LocalGeometry, local_geometry
from .invariants import InvariantReport
from .jets import Jet, TangentPoint, point_variables, stack
from .metrics import MetricSpec, check_regularity

KINDS = ("cartan", "berwald")
FRAME_RHO_TOL = 1e-9
CLASSIFY_RATIO = 1e-8
MIN_CLASSIFY_POINTS = 10


@dataclass(frozen=True)
class LinearConnectionAtPoint:
    kind: str
    F: np.ndarray
    V: np.ndarray
    N: np.ndarray


@dataclass(frozen=True)
class TorsionBundleAtPoint:
    """Q[i, j, k] = T(delta_j, delta_k)^i and T[i, j, k] = T(d/dy^j, delta_k)^i."""

    kind: str
    Q: np.ndarray
    T: np.ndarray


@dataclass(frozen=True)
class LandsbergTensor:
    """Phat[i, j, k] = Phat(dbar_j, dbar_k)^i and lowered[j, k, l] = g(Phat(dbar_j, dbar_k), dbar_l)."""

    Phat: np.ndarray
    lowered: np.ndarray


@dataclass(frozen=True)
class TensorAtPoint:
    components: np.ndarray
    kinds: str


def _connection_jets(geo: LocalGeometry, kind: str) -> tuple[Jet | np.ndarray, Jet | np.ndarray]:
    if kind == "cartan":
        return geo.cartan_F, geo.cartan_V
    if kind == "berwald":
        n = geo.n
        return geo.berwald_F, np.zeros((n, n, n))
    raise ValueError(f"unknown connection kind {kind!r}")


def cartan_connection(spec: MetricSpec, u: TangentPoint) -> LinearConnectionAtPoint:
    geo = local_geometry(spec, u)
    return LinearConnectionAtPoint("cartan", geo.cartan_F.value, geo.cartan_V.value, geo.N.value)


def berwald_connection(spec: MetricSpec, u: TangentPoint) -> LinearConnectionAtPoint:
    geo = local_geometry(spec, u)
    n = u.n
    return LinearConnectionAtPoint("berwald", geo.berwald_F, np.zeros((n, n, n)), geo.N.value)


def get_connection(spec: MetricSpec, u: TangentPoint, kind: str) -> LinearConnectionAtPoint:
    if kind == "cartan":
        return cartan_connection(spec, u)
    if kind == "berwald":
        return berwald_connection(spec, u)
    raise ValueError(f"unknown connection kind {kind!r}")


def _field_jet(W, u: TangentPoint) -> Jet:
    if isinstance(W, Jet):
        return W
    x, y = point_variables(u, 1)
    out = W(x, y)
    if isinstance(out, Jet):
        return out
    arr = np.asarray(out, dtype=object)
    flat = [c if isinstance(c, Jet) else Jet.constant(float(c), 2 * u.n, 1) for c in arr.ravel()]
    return stack(flat).reshape(arr.shape)


def _connection_terms(W: np.ndarray, coeffs: np.ndarray, kinds: str) -> np.ndarray:
    """sum over slots of +-coeffs contracted into W; coeffs[i, j, k] with k the direction."""
    out = np.zeros(W.shape + (coeffs.shape[2],))
    for p, kind in enumerate(kinds):
        Wp = np.moveaxis(W, p, -1)  # slot p last
        if kind == "u":
            term = np.einsum("ijk,...j->...ik", coeffs, Wp)
        elif kind == "l":
            term = -np.einsum("jik,...j->...ik", coeffs, Wp)
        else:
            raise ValueError(f"index kind must be 'u' or 'l', got {kind!r}")
        out += np.moveaxis(term, -2, p)
    return out


def covariant_derivative(
    spec: MetricSpec,
    u: TangentPoint,
    kind: str,
    W,
    kinds: str,
    direction: str | tuple[str, int] = "horizontal",
) -> TensorAtPoint:
    """Covariant derivative of a pi-tensor field W along the frame at u.

    ``W`` is a callable ``(x, y) -> components`` (run on jets) or a jet of
    order >= 1 expanded at u.  ``direction`` is "horizontal" / "vertical" (the
    direction index is appended last) or a pair like ("horizontal", k).
    """
    geo = local_geometry(spec, u)
    n = u.n
    Wj = _field_jet(W, u)
    if Wj.ndim != len(kinds):
        raise ValueError(f"kinds {kinds!r} do not match a tensor of rank {Wj.ndim}")
    F, V = _connection_jets(geo, kind)
    dW = Wj.grad().value
    if isinstance(direction, tuple):
        which, k = direction
    else:
        which, k = direction, None
    if which == "horizontal":
        frame_d = dW[..., :n] - np.einsum("mj,...m->...j", geo.N.value, dW[..., n:])
        coeffs = F.value if isinstance(F, Jet) else F
    elif which == "vertical":
        frame_d = dW[..., n:]
        coeffs = V.value if isinstance(V, Jet) else V
    else:
        raise ValueError(f"direction must be horizontal or vertical, got {which!r}")
    out = frame_d + _connection_terms(Wj.value, coeffs, kinds)
    if k is not None:
        out = out[..., k]
    return TensorAtPoint(out, kinds + ("l" if k is None else ""))


def _frame_coefficients(geo: LocalGeometry, kind: str) -> np.ndarray:
    """gamma[i, j, A]: nabla_{E_A} dbar_j over the frame (delta..., d/dy...)."""
    F, V = _connection_jets(geo, kind)
    F = F.value if isinstance(F, Jet) else F
    V = V.value if isinstance(V, Jet) else V
    return np.concatenate([F, V], axis=2)


def frame_brackets(geo: LocalGeometry) -> np.ndarray:
    """Coordinate components of [E_A, E_B] for the frame (delta..., d/dy...), shape [A, B, 2n]."""
    return geo.frame_brackets


def frame_torsion(geo: LocalGeometry, kind: str) -> np.ndarray:
    """T(E_A, E_B)^i = nabla_A rho E_B - nabla_B rho E_A - rho [E_A, E_B], shape [i, A, B]."""
    n = geo.n
    gam = _frame_coefficients(geo, kind)
    d = 2 * n
    # rho E_B = dbar_B for horizontal B, 0 for vertical B
    rhoE = np.zeros((d, n))
    rhoE[:n] = np.eye(n)
    nab = np.einsum("ijA,Bj->iAB", gam, rhoE)  # nabla_A rho E_B
    rho_br = frame_brackets(geo)[:, :, :n]
    return nab - nab.transpose(0, 2, 1) - rho_br.transpose(2, 0, 1)


def _assert_vertical_brackets(geo: LocalGeometry) -> float:
    rho = np.abs(frame_brackets(geo)[:, :, : geo.n]).max()
    if rho > FRAME_RHO_TOL:
        raise InternalInconsistencyError(
            f"frame brackets have a horizontal part of size {rho:.3e}"
        )
    return float(rho)


def torsion_tensors(spec: MetricSpec, u: TangentPoint, kind: str = "cartan") -> TorsionBundleAtPoint:
    geo = local_geometry(spec, u)
    _assert_vertical_brackets(geo)
    n = u.n
    full = frame_torsion(geo, kind)
    return TorsionBundleAtPoint(kind, full[:, :n, :n], full[:, n:, :n])


def landsberg_tensor(spec: MetricSpec, u: TangentPoint) -> LandsbergTensor:
    """Phat = nabla_{beta eta} T for the Cartan connection, beta eta = y^k delta_k."""
    geo = local_geometry(spec, u)
    T = geo.cartan_V.transpose(0, 2, 1)  # T[i, a, b] = V[i, b, a]
    dT = covariant_derivative(spec, u, "cartan", T, "ull").components
    Phat = np.einsum("iabk,k->iab", dT, u.ya)
    lowered = np.einsum("lm,mjk->jkl", geo.g.value, Phat)
    return LandsbergTensor(Phat, lowered)


def check_cartan(spec: MetricSpec, u: TangentPoint) -> InvariantReport:
    """Cartan axioms, Koszul reproduction and the deflection identity at u."""
    rep = InvariantReport(metadata={"metric": spec.to_dict()})
    geo = local_geometry(spec, u)
    n = u.n
    y = u.ya
    g = geo.g.value
    F, V = geo.cartan_F.value, geo.cartan_V.value
    scale = max(1.0, np.abs(g).max())

    h = covariant_derivative(spec, u, "cartan", geo.g, "ll", "horizontal").components
    v = covariant_derivative(spec, u, "cartan", geo.g, "ll", "vertical").components
    rep.add("cartan.metric_horizontal", np.abs(h).max() / scale, 1e-8)
    rep.add("cartan.metric_vertical", np.abs(v).max() / scale, 1e-8)

    tors = frame_torsion(geo, "cartan")
    rep.add("cartan.frame_rho", np.abs(frame_brackets(geo)[:, :, :n]).max(), FRAME_RHO_TOL)
    rep.add("cartan.Q", np.abs(tors[:, :n, :n]).max(), 1e-8)
    T = tors[:, n:, :n]  # T[i, j, k] = T(dbar_j, dbar_k)^i
    T_low = np.einsum("li,ijk->jkl", g, T)
    sym = max(
        np.abs(T_low - T_low.transpose(p)).max()
        for p in [(1, 0, 2), (0, 2, 1), (2, 1, 0)]
    )
    rep.add("cartan.T_symmetry", sym, 1e-8)
    rep.add("cartan.T_cartan_tensor", np.abs(T_low - geo.C.value).max(), 1e-8)
    ann = max(np.abs(np.einsum("ijk,k->ij", T, y)).max(), np.abs(np.einsum("ijk,j->ik", T, y)).max())
    rep.add("cartan.T_eta", ann, 1e-8)

    # Koszul: 2 g(nabla_{delta_j} dbar_k, dbar_l) from frame derivatives of g
    dg = geo.dg.value  # [k, l, A]
    frame_d = np.einsum("jA,klA->klj", geo.delta.value, dg)  # delta_j g_kl
    brackets = frame_brackets(geo)[:, :, :n]
    rho_hh = brackets[:n, :n]  # rho[delta_a, delta_b]
    gb = np.einsum("ma,bcm->abc", g, rho_hh)  # gb[a, b, c] = g(dbar_a, rho[delta_b, delta_c])
    d_ = frame_d.transpose(2, 0, 1)  # d_[j, k, l] = delta_j g_kl
    koszul = (
        d_
        + d_.transpose(2, 0, 1)  # delta_k g_lj
        - d_.transpose(1, 2, 0)  # delta_l g_jk
        - gb
        + gb.transpose(2, 0, 1)
        + gb.transpose(1, 2, 0)
    )
    lhs = 2.0 * np.einsum("il,ikj->jkl", g, F)
    rep.add("cartan.koszul", np.abs(lhs - koszul).max() / scale, 1e-8)

    rep.add("cartan.deflection", np.abs(np.einsum("ijk,j->ik", F, y) - geo.N.value).max(), 1e-8)
    rep.add("cartan.F_symmetry", np.abs(F - F.transpose(0, 2, 1)).max(), 1e-8)
    rep.add("cartan.V_symmetry", np.abs(V - V.transpose(0, 2, 1)).max(), 1e-8)
    return rep


def check_berwald(spec: MetricSpec, u: TangentPoint) -> InvariantReport:
    """Torsion-freeness, the bracket realization and horizontal constancy of L."""
    rep = InvariantReport(metadata={"metric": spec.to_dict()})
    geo = local_geometry(spec, u)
    n = u.n
    y = u.ya
    Fb = geo.berwald_F
    rep.add("berwald.torsion", np.abs(frame_torsion(geo, "berwald")).max(), 1e-9)
    # D°_{delta_k} dbar_j = K[delta_k, d/dy^j]; K = [N | I] on coordinate components
    br = frame_brackets(geo)
    K = np.hstack([geo.N.value, np.eye(n)])
    direct = np.einsum("im,kjm->ijk", K, br[:n, n:])
    rep.add("berwald.frame_bracket", np.abs(direct - Fb).max(), 1e-7)
    rep.add("berwald.deflection", np.abs(np.einsum("ijk,j->ik", Fb, y) - geo.N.value).max(), 1e-8)
    dL = geo.horizontal_derivative(geo.L).value
    rep.add("berwald.horizontal_L", np.abs(dL).max(), 1e-9)
    return rep


def berwald_cartan_bridge(spec: MetricSpec, u: TangentPoint) -> InvariantReport:
    """Berwald coefficients expressed through the Cartan connection."""
    rep = InvariantReport(metadata={"metric": spec.to_dict()})
    geo = local_geometry(spec, u)
    n = u.n
    Fc = geo.cartan_F.value
    Vc = geo.cartan_V.value
    Fb = geo.berwald_F
    P = landsberg_tensor(spec, u).Phat
    rep.add("bridge.horizontal", np.abs(Fb - Fc - P).max(), 1e-7)
    T = frame_torsion(geo, "cartan")[:, n:, :n]  # T[i, j, k]
    # vertical Berwald coefficients are 0 = V - T(., .) in matching slots
    rep.add("bridge.vertical", np.abs(0.0 - (Vc - T.transpose(0, 2, 1))).max(), 1e-10)
    br = frame_brackets(geo)
    K = np.hstack([geo.N.value, np.eye(n)])
    direct = np.einsum("im,kjm->ijk", K, br[:n, n:])
    rep.add("bridge.frame_bracket", np.abs(direct - Fb).max(), 1e-7)
    return rep


def _berwald_metricity(geo: LocalGeometry):
    """(D°_{d/dy^j} g)_kl and (D°_{delta_j} g)_kl, both as [j, k, l]."""
    n = geo.n
    g = geo.g.value
    Fb = geo.berwald_F
    vert = geo.dg.value[:, :, n:].transpose(2, 0, 1)
    hg = geo.hg.value.transpose(2, 0, 1)  # [j, k, l] = delta_j g_kl
    horiz = hg - np.einsum("mkj,ml->jkl", Fb, g) - np.einsum("mlj,km->jkl", Fb, g)
    return vert, horiz


def metricity_defects(spec: MetricSpec, u: TangentPoint) -> InvariantReport:
    rep = InvariantReport(metadata={"metric": spec.to_dict()})
    geo = local_geometry(spec, u)
    n = u.n
    y = u.ya
    vert, horiz = _berwald_metricity(geo)
    T = frame_torsion(geo, "cartan")[:, n:, :n]  # T[i, j, k] = T(dbar_j, dbar_k)^i
    rhs_a = 2.0 * np.einsum("ijk,il->jkl", T, geo.g.value)
    rep.add("metricity.vertical", np.abs(vert - rhs_a).max(), 1e-8)
    P_low = landsberg_tensor(spec, u).lowered
    rep.add("metricity.horizontal", np.abs(horiz + 2.0 * P_low).max(), 1e-8)
    rep.add("metricity.spray", np.abs(np.einsum("j,jkl->kl", y, horiz)).max(), 1e-8)
    rep.add("metricity.L", np.abs(geo.horizontal_derivative(geo.L).value).max(), 1e-8)
    return rep


def classify(spec: MetricSpec, points: Sequence[TangentPoint]) -> dict[str, bool]:
    """Riemannian / Landsberg verdicts from the Berwald metricity defects."""
    vmax = hmax = 0.0
    gmax = 0.0
    used = 0
    for u in points:
        if not check_regularity(spec, u).passed:
            continue
        try:
            geo = local_geometry(spec, u)
            vert, horiz = _berwald_metricity(geo)
        except RegularityError:
            continue
        used += 1
        vmax = max(vmax, np.abs(vert).max())
        hmax = max(hmax, np.abs(horiz).max())
        gmax = max(gmax, np.abs(geo.g.value).max())
    if used < MIN_CLASSIFY_POINTS:
        raise InsufficientSamplesError(
            f"classification needs {MIN_CLASSIFY_POINTS} admissible points, got {used}"
        )
    scale = max(1.0, gmax)
    return {
        "riemannian": bool(vmax < CLASSIFY_RATIO * scale),
        "landsberg": bool(hmax < CLASSIFY_RATIO * scale),
    }


__all__ = [
    "LinearConnectionAtPoint",
    "TorsionBundleAtPoint",
    "LandsbergTensor",
    "TensorAtPoint",
    "cartan_connection",
    "berwald_connection",
    "covariant_derivative",
    "torsion_tensors",
    "landsberg_tensor",
    "berwald_cartan_bridge",
    "metricity_defects",
    "classify",
    "check_cartan",
    "check_berwald",
    "frame_torsion",
    "frame_brackets",
]
