"""Curvature of the Cartan connection: R, P, S and the contracted torsions.

The curvature operator keeps the sign

    K(X, Y) Z = -nabla_X nabla_Y Z + nabla_Y nabla_X Z + nabla_[X, Y] Z,

the negative of the usual Riemann operator.  Lowered arrays are
``R[a, b, c, d] = g(R(dbar_a, dbar_b) dbar_c, dbar_d)`` and likewise for P, S.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .connections import frame_torsion, landsberg_tensor
from .errors import InternalInconsistencyError
from .geometry import LocalGeometry, local_geometry
from .invariants import InvariantReport
from .jets import TangentPoint
from .metrics import MetricSpec

# Classical Riemann tensor = CURVATURE_SIGN * (curvature computed here).
CURVATURE_SIGN = -1.0
DECOMPOSITION_TOL = 1e-9
HORIZONTAL_BRACKET_TOL = 1e-9


@dataclass(frozen=True)
class CurvatureBundleAtPoint:
    """Lowered R, P, S (n^4 each) and mixed Rhat, Phat, Shat ([i, a, b])."""

    R: np.ndarray
    P: np.ndarray
    S: np.ndarray
    Rhat: np.ndarray
    Phat: np.ndarray
    Shat: np.ndarray


def _frame_derivative(geo: LocalGeometry, jet) -> np.ndarray:
    """E_A(f) for every frame vector, appended as the last index."""
    return np.einsum("AB,...B->...A", geo.frame.value, jet.grad().value)


def bracket_structure(geo: LocalGeometry) -> np.ndarray:
    """c[A, B, C] with [E_A, E_B] = c^C_AB E_C, from solving the frame system."""
    E = geo.frame.value  # rows are frame vectors
    br = geo.frame_brackets  # [A, B, 2n]
    d = E.shape[0]
    c = np.linalg.solve(E.T, br.reshape(d * d, d).T).T.reshape(d, d, d)
    resid = np.abs(np.einsum("ABC,CD->ABD", c, E) - br).max()
    if resid > DECOMPOSITION_TOL:
        raise InternalInconsistencyError(
            f"frame decomposition of a bracket failed (residual {resid:.3e})"
        )
    return c


def curvature_operator(geo: LocalGeometry) -> np.ndarray:
    """K[i, j, A, B] = (K(E_A, E_B) dbar_j)^i over the frame."""
    gam_jet = geo.cartan_frame_coefficients
    gam = gam_jet.value  # [i, j, A]
    dgam = _frame_derivative(geo, gam_jet)  # [i, j, B, A] = E_A(gamma^i_jB)
    c = bracket_structure(geo)
    second = dgam + np.einsum("mjB,imA->ijBA", gam, gam)  # [i, j, B, A]: nabla_A nabla_B dbar_j
    return second - second.transpose(0, 1, 3, 2) + np.einsum("ABC,ijC->ijAB", c, gam)


def cartan_curvatures(spec: MetricSpec, u: TangentPoint) -> CurvatureBundleAtPoint:
    geo = local_geometry(spec, u)
    n = u.n
    K = curvature_operator(geo)
    g = geo.g.value
    y = u.ya
    blocks = {
        "R": K[:, :, :n, :n],
        "P": K[:, :, :n, n:],
        "S": K[:, :, n:, n:],
    }
    low = {k: np.einsum("di,icab->abcd", g, v) for k, v in blocks.items()}
    hat = {k: np.einsum("ijab,j->iab", v, y) for k, v in blocks.items()}
    return CurvatureBundleAtPoint(
        low["R"], low["P"], low["S"], hat["R"], hat["P"], hat["S"]
    )


def nonlinear_curvature(spec: MetricSpec, u: TangentPoint) -> np.ndarray:
    """Rhat[i, j, k] read off the vertical part of [delta_j, delta_k]."""
    geo = local_geometry(spec, u)
    n = u.n
    br = geo.frame_brackets[:n, :n]  # [j, k, 2n]
    horiz = np.abs(br[:, :, :n]).max()
    if horiz > HORIZONTAL_BRACKET_TOL:
        raise InternalInconsistencyError(
            f"[delta_j, delta_k] has a horizontal part of size {horiz:.3e}"
        )
    K = np.hstack([geo.N.value, np.eye(n)])
    return np.einsum("iA,jkA->ijk", K, br)


def _torsion_map(geo: LocalGeometry) -> np.ndarray:
    """T[i, a, b] = T(dbar_a, dbar_b)^i of the Cartan connection."""
    n = geo.n
    return frame_torsion(geo, "cartan")[:, n:, :n]


def bianchi_residual(geo: LocalGeometry) -> np.ndarray:
    """Cyclic sum of K(X, Y) rho Z + nabla_X (T(Y, Z)) over coordinate fields.

    Shape [i, A, B, C].  Coordinate fields commute, so no bracket terms occur.
    """
    n = geo.n
    d = 2 * n
    lam_jet = geo.cartan_coordinate_coefficients  # [i, j, B]
    lam = lam_jet.value
    dlam = lam_jet.grad().value  # [i, j, B, A] = d_A lam^i_jB
    rho = np.zeros((n, d))
    rho[:, :n] = np.eye(n)  # rho(d/dz^C) as columns

    # T(d_B, d_C) = nabla_B rho d_C - nabla_C rho d_B
    tb = np.einsum("ijB,jC->iBC", lam, rho)
    T = tb - tb.transpose(0, 2, 1)
    dtb = np.einsum("ijBA,jC->iBCA", dlam, rho)
    dT = dtb - dtb.transpose(0, 2, 1, 3)  # d_A T^i(B, C)
    nabT = dT + np.einsum("imA,mBC->iBCA", lam, T)  # [i, B, C, A]

    second = dlam + np.einsum("mjB,imA->ijBA", lam, lam)  # [i, j, B, A]
    Kc = second - second.transpose(0, 1, 3, 2)  # [i, j, A, B]
    KZ = np.einsum("ijAB,jC->iABC", Kc, rho)
    term = KZ + nabT.transpose(0, 3, 1, 2)  # [i, A, B, C]
    return term + term.transpose(0, 2, 3, 1) + term.transpose(0, 3, 1, 2)


def check_curvature_identities(spec: MetricSpec, u: TangentPoint) -> InvariantReport:
    rep = InvariantReport(metadata={"metric": spec.to_dict()})
    geo = local_geometry(spec, u)
    n = u.n
    y = u.ya
    curv = cartan_curvatures(spec, u)
    scale = max(1.0, np.abs(geo.g.value).max())

    for name in ("R", "P", "S"):
        A = getattr(curv, name)
        rep.add(f"curvature.antisymmetry_{name}", np.abs(A + A.transpose(0, 1, 3, 2)).max() / scale, 1e-7)
    rep.add("curvature.Shat", np.abs(curv.Shat).max(), 1e-8)

    P_def = landsberg_tensor(spec, u).Phat
    P_bw = geo.berwald_F - geo.cartan_F.value
    rep.add("curvature.Phat_contraction", np.abs(curv.Phat - P_def).max(), 1e-7)
    rep.add("curvature.Phat_bridge", np.abs(P_bw - P_def).max(), 1e-7)
    rep.add("curvature.Phat_three_way", np.abs(curv.Phat - P_bw).max(), 1e-7)
    rep.add("curvature.Phat_symmetry", np.abs(P_def - P_def.transpose(0, 2, 1)).max(), 1e-8)
    eta = max(
        np.abs(np.einsum("iab,b->ia", P_def, y)).max(),
        np.abs(np.einsum("iab,a->ib", P_def, y)).max(),
    )
    rep.add("curvature.Phat_eta", eta, 1e-8)

    T = _torsion_map(geo)
    S_mixed = curvature_operator(geo)[:, :, n:, n:]  # [i, z, x, y] = (S(x, y) z)^i
    TT = np.einsum("iam,mbz->izab", T, T)  # T(a, T(b, z))
    rep.add("curvature.S_composition", np.abs(S_mixed - (TT - TT.transpose(0, 1, 3, 2))).max(), 1e-7)

    rep.add("curvature.bianchi", np.abs(bianchi_residual(geo)).max(), 1e-6)
    rep.add("curvature.Rhat_bracket", np.abs(nonlinear_curvature(spec, u) - curv.Rhat).max(), 1e-7)
    rep.add("curvature.Rhat_antisymmetry", np.abs(curv.Rhat + curv.Rhat.transpose(0, 2, 1)).max(), 1e-7)
    return rep


__all__ = [
    "CURVATURE_SIGN",
    "CurvatureBundleAtPoint",
    "cartan_curvatures",
    "check_curvature_identities",
    "nonlinear_curvature",
    "curvature_operator",
    "bracket_structure",
    "bianchi_residual",
]
