"""Canonical spray, Barthel connection and the frame maps at a point.

Vectors on the slit tangent bundle are arrays of length 2n (d/dx block first,
then d/dy); pi-vectors are arrays of length n.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import local_geometry
from .invariants import InvariantReport
from .jets import Jet, TangentPoint, bracket_values, pairwise
from .metrics import MetricSpec

SCALE_FACTORS = (0.5, 2.0)


@dataclass(frozen=True)
class SprayAtPoint:
    """Coefficients G^i of the spray y^i d/dx^i - 2 G^i d/dy^i."""

    Gcoef: np.ndarray

    def field(self, y) -> np.ndarray:
        return np.concatenate([np.asarray(y, dtype=float), -2.0 * self.Gcoef])


@dataclass(frozen=True)
class NonlinearConnectionAtPoint:
    N: np.ndarray


@dataclass(frozen=True)
class FrameMaps:
    """Horizontal/vertical frames and the bundle maps as matrices.

    rho (n x 2n), gamma (2n x n), beta (2n x n), K (n x 2n), h and v (2n x 2n).
    Rows of ``delta`` and ``vert`` are the frame vectors.
    """

    delta: np.ndarray
    vert: np.ndarray
    rho: np.ndarray
    gamma: np.ndarray
    beta: np.ndarray
    K: np.ndarray
    h: np.ndarray
    v: np.ndarray

    @property
    def J(self) -> np.ndarray:
        return self.gamma @ self.rho

    @property
    def Gamma(self) -> np.ndarray:
        return 2.0 * self.h - np.eye(self.h.shape[0])


def poincare_two_form(spec: MetricSpec, u: TangentPoint) -> np.ndarray:
    """Matrix omega[A, B] = Omega(e_A, e_B) of Omega = dd_J E."""
    geo = local_geometry(spec, u, 2)
    geo.omega_lu  # condition gate
    return geo.omega.value


def canonical_spray(spec: MetricSpec, u: TangentPoint) -> SprayAtPoint:
    return SprayAtPoint(local_geometry(spec, u, 3).G.value)


def barthel_coefficients(spec: MetricSpec, u: TangentPoint) -> NonlinearConnectionAtPoint:
    return NonlinearConnectionAtPoint(local_geometry(spec, u, 3).N.value)


def maps_from_N(N: np.ndarray) -> FrameMaps:
    n = N.shape[0]
    eye, zero = np.eye(n), np.zeros((n, n))
    rho = np.hstack([eye, zero])
    gamma = np.vstack([zero, eye])
    beta = np.vstack([eye, -N])
    K = np.hstack([N, eye])
    return FrameMaps(
        delta=beta.T.copy(),
        vert=gamma.T.copy(),
        rho=rho,
        gamma=gamma,
        beta=beta,
        K=K,
        h=beta @ rho,
        v=gamma @ K,
    )


def frame_maps(spec: MetricSpec, u: TangentPoint) -> FrameMaps:
    return maps_from_N(barthel_coefficients(spec, u).N)


def _J(n: int) -> np.ndarray:
    J = np.zeros((2 * n, 2 * n))
    J[n:, :n] = np.eye(n)
    return J


def gamma_field(N: Jet) -> Jet:
    """Jet of the (1,1)-form Gamma = 2h - I as a matrix field [a, B]."""
    n = N.shape[0]
    d = 2 * n
    eye = np.eye(n)
    top = Jet.constant(np.hstack([eye, np.zeros((n, n))]), d, N.order)
    bottom = Jet(
        np.concatenate([(-2.0 * N).coeffs, Jet.constant(-eye, d, N.order).coeffs], axis=1),
        N.order,
        d,
    )
    return Jet(np.concatenate([top.coeffs, bottom.coeffs], axis=0), N.order, d)


def fn_bracket_J_Gamma(N: Jet) -> np.ndarray:
    """[J, Gamma](d_A, d_B) on all coordinate field pairs, shape [A, B, 2n].

    Uses [K, L](X, Y) = [KX, LY] + [LX, KY] - K[LX, Y] - K[X, LY]
    - L[KX, Y] - L[X, KY] for commuting X, Y; the last two terms vanish since
    J maps coordinate fields to constant fields.
    """
    n = N.shape[0]
    d = 2 * n
    J = _J(n)
    cols = gamma_field(N).T  # cols[B] = Gamma(d_B)
    Jc = Jet.constant(J.T, d, 1)  # Jc[A] = J(d_A)
    E = Jet.constant(np.eye(d), d, 1)
    out = bracket_values(*pairwise(Jc, cols)) + bracket_values(*pairwise(cols, Jc))
    out -= bracket_values(*pairwise(cols, E)) @ J.T
    out -= bracket_values(*pairwise(E, cols)) @ J.T
    return out


def gamma_from_spray(Z: Jet) -> np.ndarray:
    """Matrix of [J, S] for the spray field S (column A = [J, S](d_A))."""
    d = Z.shape[0]
    J = _J(d // 2)
    S = Jet(np.broadcast_to(Z.coeffs, (d,) + Z.coeffs.shape).copy(), Z.order, Z.nvars)
    Jc = Jet.constant(J.T, d, 1)
    E = Jet.constant(np.eye(d), d, 1)
    cols = bracket_values(Jc, S) - bracket_values(E, S) @ J.T
    return cols.T


def _relative(a, b, scale) -> float:
    return float(np.abs(np.asarray(a) - np.asarray(b)).max() / max(1.0, scale))


def check_barthel(spec: MetricSpec, u: TangentPoint) -> InvariantReport:
    """Barthel connection and canonical spray proof obligations at u."""
    rep = InvariantReport(metadata={"metric": spec.to_dict()})
    geo = local_geometry(spec, u)
    n = u.n
    y = u.ya
    G = geo.G.value
    N = geo.N.value

    base_err = np.abs(geo.spray_field.value[:n] - y).max()
    rep.add("barthel.semispray", base_err / max(1.0, np.abs(y).max()), 1e-9)

    hom_N = hom_G = 0.0
    for lam in SCALE_FACTORS:
        other = local_geometry(spec, u.scaled(lam), 3)
        hom_N = max(hom_N, _relative(other.N.value, lam * N, np.abs(lam * N).max()))
        hom_G = max(hom_G, _relative(other.G.value, lam**2 * G, np.abs(lam**2 * G).max()))
    rep.add("barthel.homogeneity", hom_N, 1e-8)
    rep.add("barthel.spray_homogeneity", hom_G, 1e-8)

    dE = geo.dE.value
    E = float(geo.E.value)
    conservative = dE[:n] - N.T @ dE[n:]
    rep.add("barthel.conservativity", np.abs(conservative).max() / max(1.0, abs(E)), 1e-9)

    dN = geo.N.grad().value[:, :, n:]  # [i, j, k] = dN^i_j / dy^k
    rep.add("barthel.weak_torsion", np.abs(dN - dN.transpose(0, 2, 1)).max(), 1e-8)

    fn = fn_bracket_J_Gamma(geo.N)
    rep.add("barthel.fn_bracket", np.abs(fn).max(), 1e-7)

    # the four expressions of Gamma, with beta and K taken from the Cartan connection
    lam = geo.cartan_coordinate_coefficients.value
    Kc = np.hstack([np.einsum("j,ija->ia", y, lam[:, :, :n]), np.eye(n) + np.einsum("j,ija->ia", y, lam[:, :, n:])])
    beta_c = np.vstack([np.eye(n), -np.linalg.solve(Kc[:, n:], Kc[:, :n])])
    maps = maps_from_N(N)
    eye = np.eye(2 * n)
    forms = [
        2.0 * beta_c @ maps.rho - eye,
        eye - 2.0 * maps.gamma @ Kc,
        beta_c @ maps.rho - maps.gamma @ Kc,
        gamma_from_spray(geo.spray_field),
    ]
    spread = max(np.abs(a - b).max() for a in forms for b in forms)
    rep.add("barthel.gamma_expressions", spread, 1e-9)
    rep.add("barthel.gamma_barthel", np.abs(forms[0] - maps.Gamma).max(), 1e-8)

    induced = np.einsum("ijk,j->ik", geo.cartan_F.value, y)
    rep.add("barthel.cartan_deflection", np.abs(induced - N).max(), 1e-8)

    trivial = np.concatenate([y, np.zeros(n)])
    rep.add("barthel.spray_coincidence", np.abs(maps.h @ trivial - SprayAtPoint(G).field(y)).max(), 1e-8)
    return rep


__all__ = [
    "SprayAtPoint",
    "NonlinearConnectionAtPoint",
    "FrameMaps",
    "poincare_two_form",
    "canonical_spray",
    "barthel_coefficients",
    "frame_maps",
    "maps_from_N",
    "fn_bracket_J_Gamma",
    "gamma_from_spray",
    "check_barthel",
]
