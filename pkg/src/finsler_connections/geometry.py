"""Jet pipeline at one point of the slit tangent bundle.

Everything is derived from a single order-4 jet of the energy E = L^2/2:

    E (4) -> g, Omega (2) -> spray G (2) -> Barthel N (1) -> Cartan F, V (1)
          -> Berwald coefficients (0)

The numbers in parentheses are the jet orders that survive, which is exactly
enough for one further derivative of every connection coefficient (curvature,
covariant derivatives of the Cartan tensor).
"""

from __future__ import annotations

from functools import cached_property, lru_cache

import numpy as np
import scipy.linalg

from .errors import DegeneracyError, InternalInconsistencyError, RegularityError
from .jets import Jet, TangentPoint, bracket_values, evaluate_jet, pairwise, jeinsum, jet_inv, jet_solve
from .metrics import PD_RATIO, MetricSpec

OMEGA_MAX_CONDITION = 1e12
SEMISPRAY_TOL = 1e-9


def _block(rows: list[list[Jet]]) -> Jet:
    first = rows[0][0]
    coeffs = np.concatenate(
        [np.concatenate([b.coeffs for b in row], axis=1) for row in rows], axis=0
    )
    return Jet(coeffs, first.order, first.nvars)


class LocalGeometry:
    """Lazily evaluated jets of every pipeline quantity at ``u``.

    ``order`` is the order of the energy jet; 4 gives everything, 3 is enough
    for values of the spray and of N.
    """

    def __init__(self, spec: MetricSpec, u: TangentPoint, order: int = 4):
        spec.check_domain(u)
        self.spec = spec
        self.u = u
        self.n = u.n
        self.order = order

    # -- energy and metric ----------------------------------------------------

    @cached_property
    def E(self) -> Jet:
        return evaluate_jet(self.spec.energy_function, self.u, self.order)

    @cached_property
    def L(self) -> Jet:
        return evaluate_jet(self.spec.finsler_function, self.u, min(self.order, 2))

    @cached_property
    def dE(self) -> Jet:
        return self.E.grad()

    @cached_property
    def hessian(self) -> Jet:
        """hessian[A, B] = d_B d_A E over all 2n coordinates."""
        return self.dE.grad()

    @cached_property
    def g(self) -> Jet:
        n = self.n
        g = self.hessian[n:, n:]
        g = 0.5 * (g + g.T)
        eig = np.linalg.eigvalsh(g.value)
        if eig[0] <= PD_RATIO * abs(eig[-1]):
            raise RegularityError(f"fundamental tensor is not positive definite at {self.u}")
        return g

    @cached_property
    def g_inv(self) -> Jet:
        return jet_inv(self.g)

    @cached_property
    def dg(self) -> Jet:
        """dg[k, l, A] = d_A g_kl."""
        return self.g.grad()

    @cached_property
    def C(self) -> Jet:
        """Lowered Cartan tensor C_ijk = 1/2 d g_ij / dy^k."""
        return 0.5 * self.dg[:, :, self.n :]

    # -- symplectic form and spray --------------------------------------------

    @cached_property
    def omega(self) -> Jet:
        """omega[A, B] = Omega(e_A, e_B) in the basis (d/dx, d/dy)."""
        n = self.n
        self.g  # regularity gate first
        exy = self.hessian[:n, n:]  # exy[a, b] = d^2 E / dx^a dy^b
        g = self.hessian[n:, n:]
        zero = 0.0 * g
        return _block([[exy - exy.T, -g], [g, zero]])

    @cached_property
    def omega_lu(self):
        om = self.omega.value
        cond = np.linalg.cond(om)
        if not np.isfinite(cond) or cond > OMEGA_MAX_CONDITION:
            raise DegeneracyError(f"Omega is singular at {self.u} (condition {cond:.3e})")
        return scipy.linalg.lu_factor(om.T)

    @cached_property
    def spray_field(self) -> Jet:
        """Jet of the spray vector field solving i_G Omega = -dE."""
        rhs = -self.dE.truncate(self.omega.order)
        Z = jet_solve(self.omega.T, rhs, lu=self.omega_lu)
        y = self.u.ya
        err = np.abs(Z.value[: self.n] - y).max()
        if err > SEMISPRAY_TOL * max(1.0, np.abs(y).max()):
            raise InternalInconsistencyError(
                f"solved spray is not a semispray (base residual {err:.3e})"
            )
        return Z

    @cached_property
    def G(self) -> Jet:
        """Spray coefficients G^i; the spray is y^i d/dx^i - 2 G^i d/dy^i."""
        return -0.5 * self.spray_field[self.n :]

    @cached_property
    def N(self) -> Jet:
        """Barthel coefficients N^i_j = dG^i/dy^j."""
        return self.G.grad()[:, self.n :]

    # -- frames ---------------------------------------------------------------

    @cached_property
    def delta(self) -> Jet:
        """delta[j, A]: components of the horizontal frame d/dx^j - N^i_j d/dy^i."""
        n = self.n
        N = self.N
        eye = Jet.constant(np.eye(n), 2 * n, N.order)
        return Jet(np.concatenate([eye.coeffs, (-N.T).coeffs], axis=1), N.order, 2 * n)

    @cached_property
    def vert(self) -> Jet:
        n = self.n
        m = np.zeros((n, 2 * n))
        m[:, n:] = np.eye(n)
        return Jet.constant(m, 2 * n, self.N.order)

    @cached_property
    def frame(self) -> Jet:
        """frame[A, B]: rows are delta_1..delta_n, d/dy^1..d/dy^n."""
        return Jet(
            np.concatenate([self.delta.coeffs, self.vert.coeffs], axis=0),
            self.N.order,
            2 * self.n,
        )

    @cached_property
    def frame_brackets(self) -> np.ndarray:
        """Coordinate components of [E_A, E_B] over the frame, shape [A, B, 2n]."""
        return bracket_values(*pairwise(self.frame, self.frame))

    def horizontal_derivative(self, f: Jet) -> Jet:
        """delta_j f with the derivative index appended last."""
        n = self.n
        df = f.grad()
        lead = "abcdefgh"[: f.ndim]
        return df[..., :n] - jeinsum(f"mj,{lead}m->{lead}j", self.N, df[..., n:])

    # -- connections ----------------------------------------------------------

    @cached_property
    def hg(self) -> Jet:
        """hg[k, l, j] = delta_j g_kl."""
        return self.horizontal_derivative(self.g)

    @cached_property
    def cartan_F(self) -> Jet:
        """F[i, j, k] with nabla_{delta_k} dbar_j = F^i_jk dbar_i (Koszul)."""
        hg = self.hg
        low = 0.5 * (
            hg.transpose(1, 0, 2) + hg.transpose(1, 2, 0) - hg.transpose(2, 0, 1)
        )
        return jeinsum("il,ljk->ijk", self.g_inv, low)

    @cached_property
    def cartan_V(self) -> Jet:
        """V[i, j, k] = g^il C_ljk with nabla_{d/dy^k} dbar_j = V^i_jk dbar_i."""
        return jeinsum("il,ljk->ijk", self.g_inv, self.C)

    @cached_property
    def berwald_F(self) -> np.ndarray:
        """Berwald horizontal coefficients dN^i_k/dy^j, indexed [i, j, k]."""
        dN = self.N.grad().value[:, :, self.n :]  # [i, k, j]
        return dN.transpose(0, 2, 1)

    @cached_property
    def cartan_frame_coefficients(self) -> Jet:
        """gamma[i, j, A]: nabla_{E_A} dbar_j = gamma^i_jA dbar_i over the frame."""
        F, V = self.cartan_F, self.cartan_V
        order = min(F.order, V.order)
        return Jet(
            np.concatenate([F.truncate(order).coeffs, V.truncate(order).coeffs], axis=2),
            order,
            2 * self.n,
        )

    @cached_property
    def cartan_coordinate_coefficients(self) -> Jet:
        """lam[i, j, B]: nabla_{d/dz^B} dbar_j over the coordinate fields.

        d/dx^b = delta_b + N^m_b d/dy^m, so lam_x = F + N V.
        """
        F, V = self.cartan_F, self.cartan_V
        lx = F + jeinsum("mb,ijm->ijb", self.N, V)
        return Jet(np.concatenate([lx.coeffs, V.coeffs], axis=2), lx.order, 2 * self.n)


@lru_cache(maxsize=128)
def local_geometry(spec: MetricSpec, u: TangentPoint, order: int = 4) -> LocalGeometry:
    return LocalGeometry(spec, u, order)


PIPELINE_JETS = ("L", "dE", "g", "C", "G", "N", "cartan_F", "cartan_V")


def pipeline_fd_discrepancy(spec: MetricSpec, u: TangentPoint, step: float = 1e-5) -> dict[str, float]:
    """Relative gap between each pipeline jet and central differences of its values.

    Every partial of degree k >= 1 of a derived jet is compared with a central
    difference of the degree k-1 partial evaluated by the pipeline at
    u +- h e_A, Richardson-extrapolated over h = step and step / 2 so that
    points close to a singular locus do not swamp the oracle with O(h^2)
    truncation error.  Errors are relative to max(1, |partial|).
    """
    d = 2 * u.n
    here = local_geometry(spec, u)
    steps = (step, step / 2)
    shifted = []
    for A in range(d):
        e = np.zeros(d)
        e[A] = 1.0
        shifted.append([(LocalGeometry(spec, u.shifted(h * e)), LocalGeometry(spec, u.shifted(-h * e))) for h in steps])
    out = {}
    for name in PIPELINE_JETS:
        jet = getattr(here, name)
        worst = 0.0
        exact = jet
        lower = [lambda geo: getattr(geo, name)]
        for k in range(1, jet.order + 1):
            exact = exact.grad()  # degree-k partials, derivative axes appended
            prev = lower[-1]
            for A in range(d):
                coarse, fine = (
                    (prev(plus).value - prev(minus).value) / (2 * h) for h, (plus, minus) in zip(steps, shifted[A])
                )
                est = (4 * fine - coarse) / 3
                ex = exact.value[..., A]
                worst = max(worst, float((np.abs(ex - est) / np.maximum(1.0, np.abs(ex))).max()))
            lower.append(lambda geo, f=prev: f(geo).grad())
        out[name] = worst
    return out
