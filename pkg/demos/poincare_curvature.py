"""Curvature sign conventions on the Poincare half-plane.

    python demos/poincare_curvature.py

The library keeps the curvature operator K(X,Y) = -[nabla_X, nabla_Y] + nabla_[X,Y],
the negative of the usual Riemann operator, so the normalized lowered
component reads +1 where the classical sectional curvature is -1.
"""

from finsler_connections import (
    CURVATURE_SIGN,
    MetricSpec,
    cartan_curvatures,
    fundamental_tensor,
    nonlinear_curvature,
    sample_points,
)

spec = MetricSpec.create("poincare_half_plane", 2)
for u in sample_points(spec, 4, seed=2):
    R = cartan_curvatures(spec, u).R
    g = fundamental_tensor(spec, u).g
    k = R[0, 1, 1, 0] / (g[0, 0] * g[1, 1] - g[0, 1] ** 2)
    Rhat = nonlinear_curvature(spec, u)
    print(f"x={u.xa.round(3)} computed={k:+.12f} classical={CURVATURE_SIGN * k:+.12f} |Rhat|={abs(Rhat).max():.3f}")
