"""Walk a Randers metric through spray, Barthel, Cartan, Berwald and Landsberg.

    python demos/randers_landsberg.py

A Randers norm with a constant one-form is locally Minkowski, hence Landsberg.
Tilting the one-form with x (b_slope) makes the Berwald and Cartan horizontal
coefficients drift apart; their gap is the Landsberg tensor.
"""

import numpy as np

from finsler_connections import (
    MetricSpec,
    TangentPoint,
    barthel_coefficients,
    berwald_connection,
    canonical_spray,
    cartan_connection,
    classify,
    landsberg_tensor,
    sample_points,
)

np.set_printoptions(precision=5, suppress=True)

tilted = MetricSpec.create("randers", 2)
flat = MetricSpec.create("randers", 2, b_slope=[[0.0, 0.0], [0.0, 0.0]])
u = TangentPoint((0.2, -0.3), (0.7, 0.4))

print("metric:", tilted)
print("spray G   :", canonical_spray(tilted, u).Gcoef)
print("Barthel N :\n", barthel_coefficients(tilted, u).N)

Fc = cartan_connection(tilted, u).F
Fb = berwald_connection(tilted, u).F
P = landsberg_tensor(tilted, u).Phat
print("max |Berwald - Cartan - Phat| =", np.abs(Fb - Fc - P).max())
print("Phat[0] =\n", P[0])

for name, spec in (("tilted one-form", tilted), ("constant one-form", flat)):
    print(f"{name:18s} ->", classify(spec, sample_points(spec, 10, seed=0)))
