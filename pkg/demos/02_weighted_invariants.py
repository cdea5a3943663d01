"""Weighted curvature of smooth metric measure spaces.

A smooth metric measure space is (chart, g, f, m, mu).  Its weighted
invariants replace the dimension d by d+m and correct curvature by
derivatives of the density f.  Two exact identities make good smoke
tests: the trace identity tying the weighted scalar curvature to the
weighted Ricci tensor and the F-scalar, and the weighted Bianchi
identity.
"""

import numpy as np

from smmsgeom import invariants as inv
from smmsgeom.catalog import random_entry, round_sphere_space

# the unit round sphere: classical Schouten data P = g/2, J = 3/2
s = round_sphere_space(d=3, m=0.0, mu=0.0, f_expr="1")
P, J, Y = inv.schouten(s)
p = (0.1, -0.2, 0.15)
print("round 3-sphere: scalar curvature =", round(inv.scalar(s.g).value(p), 10))
print("  J =", round(J.value(p), 10), " P/g =",
      round(P.comp(0, 0).value(p) / s.g.comp(0, 0).value(p), 10))

# a seeded perturbed space with m = 1.7
s = random_entry(d=3, m=1.7, mu=0.3, seed=11).space
w = inv.weighted_invariants(s)
pts = s.sample(4, seed=2)
scale = inv.curvature_scale(s, pts)
print(f"\nperturbed space (m = {s.m}, mu = {s.mu}), curvature scale {scale:.3f}")

worst = 0.0
for p in pts:
    gm = np.linalg.inv(s.g.matrix_values(p))
    tr = float(np.trace(gm @ w.ricci_phi.matrix_values(p)))
    lhs = w.scalar_phi.value(p)
    rhs = tr - s.m / s.f.value(p) ** 2 * w.f_phi.value(p)
    worst = max(worst, abs(lhs - rhs))
print("trace identity residual:", worst)

worst = max(abs(r.value(p)) for p in pts for r in inv.bianchi_residual(s))
print("weighted Bianchi residual:", worst)

worst = max(inv.bach_asymmetry(s, p) for p in pts)
print("weighted Bach asymmetry:", worst)
