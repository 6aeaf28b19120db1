"""Averaging curvature over the unit sphere of directions.

The mean of each Ricci form is a scalar curvature over n, the mean of H
is (u + v) / (n(n+1)).  Monte-Carlo estimates converge at the usual
1/sqrt(N) rate.
"""
import numpy as np

from chernlab import MixedCurvatureParams, geometry_at, zoo_metric
from chernlab.verify import average_closed_forms, sphere_samples

e = zoo_metric("hopf", 3)
p = e.sample_points(1, seed=2)[0]
G = geometry_at(e.spec, p)
exact = average_closed_forms(G.ricci.u, G.ricci.v, 3, MixedCurvatureParams(3, 2.0, 1.0))

print("   N        mean H        exact       stderr")
for N in (1_000, 10_000, 100_000, 1_000_000):
    h = sphere_samples(G, N, seed=0)["H"]
    print(f"{N:8d}  {h.mean():.8f}  {exact['H']:.8f}  {h.std(ddof=1) / np.sqrt(N):.2e}")

vals = sphere_samples(G, 200_000, seed=1)
C = 2.0 * vals["ric3"] + vals["H"]
print(f"\nC^(3)_(2,1): estimate {C.mean():.5f}, closed form {exact['C']:.5f}")
