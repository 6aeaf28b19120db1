"""Anti-self-dual Weyl components of Hermitian surfaces.

All zoo surfaces are self-dual.  A generic Hermitian metric is not, and the
vanishing does not depend on which unitary frame we use.
"""
import numpy as np

from chernlab import ChartPoint, MetricSpec, geometry_at, zoo_metric
from chernlab.hermitian import random_unitary
from chernlab.verify import self_duality_scan

for name in ("flat", "fubini_study", "complex_hyperbolic", "hopf", "product_case2"):
    e = zoo_metric(name, 2)
    s = self_duality_scan(e.spec, 100, 0, e.sampler)
    print(f"{name:20s} max|W-| = {s.max:.1e}")

generic = MetricSpec.from_strings(
    [["1 + z1*zb1 + 0.3*z2*zb2", "0.2*zb1*z2"], ["0.2*z1*zb2", "2 + z1*zb1*z2*zb2"]],
    name="generic",
)
G = geometry_at(generic, ChartPoint((0.3, -0.2j)))
rng = np.random.default_rng(0)
vals = [G.weyl_minus(G.frame() @ random_unitary(rng, 2)).max_abs for _ in range(5)]
print("\ngeneric metric, five random unitary frames:", np.round(vals, 6))
