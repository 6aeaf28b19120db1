"""Where is the mixed curvature alpha Ric^(k) + beta H constant?

Sample many points and directions and look at the spread.  On the Hopf
surface the first mixed curvature vanishes identically when 2 alpha + beta = 0
and nowhere else along the line alpha = 1.
"""
import numpy as np

from chernlab import MixedCurvatureParams, zoo_metric
from chernlab.verify import constancy_scan

hopf = zoo_metric("hopf", 2)
print(" beta    spread       mean")
for beta in np.linspace(-3, -1, 9):
    s = constancy_scan(hopf.spec, MixedCurvatureParams(1, 1.0, beta), 40, 40, 0, hopf.sampler)
    print(f"{beta:5.2f}  {s.spread:10.3e}  {s.mean:+.4f}")

# a Kahler-Einstein metric with constant holomorphic sectional curvature
fs = zoo_metric("fubini_study", 2)
s = constancy_scan(fs.spec, MixedCurvatureParams(2, 1.0, 1.0), 40, 40, 0, fs.sampler)
print(f"\nFubini-Study k=2 (1,1): mean {s.mean:.12f}, spread {s.spread:.1e}")

# product of a disk and a sphere: constant Ricci pieces, varying H
prod = zoo_metric("product_case2", 2)
s = constancy_scan(prod.spec, MixedCurvatureParams(2, 1.0, 1.0), 40, 40, 0, prod.sampler)
print(f"disk x sphere k=2 (1,1): range [{s.min:.3f}, {s.max:.3f}] -> {s.verdict}")
