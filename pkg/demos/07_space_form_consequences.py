"""What constant mixed curvature forces.

On Fubini-Study the k=2 mixed curvature with alpha = beta = 1 is constant.
The polarised tensor identity, the trace identity and the unitary-frame
identities then hold at every point; with a wrong constant they fail.
"""
from chernlab import MixedCurvatureParams, zoo_metric
from chernlab.verify import constancy_scan, constant_curvature_consequences

fs = zoo_metric("fubini_study", 2)
params = MixedCurvatureParams(2, 1.0, 1.0)
c = constancy_scan(fs.spec, params, 30, 30, 0, fs.sampler).mean
pts = fs.sample_points(10, seed=3)
for const in (c, c + 0.1):
    print(f"c = {const:.6f}")
    for r in constant_curvature_consequences(fs.spec, params, const, pts):
        print(f"   {r.identity:30s} {r.max_residual:.1e}  {r.verdict}")
