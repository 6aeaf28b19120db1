"""Curvature of exp(2F) g two ways.

Computing the curvature of the rescaled metric directly should agree with
the transformation rule in terms of g and the complex Hessian of F.  The
scalar curvatures pick up multiples of the Laplacian of F; fitting the
multipliers recovers them numerically.
"""
from chernlab import expr as ex
from chernlab import zoo_metric
from chernlab.verify import conformal_formula_check

F = ex.parse_expression("log(1 + z1*zb1) + 0.2*(z1*zb2 + z2*zb1)", 2)
for name in ("flat", "hopf", "product_case2"):
    e = zoo_metric(name, 2)
    for r in conformal_formula_check(e.spec, F, e.sample_points(20, seed=1)):
        fitted = {k: round(v, 10) for k, v in r.notes.items() if k.startswith("fitted")}
        print(f"{name:14s} {r.identity:30s} residual {r.max_residual:.1e}  {fitted}")
