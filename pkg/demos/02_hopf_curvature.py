"""Chern curvature of the standard Hopf metric g = delta_ij / |z|^2.

In the frame e_a = |z| d/dz^a the curvature has a simple closed form,
and the zoo carries it as an oracle.  The computed tensor should match it
exactly, and the metric is not Kahler: its torsion is nonzero.
"""
import numpy as np

from chernlab import geometry_at, zoo_metric

np.set_printoptions(precision=4, suppress=True)

for n in (2, 3):
    entry = zoo_metric("hopf", n)
    p = entry.sample_points(1, seed=0)[0]
    G = geometry_at(entry.spec, p)
    oracle = entry.oracle(p)
    diff = np.abs(G.frame_curvature(oracle.frame) - oracle.frame_curvature).max()
    print(f"n={n}  point {np.round(p.coords, 3)}")
    print(f"   u = {G.ricci.u:.12f}  (n^2 - n = {n * n - n})")
    print(f"   v = {G.ricci.v:.12f}  (n - 1 = {n - 1})")
    print(f"   |eta|^2 = {G.torsion.eta_norm_sq:.12f}")
    print(f"   max |R_frame - closed form| = {diff:.1e}")
    E = G.frame()
    print("   second Ricci in a unitary frame:\n", E.T @ G.ricci.ric2 @ E.conj())
