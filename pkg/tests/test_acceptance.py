"""Acceptance criteria 1-10, each at its stated tolerance.

Every test prints a single ``criterion N: PASS|FAIL`` line; the lines are
repeated in the terminal summary.
"""

import contextlib
import io
import os
import time

import numpy as np

from chernlab import expr as ex
from chernlab.cli import main
from chernlab.curvature import MixedCurvatureParams, conformal_metric, geometry_at, weyl_minus
from chernlab.verify import (
    DEFAULT_TOL,
    conformal_formula_check,
    constancy_scan,
    constant_curvature_consequences,
    perturb_component,
    self_duality_scan,
    sphere_average_check,
    sphere_samples,
    verify_oracle,
    verify_pointwise_identities,
    verify_tags,
)
from chernlab.zoo import ZOO_NAMES, zoo_metric


def by_name(reports):
    return {r.identity: r for r in reports}


def test_criterion_01_hopf_oracle(criterion):
    t0 = time.perf_counter()
    worst = {}
    for n in (2, 3, 4):
        e = zoo_metric("hopf", n)
        pts = e.sample_points(50, seed=n)
        radii = [np.linalg.norm(p.coords) for p in pts]
        assert 0.5 <= min(radii) and max(radii) <= 2
        for r in verify_oracle(e, pts):
            worst[r.identity] = max(worst.get(r.identity, 0.0), r.max_residual)
    elapsed = time.perf_counter() - t0
    ok = max(worst.values()) < 1e-8 and elapsed < 5
    criterion(1, ok, f"hopf n=2,3,4 x 50 pts: max residuals {', '.join(f'{k}={v:.1e}' for k, v in worst.items())}; {elapsed:.2f}s (<5s)")


def test_criterion_02_hopf_symmetrized_identity(criterion):
    res = {}
    for n in (2, 3):
        e = zoo_metric("hopf", n)
        res[n] = by_name(verify_pointwise_identities(e.spec, e.sample_points(50, seed=10 + n)))["hopf_symmetrized_identity"].max_residual
    criterion(2, max(res.values()) < 1e-8, f"symmetrized residual n=2: {res[2]:.1e}, n=3: {res[3]:.1e} (<1e-8)")


def test_criterion_03_mixed_curvature_vanishing(criterion):
    e = zoo_metric("hopf", 2)
    s = constancy_scan(e.spec, MixedCurvatureParams(1, 1.0, -2.0), 100, 100, 0, e.sampler)
    mean_abs = s.notes["mean_abs"]
    ok = s.samples == 10_000 and mean_abs < 1e-8 and s.spread < 1e-7
    criterion(3, ok, f"hopf C^(1)_(1,-2) over {s.samples} samples: mean|C|={mean_abs:.1e} (<1e-8), spread={s.spread:.1e} (<1e-7)")


def test_criterion_04_self_duality(criterion):
    t0 = time.perf_counter()
    maxes = {}
    for name in ("hopf", "fubini_study", "complex_hyperbolic", "flat", "product_case2"):
        e = zoo_metric(name, 2)
        maxes[name] = self_duality_scan(e.spec, 100, 0, e.sampler).max
    # product_case2 also from its canonical frame values -1, +1, zeros
    Rf = np.zeros((2, 2, 2, 2), dtype=complex)
    Rf[0, 0, 0, 0], Rf[1, 1, 1, 1] = -1, 1
    from_values = weyl_minus(Rf).max_abs
    prod = zoo_metric("product_case2", 2)
    frame_ok = by_name(verify_oracle(prod, prod.sample_points(100, 0)))["oracle_frame_curvature"].passed
    elapsed = time.perf_counter() - t0
    ok = max(maxes.values()) < 1e-7 and from_values == 0 and frame_ok and elapsed < 10
    detail = ", ".join(f"{k}={v:.1e}" for k, v in maxes.items())
    criterion(4, ok, f"max|W-| over 100 pts: {detail}; product frame values give {from_values}; {elapsed:.2f}s (<10s)")


def random_real_factor(rng, n):
    """Random real function built from terms t + conj(t) and |q|^2."""
    terms = []
    for _ in range(3):
        i, j = rng.integers(1, n + 1, size=2)
        c = complex(*np.round(rng.normal(0, 0.3, 2), 3))
        t = ex.mul(ex.Const(c), ex.mul(ex.z(i), ex.zb(j)) if rng.uniform() < 0.5 else ex.z(i))
        terms.append(ex.add(t, ex.conjugate_swap(t)))
    q = ex.add(ex.z(int(rng.integers(1, n + 1))), ex.Const(complex(*np.round(rng.normal(0, 0.5, 2), 3))))
    terms.append(ex.mul(ex.Const(round(rng.uniform(0.1, 0.5), 3)), ex.log(ex.add(ex.ONE, ex.mul(q, ex.conjugate_swap(q))))))
    F = terms[0]
    for t in terms[1:]:
        F = ex.add(F, t)
    return F


def test_criterion_05_conformal_law(criterion):
    rng = np.random.default_rng(5)
    worst, count = 0.0, 0
    for name in ZOO_NAMES:
        e = zoo_metric(name, 2)
        pts = e.sample_points(20, seed=5)
        for _ in range(5):
            F = random_real_factor(rng, 2)
            rep = conformal_formula_check(e.spec, F, pts)[0]
            assert rep.identity == "conformal_law" and rep.points == 20
            worst = max(worst, rep.max_residual)
            count += 1
    criterion(5, worst < 1e-8 and count == 25, f"{count} (metric, F) pairs x 20 pts: max componentwise residual {worst:.1e} (<1e-8)")


def test_criterion_06_average_trick(criterion):
    t0 = time.perf_counter()
    fs = zoo_metric("fubini_study", 2)
    hopf3, prod = zoo_metric("hopf", 3), zoo_metric("product_case2", 2)
    conformal_fs = conformal_metric(fs.spec, ex.parse_expression("log(1+z1*zb1)", 2), name="fubini_study-conformal")
    cases = [(hopf3.spec, hopf3), (prod.spec, prod), (conformal_fs, fs)]
    worst, checks = 0.0, 0
    for spec, entry in cases:
        for j, p in enumerate(entry.sample_points(3, seed=6)):
            for k in (1, 2, 3, 4):
                rep = sphere_average_check(spec, p, MixedCurvatureParams(k, 1.0, 1.0), 200_000, seed=100 * j + k)
                worst = max(worst, rep.max_residual)
                checks += 1
    # stderr scaling on a direction-dependent quantity of each metric
    var_ratios, se_ratios, literal = [], [], []
    for spec, entry in cases:
        G = geometry_at(spec, entry.sample_points(1, seed=6)[0])
        se = {}
        for N in (200_000, 400_000, 800_000):
            h = sphere_samples(G, N, seed=7)["H"]
            se[N] = h.std(ddof=1) / np.sqrt(N)
        var_ratios.append((se[400_000] / se[200_000]) ** 2)
        se_ratios.append(se[800_000] / se[200_000])
        literal.append(se[400_000] / se[200_000])
    elapsed = time.perf_counter() - t0
    conv = all(abs(r - 0.5) <= 0.1 for r in var_ratios + se_ratios)
    ok = worst < DEFAULT_TOL.mc_sigmas and checks == 36 and conv and elapsed < 60
    criterion(
        6,
        ok,
        f"{checks} MC checks at N=2e5: worst {worst:.2f} sigma (<4); stderr^2 ratio at 2N {min(var_ratios):.3f}-{max(var_ratios):.3f}, "
        f"stderr ratio at 4N {min(se_ratios):.3f}-{max(se_ratios):.3f} (0.5 +/- 20%), stderr ratio at 2N {np.mean(literal):.3f} (1/sqrt 2); {elapsed:.1f}s (<60s)",
    )


def test_criterion_07_surface_identity_and_kahler(criterion):
    surf = ricci = tors = 0.0
    for name in ZOO_NAMES:
        e = zoo_metric(name, 2)
        kahler = "kahler" in e.tags
        reps = by_name(verify_pointwise_identities(e.spec, e.sample_points(20, seed=7), kahler=kahler or None))
        surf = max(surf, reps["surface_ricci_identity"].max_residual)
        if kahler:
            ricci = max(ricci, reps["kahler_degeneracy"].max_residual)
            tors = max(tors, reps["torsion_vanishes"].max_residual)
    ok = surf < 1e-8 and ricci < 1e-8 and tors < 1e-10
    criterion(7, ok, f"surface identity {surf:.1e} (<1e-8); Kahler Ricci agreement {ricci:.1e} (<1e-8); torsion {tors:.1e} (<1e-10)")


def test_criterion_08_constant_curvature_consequences(criterion):
    e = zoo_metric("fubini_study", 2)
    params = MixedCurvatureParams(2, 1.0, 1.0)
    scan = constancy_scan(e.spec, params, 50, 20, 8, e.sampler)
    reps = by_name(constant_curvature_consequences(e.spec, params, scan.mean, e.sample_points(20, seed=8), n_frames=20, seed=8))
    pol = reps["polarized_constant_curvature"].max_residual
    comb = reps["weyl3_combination"].max_residual
    ok = scan.passed and pol < 1e-7 and comb < 1e-7
    criterion(8, ok, f"c={scan.mean:.12f}; polarized residual {pol:.1e} (<1e-7); frame combination in 20 unitary frames {comb:.1e} (<1e-7)")


def _suites_failing(entry, spec):
    """Names of criteria 1-8 style checks that reject ``spec`` as ``entry``."""
    pts = entry.sample_points(20, seed=9)
    kahler = True if "kahler" in entry.tags else None
    reps = verify_pointwise_identities(spec, pts, kahler=kahler, hopf=entry.name == "hopf")
    reps += verify_oracle(entry, pts, spec=spec)
    if all(r.identity != "metric_positive_definite" for r in reps):
        reps += verify_tags(entry, pts, spec=spec)
        if "constant_H" in entry.tags:
            reps.append(constancy_scan(spec, MixedCurvatureParams(2, 1.0, 1.0), 20, 20, 9, entry.sampler))
    return [getattr(r, "identity", None) or r.quantity for r in reps if not r.passed]


def test_criterion_09_negative_controls(criterion):
    missed, caught = [], {}
    for name in ZOO_NAMES:
        e = zoo_metric(name, 2)
        assert _suites_failing(e, e.spec) == [], name
        for i in range(2):
            for j in range(2):
                failing = _suites_failing(e, perturb_component(e.spec, i, j, 1e-3))
                if failing:
                    caught[(name, i, j)] = failing[0]
                else:
                    missed.append((name, i, j))
    ok = not missed and len(caught) == 20
    criterion(9, ok, f"{len(caught)}/20 single-component perturbations (eps=1e-3) rejected; unperturbed metrics pass; missed: {missed or 'none'}")


def _cli(argv):
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = main(argv)
    return code, buf.getvalue()


def test_criterion_10_determinism(criterion):
    many = str(max(8, 2 * (os.cpu_count() or 1)))
    commands = [
        ["scan", "hopf", "--k", "1", "--alpha", "1", "--beta", "-2", "--seed", "123"],
        ["scan", "product_case2", "--k", "3", "--alpha", "2", "--beta", "0.5", "--seed", "5"],
        ["scan", "fubini_study", "--self-dual", "--seed", "9"],
        ["scan", "hopf", "--classify", "--seed", "4"],
        ["verify", "hopf", "--n", "3", "--suite", "average", "--samples", "50000", "--seed", "2"],
    ]
    same = []
    for cmd in commands:
        runs = [_cli(cmd + ["--workers", w]) for w in ("1", "1", many)]
        same.append(all(r == runs[0] for r in runs) and runs[0][1].strip().startswith("{"))
    criterion(10, all(same), f"{sum(same)}/{len(commands)} commands byte-identical across two serial runs and a {many}-worker run")
