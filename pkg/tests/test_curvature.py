import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chernlab import expr as ex
from chernlab.curvature import (
    FunctionHessian,
    MetricSpec,
    MixedCurvatureParams,
    conformal_curvature_prediction,
    conformal_metric,
    frame_curvature,
    geometry_at,
    metric_jet,
    weyl_minus,
)
from chernlab.expr import ChartPoint
from chernlab.hermitian import SingularMetricError, random_unitary
from chernlab.zoo import zoo_metric
from fd_oracle import fd_curvature


def P(*coords):
    return ChartPoint(tuple(complex(c) for c in coords))


# a generic non-Kahler metric, positive definite near the origin
GENERIC = MetricSpec.from_strings(
    [
        ["1 + z1*zb1 + 0.3*z2*zb2 + 0.2*(z1 + zb1)", "0.3*zb1*z2 + 0.2*(z1 + zb2)"],
        ["0.3*zb2*z1 + 0.2*(z2 + zb1)", "2 + z2*zb2*z1*zb1 + 0.1*(z2 + zb2)"],
    ],
    name="generic",
)


def test_flat_jet_and_curvature_vanish():
    G = geometry_at(zoo_metric("flat", 2).spec, P(0.3 - 0.2j, 1.1j))
    for arr in (G.jet.dg, G.jet.dbg, G.jet.ddg, G.R, G.torsion.T):
        assert not np.any(arr)
    assert G.ricci.u == G.ricci.v == 0


def test_hopf_jet_at_unit_point():
    jet = metric_jet(zoo_metric("hopf", 2).spec, P(1, 0))
    np.testing.assert_allclose(jet.g, np.eye(2), atol=0)
    assert jet.dg[0, 0, 0] == pytest.approx(-1)


def test_fubini_study_normal_coordinates():
    jet = metric_jet(zoo_metric("fubini_study", 2).spec, P(0, 0))
    np.testing.assert_allclose(jet.g, np.eye(2), atol=0)
    assert not np.any(jet.dg) and not np.any(jet.dbg)


def test_fubini_study_curve_curvature():
    spec = MetricSpec.from_strings([["1/(1+z1*zb1)^2"]])
    assert geometry_at(spec, P(0)).R[0, 0, 0, 0] == pytest.approx(2)


def test_hopf_frame_values_at_unit_point():
    G = geometry_at(zoo_metric("hopf", 2).spec, P(1, 0))
    Rf = G.frame_curvature()
    assert Rf[0, 0, 0, 0] == pytest.approx(0, abs=1e-14)
    assert Rf[1, 1, 1, 1] == pytest.approx(1)
    assert Rf[0, 0, 1, 1] == pytest.approx(0, abs=1e-14)
    assert Rf[1, 1, 0, 0] == pytest.approx(1)
    assert Rf[0, 1, 0, 1] == pytest.approx(0, abs=1e-14)
    assert (G.ricci.u, G.ricci.v) == pytest.approx((2, 1))
    H = G.holomorphic_sectional([1, 0])
    assert H == pytest.approx(0, abs=1e-14)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_hopf_second_ricci_in_frame(n):
    entry = zoo_metric("hopf", n)
    for p in entry.sample_points(5, seed=1):
        G = geometry_at(entry.spec, p)
        E = G.frame()
        ric2_frame = E.T @ G.ricci.ric2 @ E.conj()
        np.testing.assert_allclose(ric2_frame, (n - 1) * np.eye(n), atol=1e-12)


def test_hopf_torsion_norm():
    G = geometry_at(zoo_metric("hopf", 2).spec, P(1, 0))
    assert np.max(np.abs(G.torsion.eta)) > 0.5
    assert G.torsion.eta_norm_sq == pytest.approx(1)
    assert G.ricci.u - G.ricci.v == pytest.approx(G.torsion.eta_norm_sq)


def test_kahler_riccis_coincide_and_torsion_vanishes():
    entry = zoo_metric("fubini_study", 2)
    for p in entry.sample_points(5, seed=2):
        G = geometry_at(entry.spec, p)
        rics = [G.ricci.ricci(k) for k in (1, 2, 3, 4)]
        assert max(np.max(np.abs(a - b)) for a in rics for b in rics) < 1e-9
        assert np.max(np.abs(G.torsion.T)) < 1e-10


def test_fubini_study_holomorphic_sectional_is_two():
    entry = zoo_metric("fubini_study", 2)
    rng = np.random.default_rng(3)
    vals = []
    for p in entry.sample_points(20, seed=3):
        G = geometry_at(entry.spec, p)
        X = rng.standard_normal((50, 2)) + 1j * rng.standard_normal((50, 2))
        vals += [G.holomorphic_sectional(x) for x in X]
    assert max(vals) - min(vals) < 1e-8
    assert np.mean(vals) == pytest.approx(2)


def test_mixed_curvature_special_cases():
    spec = GENERIC
    G = geometry_at(spec, P(0.1 + 0.2j, -0.3j))
    X = [0.4 - 1j, 2 + 0.5j]
    assert G.mixed_curvature(X, MixedCurvatureParams(3, 0.0, 1.0)) == G.holomorphic_sectional(X)
    hopf = geometry_at(zoo_metric("hopf", 2).spec, P(0.3 + 1j, -0.7))
    for X in np.random.default_rng(0).standard_normal((20, 2, 2)):
        x = X[0] + 1j * X[1]
        assert abs(hopf.mixed_curvature(x, MixedCurvatureParams(1, 1.0, -2.0))) < 1e-13
    with pytest.raises(ValueError):
        MixedCurvatureParams(5, 1, 1)
    with pytest.raises(ValueError):
        G.mixed_curvature([0, 0], MixedCurvatureParams(1, 1, 1))


def test_identity_frame_leaves_curvature_unchanged():
    G = geometry_at(zoo_metric("fubini_study", 2).spec, P(0, 0))
    np.testing.assert_array_equal(frame_curvature(G.R, np.eye(2)), G.R)


@pytest.mark.parametrize("name", ["flat", "hopf", "fubini_study", "complex_hyperbolic", "product_case2"])
def test_weyl_minus_vanishes_in_every_unitary_frame(name):
    entry = zoo_metric(name, 2)
    rng = np.random.default_rng(4)
    for p in entry.sample_points(3, seed=4):
        G = geometry_at(entry.spec, p)
        E0 = G.frame()
        for _ in range(50):
            assert G.weyl_minus(E0 @ random_unitary(rng, 2)).max_abs < 1e-12


def test_weyl_minus_detects_generic_metric():
    assert geometry_at(GENERIC, P(0.1, 0.2)).weyl_minus().max_abs > 1e-3
    with pytest.raises(ValueError):
        weyl_minus(np.zeros((3, 3, 3, 3)))


def test_product_frame_values():
    entry = zoo_metric("product_case2", 2)
    for p in entry.sample_points(5, seed=5):
        Rf = geometry_at(entry.spec, p).frame_curvature(entry.canonical_frame(p))
        nz = np.argwhere(np.abs(Rf) > 1e-12)
        assert sorted(Rf[tuple(i)].real.round(12) for i in nz) == [-1, 1]


# -- independent finite-difference oracle ------------------------------------


@pytest.mark.parametrize("name, n", [("hopf", 2), ("hopf", 3), ("fubini_study", 2), ("complex_hyperbolic", 2), ("product_case2", 2)])
def test_curvature_matches_finite_differences(name, n):
    entry = zoo_metric(name, n)
    for p in entry.sample_points(3, seed=6):
        G = geometry_at(entry.spec, p)
        _, _, R_fd = fd_curvature(entry.spec, p)
        assert np.max(np.abs(G.R - R_fd)) < 1e-6 * (1 + np.max(np.abs(G.R)))


@settings(max_examples=25, deadline=None)
@given(st.complex_numbers(max_magnitude=0.3), st.complex_numbers(max_magnitude=0.3))
def test_generic_metric_matches_finite_differences(a, b):
    p = P(a, b)
    G = geometry_at(GENERIC, p)
    _, _, R_fd = fd_curvature(GENERIC, p)
    assert np.max(np.abs(G.R - R_fd)) < 1e-6


# -- invariants --------------------------------------------------------------


@settings(max_examples=25, deadline=None)
@given(st.complex_numbers(max_magnitude=0.3), st.complex_numbers(max_magnitude=0.3), st.floats(0.1, 10))
def test_scaling_the_metric(a, b, lam):
    # g -> lam g: R scales by lam, Riccis are invariant, u, v, H scale by 1/lam
    p = P(a, b)
    scaled = MetricSpec(2, tuple(tuple(ex.mul(ex.Const(lam), e) for e in row) for row in GENERIC.components))
    G, Gs = geometry_at(GENERIC, p), geometry_at(scaled, p)
    np.testing.assert_allclose(Gs.R, lam * G.R, atol=1e-12 * lam)
    for k in (1, 2, 3, 4):
        np.testing.assert_allclose(Gs.ricci.ricci(k), G.ricci.ricci(k), atol=1e-11)
    assert Gs.ricci.u * lam == pytest.approx(G.ricci.u, abs=1e-11)
    assert Gs.ricci.v * lam == pytest.approx(G.ricci.v, abs=1e-11)
    assert Gs.holomorphic_sectional([1, 1j]) * lam == pytest.approx(G.holomorphic_sectional([1, 1j]), abs=1e-11)


@settings(max_examples=25, deadline=None)
@given(st.complex_numbers(max_magnitude=0.3), st.complex_numbers(max_magnitude=0.3), st.integers(0, 1000))
def test_frame_traces_are_frame_independent(a, b, seed):
    G = geometry_at(GENERIC, P(a, b))
    E = G.frame() @ random_unitary(np.random.default_rng(seed), 2)
    Rf = G.frame_curvature(E)
    assert np.einsum("aabb->", Rf).real == pytest.approx(G.ricci.u, abs=1e-11)
    assert np.einsum("abba->", Rf).real == pytest.approx(G.ricci.v, abs=1e-11)
    # curvature is real as a form: conj R_{i jbar k lbar} = R_{j ibar l kbar}
    np.testing.assert_allclose(G.R.conj(), G.R.transpose(1, 0, 3, 2), atol=1e-13)


def test_singular_point():
    with pytest.raises(SingularMetricError):
        geometry_at(MetricSpec.from_strings([["z1*zb1"]]), P(0))


# -- conformal change --------------------------------------------------------


def test_zero_conformal_factor():
    spec = GENERIC
    gt = conformal_metric(spec, ex.parse_expression("0", 2))
    p = P(0.2, -0.1j)
    np.testing.assert_array_equal(gt.metric_at(p), spec.metric_at(p))


def test_constant_conformal_factor():
    spec = zoo_metric("hopf", 2).spec
    gt = conformal_metric(spec, ex.parse_expression("0.7", 2))
    p = P(0.5 + 0.5j, 1)
    np.testing.assert_allclose(geometry_at(gt, p).R, math.exp(1.4) * geometry_at(spec, p).R, rtol=1e-13, atol=1e-13)


@pytest.mark.parametrize(
    "name, F",
    [("flat", "log(1 + z1*zb1)"), ("flat", "z1*zb1"), ("hopf", "log(1 + z1*zb1)"), ("fubini_study", "0.3*(z1*zb2 + z2*zb1)")],
)
def test_conformal_law(name, F):
    entry = zoo_metric(name, 2)
    Fe = ex.parse_expression(F, 2)
    pts = [P(0, 0)] if name == "flat" else []
    pts += entry.sample_points(5, seed=7)
    gt = conformal_metric(entry.spec, Fe, pts)
    hess = FunctionHessian(Fe, 2)
    for p in pts:
        if not entry.is_valid(p):
            continue
        G = geometry_at(entry.spec, p)
        fval, fh = hess(p)
        pred = conformal_curvature_prediction(G.R, G.g, fval, fh)
        assert np.max(np.abs(geometry_at(gt, p).R - pred)) < 1e-8


def test_conformal_factor_must_be_real():
    with pytest.raises(ValueError):
        conformal_metric(GENERIC, ex.parse_expression("z1", 2), [P(0.1j, 0)])
