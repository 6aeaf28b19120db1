"""Identity suites, Monte-Carlo sphere averages and constancy scans.

Every check returns plain report objects; nothing here raises on a failed
identity.  Randomness is always derived from ``(seed, index)`` pairs so a
run is reproducible regardless of how work is split across threads.
"""

from __future__ import annotations

import math
import os
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from . import expr as ex
from .curvature import (
    FunctionHessian,
    MetricSpec,
    MixedCurvatureParams,
    PointGeometry,
    conformal_curvature_prediction,
    conformal_metric,
    frame_curvature,
    geometry_at,
    weyl_minus,
)
from .expr import ChartPoint, ExpressionError
from .hermitian import SingularMetricError, random_unitary
from .zoo import ZooEntry

Sampler = Callable[[np.random.Generator], ChartPoint]


@dataclass(frozen=True)
class Tolerances:
    hermitian: float = 1e-9
    structural: float = 1e-8
    torsion: float = 1e-10
    oracle: float = 1e-8
    conformal: float = 1e-8
    constancy: float = 1e-7
    self_dual: float = 1e-7
    consequences: float = 1e-7
    kahler_detect: float = 1e-9
    flat_detect: float = 1e-9
    mc_sigmas: float = 4.0
    mc_floor: float = 1e-9

    def scaled(self, factor: float) -> "Tolerances":
        """Multiply every tolerance except the sigma count."""
        values = {k: v * factor for k, v in asdict(self).items() if k != "mc_sigmas"}
        return replace(self, **values)

    def with_overrides(self, overrides: Mapping[str, float]) -> "Tolerances":
        unknown = set(overrides) - set(asdict(self))
        if unknown:
            raise ValueError(f"unknown tolerance names {sorted(unknown)}")
        return replace(self, **{k: float(v) for k, v in overrides.items()})

    @classmethod
    def from_env(cls, var: str = "CHERNLAB_TOL") -> "Tolerances":
        raw = os.environ.get(var)
        return cls() if not raw else cls().scaled(float(raw))


DEFAULT_TOL = Tolerances()


def _jsonable(x):
    if isinstance(x, float):
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, complex):
        return [_jsonable(x.real), _jsonable(x.imag)]
    if isinstance(x, np.generic):
        return _jsonable(x.item())
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()] if x.ndim else _jsonable(x.item())
    if isinstance(x, Mapping):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


@dataclass
class IdentityReport:
    identity: str
    metric: str
    points: int
    max_residual: float
    tolerance: float
    notes: dict[str, Any] = field(default_factory=dict)
    expect_fail: bool = False

    @property
    def verdict(self) -> str:
        return "pass" if self.max_residual < self.tolerance else "fail"

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    @property
    def ok(self) -> bool:
        """Outcome matches expectation (a negative control is ok when it fails)."""
        return self.passed != self.expect_fail

    def to_dict(self) -> dict:
        out = {
            "kind": "identity",
            "identity": self.identity,
            "metric": self.metric,
            "points": self.points,
            "max_residual": self.max_residual,
            "tolerance": self.tolerance,
            "verdict": self.verdict,
            "notes": self.notes,
        }
        if self.expect_fail:
            out["expect_fail"] = True
        return _jsonable(out)


@dataclass
class ScanReport:
    quantity: str
    metric: str
    samples: int
    min: float
    max: float
    mean: float
    seed: int
    tolerance: float
    criterion: str  # "spread" (constancy) or "max" (vanishing)
    notes: dict[str, Any] = field(default_factory=dict)

    @property
    def spread(self) -> float:
        return self.max - self.min

    @property
    def verdict(self) -> str:
        if self.criterion == "spread":
            return "constant" if self.spread < self.tolerance * (1 + abs(self.mean)) else "not_constant"
        return "vanishing" if self.max < self.tolerance else "not_vanishing"

    @property
    def passed(self) -> bool:
        return self.verdict in ("constant", "vanishing")

    def to_dict(self) -> dict:
        return _jsonable(
            {
                "kind": "scan",
                "quantity": self.quantity,
                "metric": self.metric,
                "samples": self.samples,
                "min": self.min,
                "max": self.max,
                "mean": self.mean,
                "spread": self.spread,
                "seed": self.seed,
                "tolerance": self.tolerance,
                "verdict": self.verdict,
                "notes": self.notes,
            }
        )


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def _pmap(fn, items, workers: int | None):
    items = list(items)
    if not workers or workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _maxabs(a) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def _geometries(spec: MetricSpec, points: Sequence[ChartPoint], workers=None):
    spec._jet_batch  # compile once before fanning out

    def one(p):
        try:
            return geometry_at(spec, p)
        except (SingularMetricError, ExpressionError, np.linalg.LinAlgError) as exc:
            return exc

    results = _pmap(one, points, workers)
    geoms = [r for r in results if isinstance(r, PointGeometry)]
    errors = [str(r) for r in results if not isinstance(r, PointGeometry)]
    return geoms, errors


def _failed(identity, spec, points, tol, errors) -> IdentityReport:
    return IdentityReport(identity, spec.name, len(points), math.inf, tol, {"errors": errors[:3]})


def sample_points(sampler: Sampler, count: int, seed: int) -> list[ChartPoint]:
    return [sampler(np.random.default_rng([seed, i])) for i in range(count)]


def region_sampler(n: int, valid_region: ex.Expr | None = None, radius: float = 1.0, params=None, margin: float = 1e-3) -> Sampler:
    """Rejection sampler on the polydisk of ``radius`` restricted to ``Re(valid_region) > margin``."""

    def sample(rng):
        for _ in range(10_000):
            r = radius * np.sqrt(rng.uniform(size=n))
            coords = r * np.exp(2j * np.pi * rng.uniform(size=n))
            p = ChartPoint(tuple(coords))
            if valid_region is None:
                return p
            try:
                if ex.evaluate(valid_region, p, params).real > margin:
                    return p
            except ExpressionError:
                continue
        raise RuntimeError("could not sample a point inside the valid region")

    return sample


def symmetrize4(A: np.ndarray) -> np.ndarray:
    """``A_{ijkl} + A_{kjil} + A_{ilkj} + A_{klij}`` (swap i<->k and j<->l)."""
    return A + A.transpose(2, 1, 0, 3) + A.transpose(0, 3, 2, 1) + A.transpose(2, 3, 0, 1)


def ricci_metric_sym(ric: np.ndarray, g: np.ndarray) -> np.ndarray:
    """``ric_{ij} g_{kl} + ric_{kj} g_{il} + ric_{il} g_{kj} + ric_{kl} g_{ij}``."""
    return symmetrize4(np.einsum("ij,kl->ijkl", ric, g))


def metric_metric_sym(g: np.ndarray) -> np.ndarray:
    """``g_{ij} g_{kl} + g_{il} g_{kj}``."""
    return np.einsum("ij,kl->ijkl", g, g) + np.einsum("il,kj->ijkl", g, g)


def ricci_for(geom: PointGeometry, k: int) -> np.ndarray:
    """Hermitian Ricci form used for mixed curvature (real part for k = 3, 4)."""
    return geom.ricci.ricci(k) if k in (1, 2) else geom.ricci.hermitian_ricci(k)


# ---------------------------------------------------------------------------
# pointwise identities
# ---------------------------------------------------------------------------


def _is_hopf_name(name: str) -> bool:
    return "hopf" in re.split(r"[^a-z0-9]+", name.lower())


def verify_pointwise_identities(
    spec: MetricSpec,
    points: Sequence[ChartPoint],
    tol: Tolerances = DEFAULT_TOL,
    hopf: bool | None = None,
    kahler: bool | None = None,
    workers: int | None = None,
) -> list[IdentityReport]:
    """Structural identities at each point.

    ``hopf=None`` enables the Hopf-specific identities when the metric name
    contains the word ``hopf``.  ``kahler=True`` asserts torsion vanishes;
    ``kahler=None`` applies the degeneracy check only where torsion is
    numerically zero.
    """
    name, npts = spec.name, len(points)
    reports = []
    try:
        herm = spec.hermitian_defect(points)
    except ExpressionError as exc:
        return [_failed("metric_hermitian", spec, points, tol.hermitian, [str(exc)])]
    reports.append(IdentityReport("metric_hermitian", name, npts, herm, tol.hermitian))

    geoms, errors = _geometries(spec, points, workers)
    if errors:
        reports.append(_failed("metric_positive_definite", spec, points, tol.structural, errors))
        return reports

    reality = trace = herm_ric = 0.0
    for G in geoms:
        R, rs = G.R, G.ricci
        reality = max(reality, _maxabs(R - R.transpose(1, 0, 3, 2).conj()))
        g_inv = G.jet.g_inv
        u2 = np.einsum("kl,kl->", g_inv, rs.ric2)
        v4 = np.einsum("kj,kj->", g_inv, rs.ric4)
        trace = max(trace, abs(u2 - rs.u), abs(v4 - rs.v))
        herm_ric = max(
            herm_ric,
            _maxabs(rs.ric1 - rs.ric1.conj().T),
            _maxabs(rs.ric2 - rs.ric2.conj().T),
            _maxabs(rs.ric4 - rs.ric3.conj().T),
        )
    reports.append(IdentityReport("curvature_reality", name, npts, reality, tol.structural))
    reports.append(IdentityReport("ricci_traces", name, npts, trace, tol.structural))
    reports.append(IdentityReport("ricci_hermitian_relations", name, npts, herm_ric, tol.structural))

    if spec.n == 2:
        res = 0.0
        for G in geoms:
            rs = G.ricci
            lhs = rs.ric1 + rs.ric2 - (rs.ric3 + rs.ric4)
            res = max(res, _maxabs(lhs - (rs.u - rs.v) * G.g))
        reports.append(IdentityReport("surface_ricci_identity", name, npts, res, tol.structural))

    max_t = max(_maxabs(G.torsion.T) for G in geoms) if geoms else 0.0
    if kahler is True:
        reports.append(IdentityReport("torsion_vanishes", name, npts, max_t, tol.torsion))
    if kahler is not False:
        used = [G for G in geoms if kahler or _maxabs(G.torsion.T) < tol.torsion]
        res = 0.0
        for G in used:
            rs, R = G.ricci, G.R
            rics = (rs.ric1, rs.ric2, rs.ric3, rs.ric4)
            res = max(res, *(_maxabs(a - b) for a in rics for b in rics))
            res = max(res, _maxabs(R - R.transpose(2, 1, 0, 3)), _maxabs(R - R.transpose(0, 3, 2, 1)))
        if used:
            reports.append(IdentityReport("kahler_degeneracy", name, len(used), res, tol.structural))

    if hopf is None:
        hopf = _is_hopf_name(name)
    if hopf:
        res = bal = 0.0
        for G in geoms:
            lhs = ricci_metric_sym(G.ricci.ric1, G.g) - G.n * symmetrize4(G.R)
            res = max(res, _maxabs(lhs))
            bal = max(bal, abs((G.ricci.u - G.ricci.v) - G.torsion.eta_norm_sq))
        reports.append(IdentityReport("hopf_symmetrized_identity", name, npts, res, tol.structural))
        reports.append(
            IdentityReport("hopf_scalar_gap_equals_torsion_norm", name, npts, bal, tol.structural, {"note": "u - v and |eta|^2 are constant on the Hopf chart"})
        )
    return reports


def verify_oracle(entry: ZooEntry, points: Sequence[ChartPoint], spec: MetricSpec | None = None, tol: Tolerances = DEFAULT_TOL, workers=None) -> list[IdentityReport]:
    """Compare computed curvature with the entry's closed form in its canonical frame.

    ``spec`` defaults to the entry's own metric; pass a modified one to run
    a negative control against the unmodified oracle.
    """
    spec = spec or entry.spec
    if entry.oracle is None:
        return []
    geoms, errors = _geometries(spec, points, workers)
    if errors:
        return [_failed("oracle_frame_curvature", spec, points, tol.oracle, errors)]
    rf = ric = scal = 0.0
    for G in geoms:
        o = entry.oracle(G.point)
        E = o.frame
        rf = max(rf, _maxabs(frame_curvature(G.R, E) - o.frame_curvature))
        for k in range(4):
            framed = E.T @ G.ricci.ricci(k + 1) @ E.conj()
            ric = max(ric, _maxabs(framed - o.ricci[k]))
        scal = max(scal, abs(G.ricci.u - o.u), abs(G.ricci.v - o.v), abs(G.torsion.eta_norm_sq - o.eta_norm_sq))
    return [
        IdentityReport("oracle_frame_curvature", spec.name, len(geoms), rf, tol.oracle),
        IdentityReport("oracle_ricci", spec.name, len(geoms), ric, tol.oracle),
        IdentityReport("oracle_scalars", spec.name, len(geoms), scal, tol.oracle),
    ]


def verify_tags(entry: ZooEntry, points: Sequence[ChartPoint], spec: MetricSpec | None = None, tol: Tolerances = DEFAULT_TOL, seed: int = 0, n_vectors: int = 20, workers=None) -> list[IdentityReport]:
    """Check the properties advertised by a zoo entry's tags."""
    spec = spec or entry.spec
    geoms, errors = _geometries(spec, points, workers)
    if errors:
        return [_failed("tags", spec, points, tol.structural, errors)]
    out = []
    name = spec.name
    if "kahler" in entry.tags:
        out.append(IdentityReport("tag_kahler", name, len(geoms), max(_maxabs(G.torsion.T) for G in geoms), tol.kahler_detect))
    if "balanced" in entry.tags:
        out.append(IdentityReport("tag_balanced", name, len(geoms), max(_maxabs(G.torsion.eta) for G in geoms), tol.kahler_detect))
    if "chern_flat" in entry.tags:
        out.append(IdentityReport("tag_chern_flat", name, len(geoms), max(_maxabs(G.R) for G in geoms), tol.flat_detect))
    if "constant_H" in entry.tags:
        vals = []
        for i, G in enumerate(geoms):
            rng = np.random.default_rng([seed, i, 1])
            for _ in range(n_vectors):
                X = rng.standard_normal(spec.n) + 1j * rng.standard_normal(spec.n)
                vals.append(G.holomorphic_sectional(X))
        spread = max(vals) - min(vals)
        mean = float(np.mean(vals))
        out.append(IdentityReport("tag_constant_H", name, len(geoms), spread / (1 + abs(mean)), tol.constancy, {"mean_H": mean}))
    if "self_dual" in entry.tags and spec.n == 2:
        out.append(IdentityReport("tag_self_dual", name, len(geoms), max(G.weyl_minus().max_abs for G in geoms), tol.self_dual))
    return out


# ---------------------------------------------------------------------------
# sphere averages
# ---------------------------------------------------------------------------

MC_BLOCK = 8192


def average_closed_forms(u: float, v: float, n: int, params: MixedCurvatureParams) -> dict[str, float]:
    """Unit-sphere means of the Ricci forms, H and C^(k)."""
    a, b = params.alpha, params.beta
    if params.k in (1, 2):
        c = (((n + 1) * a + b) * u + b * v) / (n * (n + 1))
    else:
        c = (((n + 1) * a + b) * v + b * u) / (n * (n + 1))
    return {
        "ric1": u / n,
        "ric2": u / n,
        "ric3": v / n,
        "ric4": v / n,
        "H": (u + v) / (n * (n + 1)),
        "C": c,
    }


def sphere_samples(geom: PointGeometry, n_samples: int, seed: int, workers=None) -> dict[str, np.ndarray]:
    """Values of Re Ric^(k)(Z, Zbar) and H(Z) at ``g``-unit vectors ``Z``.

    Directions are standard complex Gaussians in the unitary frame,
    normalised; block ``b`` of ``MC_BLOCK`` draws uses ``rng([seed, b])``.
    """
    n = geom.n
    E = geom.frame()
    Rf = frame_curvature(geom.R, E)
    rics = [E.T @ geom.ricci.ricci(k) @ E.conj() for k in (1, 2, 3, 4)]
    nblocks = -(-n_samples // MC_BLOCK)

    def block(b):
        m = min(MC_BLOCK, n_samples - b * MC_BLOCK)
        raw = np.random.default_rng([seed, b]).standard_normal((m, 2 * n))
        xi = raw[:, :n] + 1j * raw[:, n:]
        xi /= np.linalg.norm(xi, axis=1)[:, None]
        xc = xi.conj()
        out = {f"ric{k + 1}": np.einsum("ab,na,nb->n", rics[k], xi, xc).real for k in range(4)}
        half = np.einsum("abcd,na,nb->ncd", Rf, xi, xc)
        out["H"] = np.einsum("ncd,nc,nd->n", half, xi, xc).real
        return out

    parts = _pmap(block, range(nblocks), workers)
    return {key: np.concatenate([p[key] for p in parts]) for key in parts[0]}


def sphere_average_check(
    spec: MetricSpec,
    p: ChartPoint,
    params: MixedCurvatureParams,
    n_samples: int = 200_000,
    seed: int = 0,
    tol: Tolerances = DEFAULT_TOL,
    workers: int | None = None,
) -> IdentityReport:
    """Monte-Carlo check of the unit-sphere averages at ``p``.

    The residual is measured in standard errors; the floor ``mc_floor``
    covers quantities that are constant on the sphere (zero variance).
    """
    if n_samples < 10:
        raise ValueError("need at least 10 samples")
    geom = geometry_at(spec, p)
    n = spec.n
    vals = sphere_samples(geom, n_samples, seed, workers)
    rk = "ric1" if params.k == 1 else "ric2" if params.k == 2 else f"ric{params.k}"
    vals["C"] = params.alpha * vals[rk] + params.beta * vals["H"]
    exact = average_closed_forms(geom.ricci.u, geom.ricci.v, n, params)
    worst = 0.0
    details = {}
    for key, x in vals.items():
        est = float(np.mean(x))
        se = float(np.std(x, ddof=1) / math.sqrt(len(x)))
        floor = tol.mc_floor * (1 + abs(exact[key])) / tol.mc_sigmas
        z = abs(est - exact[key]) / max(se, floor)
        worst = max(worst, z)
        details[key] = {"estimate": est, "stderr": se, "expected": exact[key], "sigmas": z}
    notes = {"k": params.k, "alpha": params.alpha, "beta": params.beta, "u": geom.ricci.u, "v": geom.ricci.v, "seed": seed, "samples": n_samples, "averages": details}
    return IdentityReport("sphere_average", spec.name, 1, worst, tol.mc_sigmas, notes)


# ---------------------------------------------------------------------------
# scans
# ---------------------------------------------------------------------------


def constancy_scan(
    spec: MetricSpec,
    params: MixedCurvatureParams,
    n_points: int,
    n_vectors: int,
    seed: int,
    sampler: Sampler,
    tol: Tolerances = DEFAULT_TOL,
    workers: int | None = None,
) -> ScanReport:
    """Range of C^(k)_{alpha,beta} over random points and directions."""
    spec._jet_batch

    def one(i):
        rng = np.random.default_rng([seed, i])
        p = sampler(rng)
        G = geometry_at(spec, p)
        X = rng.standard_normal((n_vectors, spec.n)) + 1j * rng.standard_normal((n_vectors, spec.n))
        return [G.mixed_curvature(x, params) for x in X]

    vals = np.array([v for chunk in _pmap(one, range(n_points), workers) for v in chunk])
    label = f"C^({params.k})_{{{params.alpha!r},{params.beta!r}}}"
    notes = {"k": params.k, "alpha": params.alpha, "beta": params.beta, "points": n_points, "vectors_per_point": n_vectors, "mean_abs": float(np.mean(np.abs(vals)))}
    return ScanReport(label, spec.name, len(vals), float(vals.min()), float(vals.max()), float(vals.mean()), seed, tol.constancy, "spread", notes)


def self_duality_scan(spec: MetricSpec, n_points: int, seed: int, sampler: Sampler, tol: Tolerances = DEFAULT_TOL, workers: int | None = None) -> ScanReport:
    """max |W^-| over random points, in the triangular unitary frame."""
    if spec.n != 2:
        raise ValueError("self-duality is defined for surfaces (n = 2) only")
    spec._jet_batch

    def one(i):
        p = sampler(np.random.default_rng([seed, i]))
        return geometry_at(spec, p).weyl_minus().max_abs

    vals = np.array(_pmap(one, range(n_points), workers))
    return ScanReport("max|W^-|", spec.name, len(vals), float(vals.min()), float(vals.max()), float(vals.mean()), seed, tol.self_dual, "max")


# ---------------------------------------------------------------------------
# conformal change
# ---------------------------------------------------------------------------


def conformal_formula_check(
    spec: MetricSpec,
    F: ex.Expr,
    points: Sequence[ChartPoint],
    tol: Tolerances = DEFAULT_TOL,
    mixed: MixedCurvatureParams = MixedCurvatureParams(2, 1.0, 1.0),
    c: float = 1.0,
) -> list[IdentityReport]:
    """Curvature of ``exp(2F) g`` computed directly versus from ``g`` and ``F``.

    Returns the tensor law, the scalar traces (with fitted multipliers of
    Delta F) and, for k = 2, the polarized constant-curvature tensor rewritten
    in terms of ``g`` and ``F``.
    """
    name = spec.name
    try:
        gt = conformal_metric(spec, F, points)
    except ValueError as exc:
        return [_failed("conformal_law", spec, points, tol.conformal, [str(exc)])]
    hess = FunctionHessian(F, spec.n)
    geoms, errors = _geometries(spec, points)
    geoms_t, errors_t = _geometries(gt, points)
    if errors or errors_t:
        return [_failed("conformal_law", spec, points, tol.conformal, errors + errors_t)]

    law = scal = lem = 0.0
    mu_num = mu_den = mv_num = mv_den = 0.0
    m_num = m_den = 0.0
    a, b = mixed.alpha, mixed.beta
    for G, Gt in zip(geoms, geoms_t):
        fval, fh = hess(G.point, spec.params)
        law = max(law, _maxabs(Gt.R - conformal_curvature_prediction(G.R, G.g, fval, fh)))
        e2f = math.exp(2 * fval.real)
        lap = float(np.einsum("kl,kl->", G.jet.g_inv, fh).real)
        # scalar laws: e^{2F} u~ = u - 2n lap, e^{2F} v~ = v - 2 lap
        scal = max(scal, abs(e2f * Gt.ricci.u - (G.ricci.u - 2 * spec.n * lap)), abs(e2f * Gt.ricci.v - (G.ricci.v - 2 * lap)))
        mu_num += (G.ricci.u - e2f * Gt.ricci.u) * lap
        mu_den += lap * lap
        mv_num += (G.ricci.v - e2f * Gt.ricci.v) * lap
        mv_den += lap * lap
        if mixed.k == 2:
            q_tilde = a * ricci_metric_sym(Gt.ricci.ric2, Gt.g) + b * symmetrize4(Gt.R) - 2 * c * metric_metric_sym(Gt.g)
            gg = metric_metric_sym(G.g)
            base = a * ricci_metric_sym(G.ricci.ric2, G.g) + b * symmetrize4(G.R) - 2 * b * ricci_metric_sym(fh, G.g)
            rhs_c = 2 * c * e2f * gg
            lhs = q_tilde / e2f
            lem = max(lem, _maxabs(lhs - (base - (4 * a * lap) * gg - rhs_c)))
            resid = lhs - (base - rhs_c)
            basis = a * lap * gg
            m_num += float(np.vdot(basis, -resid).real)
            m_den += float(np.vdot(basis, basis).real)
    notes_scal = {}
    if mu_den > 1e-20:
        notes_scal = {"fitted_u_multiplier": mu_num / mu_den, "fitted_v_multiplier": mv_num / mv_den, "expected_u_multiplier": 2 * spec.n, "expected_v_multiplier": 2}
    out = [
        IdentityReport("conformal_law", name, len(geoms), law, tol.conformal, {"F": ex.to_string(F)}),
        IdentityReport("conformal_scalar_traces", name, len(geoms), scal, tol.conformal, notes_scal),
    ]
    if mixed.k == 2:
        notes = {"alpha": a, "beta": b, "c": c}
        if m_den > 1e-20:
            notes["fitted_laplacian_multiplier"] = m_num / m_den
        out.append(IdentityReport("conformal_polarized_identity", name, len(geoms), lem, tol.conformal, notes))
    return out


# ---------------------------------------------------------------------------
# consequences of constant mixed curvature
# ---------------------------------------------------------------------------


def constant_curvature_consequences(
    spec: MetricSpec,
    params: MixedCurvatureParams,
    c: float,
    points: Sequence[ChartPoint],
    tol: Tolerances = DEFAULT_TOL,
    n_frames: int = 20,
    seed: int = 0,
    expect_fail: bool = False,
) -> list[IdentityReport]:
    """Identities forced by ``C^(k)_{alpha,beta} == c``.

    The polarized tensor identity for ``k != 2`` and the frame identities
    for ``k = 1`` extend the k = 2 / k = 3 statements by the same argument
    and are marked ``extension`` in the notes.
    """
    name, k = spec.name, params.k
    a, b = params.alpha, params.beta
    geoms, errors = _geometries(spec, points)
    if errors:
        return [_failed("polarized_constant_curvature", spec, points, tol.consequences, errors)]
    pol = trace = 0.0
    for G in geoms:
        ric = ricci_for(G, k)
        lhs = a * ricci_metric_sym(ric, G.g) + b * symmetrize4(G.R)
        pol = max(pol, _maxabs(lhs - 2 * c * metric_metric_sym(G.g)))
        if k == 2:
            rs = G.ricci
            n = spec.n
            t = (a * (n + 2) + b) * rs.ric2 + b * rs.ric1 + b * (rs.ric3 + rs.ric4)
            trace = max(trace, _maxabs(t - (2 * (n + 1) * c - a * rs.u) * G.g))
    reports = [IdentityReport("polarized_constant_curvature", name, len(geoms), pol, tol.consequences, {"k": k, "c": c, "extension": k != 2}, expect_fail)]
    if k == 2:
        reports.append(IdentityReport("ricci_trace_identity", name, len(geoms), trace, tol.consequences, {"c": c}, expect_fail))

    if spec.n == 2:
        avg = dirs = w3 = w12 = 0.0
        for i, G in enumerate(geoms):
            rng = np.random.default_rng([seed, i])
            E0 = G.frame()
            for _ in range(n_frames):
                Rf = frame_curvature(G.R, E0 @ random_unitary(rng, 2))
                r = lambda *ix: Rf[tuple(x - 1 for x in ix)]  # noqa: E731
                diag = r(1, 1, 1, 1) + r(2, 2, 2, 2)
                mixed_pair = r(1, 1, 2, 2) + r(2, 2, 1, 1)
                cross = r(1, 2, 2, 1) + r(2, 1, 1, 2)
                if k in (1, 2):
                    avg_res = (3 * a + 2 * b) * diag + (3 * a + b) * mixed_pair + b * cross - 6 * c
                    ric11 = r(1, 1, 1, 1) + (r(2, 2, 1, 1) if k == 2 else r(1, 1, 2, 2))
                    ric22 = r(2, 2, 2, 2) + (r(1, 1, 2, 2) if k == 2 else r(2, 2, 1, 1))
                else:
                    avg_res = (3 * a + 2 * b) * diag + (3 * a + b) * cross + b * mixed_pair - 6 * c
                    ric11 = r(1, 1, 1, 1) + (r(1, 2, 2, 1) if k == 3 else r(2, 1, 1, 2))
                    ric22 = r(2, 2, 2, 2) + (r(2, 1, 1, 2) if k == 3 else r(1, 2, 2, 1))
                avg = max(avg, abs(avg_res.real))
                d1 = a * ric11.real + b * r(1, 1, 1, 1).real - c
                d2 = a * ric22.real + b * r(2, 2, 2, 2).real - c
                dirs = max(dirs, abs(d1), abs(d2))
                w3 = max(w3, abs(diag - mixed_pair - cross))
                W = weyl_minus(Rf)
                w12 = max(w12, abs(W.W1), abs(W.W2))
        frames_note = {"frames_per_point": n_frames, "seed": seed, "k": k}
        reports += [
            IdentityReport("frame_average_identity", name, len(geoms), avg, tol.consequences, frames_note, expect_fail),
            IdentityReport("frame_direction_identities", name, len(geoms), dirs, tol.consequences, {**frames_note, "extension": k == 1}, expect_fail),
            IdentityReport("weyl3_combination", name, len(geoms), w3, tol.consequences, frames_note, expect_fail),
            IdentityReport("weyl12_vanish", name, len(geoms), w12, tol.consequences, frames_note, expect_fail),
        ]
    return reports


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------


def classify_metric(spec: MetricSpec, n_points: int, seed: int, sampler: Sampler, tol: Tolerances = DEFAULT_TOL) -> dict[str, Any]:
    points = sample_points(sampler, n_points, seed)
    geoms, errors = _geometries(spec, points)
    if errors:
        raise SingularMetricError(errors[0])
    witness = {
        "max_torsion": max(_maxabs(G.torsion.T) for G in geoms),
        "max_eta": max(_maxabs(G.torsion.eta) for G in geoms),
        "max_curvature": max(_maxabs(G.R) for G in geoms),
    }
    flags = {
        "kahler": witness["max_torsion"] < tol.kahler_detect,
        "balanced": witness["max_eta"] < tol.kahler_detect,
        "chern_flat": witness["max_curvature"] < tol.flat_detect,
    }
    if spec.n == 2:
        witness["max_weyl_minus"] = max(G.weyl_minus().max_abs for G in geoms)
        flags["self_dual"] = witness["max_weyl_minus"] < tol.self_dual
    return {"metric": spec.name, "points": n_points, "seed": seed, "flags": flags, "witnesses": witness}


# ---------------------------------------------------------------------------
# negative controls
# ---------------------------------------------------------------------------


def perturb_component(spec: MetricSpec, i: int, j: int, eps: float = 1e-3) -> MetricSpec:
    """Add ``eps * z_i * zb_j`` to the single component ``g_{i jbar}`` (0-based).

    The bump is non-constant, so it changes curvature even on a flat metric;
    off-diagonal bumps also break Hermitian symmetry.
    """
    bump = ex.mul(ex.Const(eps), ex.mul(ex.z(i + 1), ex.zb(j + 1)))
    rows = [list(r) for r in spec.components]
    rows[i][j] = ex.add(rows[i][j], bump)
    return MetricSpec(spec.n, tuple(tuple(r) for r in rows), f"{spec.name}-perturbed", spec.params)
