"""Chern connection curvature of a Hermitian metric in a holomorphic chart.

Index conventions follow the coordinate formulas throughout:

* ``G[k, l] = g_{k lbar}``
* ``ginv[p, q] = g^{p qbar}``, so ``sum_q ginv[p, q] G[k, q] = delta_pk``
* ``R[i, j, k, l] = R_{i jbar k lbar}``; the first pair is the form
  direction, the second pair the endomorphism (metric) slot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from . import expr as ex
from .expr import ChartPoint, CompiledBatch, Expr
from .hermitian import SingularMetricError, invert_hermitian, unitary_frame


class MetricError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class MetricSpec:
    """``n x n`` matrix of component expressions ``g_{i jbar}``."""

    n: int
    components: tuple[tuple[Expr, ...], ...]
    name: str = "metric"
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        comps = tuple(tuple(row) for row in self.components)
        if len(comps) != self.n or any(len(row) != self.n for row in comps):
            raise MetricError(f"components must be {self.n}x{self.n}")
        for row in comps:
            for e in row:
                if ex.max_index(e) > self.n:
                    raise MetricError(f"component {e} uses a variable beyond z{self.n}")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "params", dict(self.params))

    @classmethod
    def from_strings(cls, rows: Sequence[Sequence[str]], name: str = "metric", params: Mapping[str, float] | None = None) -> "MetricSpec":
        n = len(rows)
        comps = tuple(tuple(ex.parse_expression(s, n) for s in row) for row in rows)
        return cls(n, comps, name, dict(params or {}))

    def component_strings(self) -> list[list[str]]:
        return [[ex.to_string(e) for e in row] for row in self.components]

    def with_params(self, **values: float) -> "MetricSpec":
        merged = dict(self.params)
        merged.update(values)
        return MetricSpec(self.n, self.components, self.name, merged)

    def renamed(self, name: str) -> "MetricSpec":
        return MetricSpec(self.n, self.components, name, self.params)

    # -- compiled evaluators -------------------------------------------------

    @cached_property
    def derivative_exprs(self):
        """(g, d_i g, dbar_j g, d_i dbar_j g) as nested tuples of Expr."""
        n = self.n
        g = self.components
        memos_h = {i: {} for i in range(n)}
        memos_a = {j: {} for j in range(n)}
        dg = tuple(tuple(tuple(ex.wirtinger_derivative(g[k][l], i + 1, False, memos_h[i]) for l in range(n)) for k in range(n)) for i in range(n))
        dbg = tuple(tuple(tuple(ex.wirtinger_derivative(g[k][l], j + 1, True, memos_a[j]) for l in range(n)) for k in range(n)) for j in range(n))
        ddg = tuple(
            tuple(tuple(tuple(ex.wirtinger_derivative(dg[i][k][l], j + 1, True, memos_a[j]) for l in range(n)) for k in range(n)) for j in range(n))
            for i in range(n)
        )
        return g, dg, dbg, ddg

    @cached_property
    def _jet_batch(self) -> CompiledBatch:
        g, dg, dbg, ddg = self.derivative_exprs
        flat = [e for row in g for e in row]
        flat += [e for a in dg for row in a for e in row]
        flat += [e for a in dbg for row in a for e in row]
        flat += [e for a in ddg for b in a for row in b for e in row]
        return CompiledBatch(flat)

    @cached_property
    def _metric_batch(self) -> CompiledBatch:
        return CompiledBatch([e for row in self.components for e in row])

    def metric_at(self, p: ChartPoint) -> np.ndarray:
        self._check_point(p)
        vals = self._metric_batch.at(p, self.params)
        return np.array(vals, dtype=complex).reshape(self.n, self.n)

    def _check_point(self, p: ChartPoint):
        if p.n != self.n:
            raise MetricError(f"point has {p.n} coordinates, metric dimension is {self.n}")

    def hermitian_defect(self, points: Sequence[ChartPoint]) -> float:
        worst = 0.0
        for p in points:
            g = self.metric_at(p)
            worst = max(worst, float(np.max(np.abs(g - g.conj().T))))
        return worst


@dataclass(frozen=True)
class MetricJet:
    g: np.ndarray
    g_inv: np.ndarray  # g_inv[p, q] = g^{p qbar}
    dg: np.ndarray  # dg[i, k, l] = d_i g_{k lbar}
    dbg: np.ndarray  # dbg[j, k, l] = dbar_j g_{k lbar}
    ddg: np.ndarray  # ddg[i, j, k, l] = d_i dbar_j g_{k lbar}

    @property
    def n(self) -> int:
        return self.g.shape[0]


@dataclass(frozen=True)
class RicciSummary:
    ric1: np.ndarray
    ric2: np.ndarray
    ric3: np.ndarray
    ric4: np.ndarray
    u: float
    v: float

    def ricci(self, k: int) -> np.ndarray:
        return {1: self.ric1, 2: self.ric2, 3: self.ric3, 4: self.ric4}[k]

    def hermitian_ricci(self, k: int) -> np.ndarray:
        """Hermitian form whose values are ``Re Ric^(k)(X, Xbar)``."""
        r = self.ricci(k)
        return 0.5 * (r + r.conj().T)


@dataclass(frozen=True)
class TorsionData:
    T: np.ndarray  # T[i, j, k] = T^k_{ij}
    eta: np.ndarray
    eta_norm_sq: float


@dataclass(frozen=True)
class MixedCurvatureParams:
    k: int
    alpha: float
    beta: float

    def __post_init__(self):
        if self.k not in (1, 2, 3, 4):
            raise ValueError(f"k must be 1..4, got {self.k}")


@dataclass(frozen=True)
class WeylMinus:
    W1: complex
    W2: complex
    W3: complex

    @property
    def max_abs(self) -> float:
        return max(abs(self.W1), abs(self.W2), abs(self.W3))


# ---------------------------------------------------------------------------
# jets and curvature
# ---------------------------------------------------------------------------


def metric_jet(spec: MetricSpec, p: ChartPoint) -> MetricJet:
    """Metric, inverse and Wirtinger derivatives at ``p``.

    Raises ``SingularMetricError`` if ``g(p)`` is not positive definite and
    ``SingularEvaluationError`` for division by zero and the like.
    """
    spec._check_point(p)
    n = spec.n
    vals = np.array(spec._jet_batch.at(p, spec.params), dtype=complex)
    n2, n3 = n * n, n**3
    g = vals[:n2].reshape(n, n)
    dg = vals[n2 : n2 + n3].reshape(n, n, n)
    dbg = vals[n2 + n3 : n2 + 2 * n3].reshape(n, n, n)
    ddg = vals[n2 + 2 * n3 :].reshape(n, n, n, n)
    if not np.all(np.isfinite(vals)):
        raise SingularMetricError("non-finite metric jet")
    g_inv = invert_hermitian(g).T
    return MetricJet(g, g_inv, dg, dbg, ddg)


def chern_curvature(jet: MetricJet) -> np.ndarray:
    """``R_{i jbar k lbar} = -d_i dbar_j g_{k lbar} + g^{p qbar} d_i g_{k qbar} dbar_j g_{p lbar}``."""
    quad = np.einsum("pq,ikq,jpl->ijkl", jet.g_inv, jet.dg, jet.dbg)
    return -jet.ddg + quad


def ricci_summary(R: np.ndarray, g: np.ndarray) -> RicciSummary:
    g_inv = invert_hermitian(g).T
    ric1 = np.einsum("kl,ijkl->ij", g_inv, R)
    ric2 = np.einsum("ij,ijkl->kl", g_inv, R)
    ric3 = np.einsum("kj,ijkl->il", g_inv, R)
    ric4 = np.einsum("il,ijkl->kj", g_inv, R)
    u = np.einsum("ij,ij->", g_inv, ric1)
    v = np.einsum("il,il->", g_inv, ric3)
    return RicciSummary(ric1, ric2, ric3, ric4, float(u.real), float(v.real))


def torsion_data(jet: MetricJet) -> TorsionData:
    """``T^k_{ij} = g^{k lbar}(d_i g_{j lbar} - d_j g_{i lbar})`` and ``eta_i = T^k_{ik}``."""
    diff = jet.dg - jet.dg.transpose(1, 0, 2)  # [i, j, l]
    T = np.einsum("kl,ijl->ijk", jet.g_inv, diff)
    eta = np.einsum("ikk->i", T)
    norm = np.einsum("ij,i,j->", jet.g_inv, eta, eta.conj())
    return TorsionData(T, eta, float(norm.real))


def _vector(X) -> np.ndarray:
    X = np.asarray(X, dtype=complex)
    if not np.any(X):
        raise ValueError("direction must be nonzero")
    return X


def norm_sq(g: np.ndarray, X) -> float:
    X = np.asarray(X, dtype=complex)
    return float(np.einsum("ij,i,j->", g, X, X.conj()).real)


def curvature_form(R: np.ndarray, X) -> complex:
    """``R(X, Xbar, X, Xbar)`` without normalisation."""
    X = np.asarray(X, dtype=complex)
    Xc = X.conj()
    return complex(np.einsum("ijkl,i,j,k,l->", R, X, Xc, X, Xc))


def holomorphic_sectional(R: np.ndarray, g: np.ndarray, X) -> float:
    X = _vector(X)
    return float(curvature_form(R, X).real) / norm_sq(g, X) ** 2


def ricci_form(ric: np.ndarray, X) -> complex:
    X = np.asarray(X, dtype=complex)
    return complex(np.einsum("ij,i,j->", ric, X, X.conj()))


def mixed_curvature(R: np.ndarray, summary: RicciSummary, g: np.ndarray, X, params: MixedCurvatureParams) -> float:
    """``alpha Re Ric^(k)(X, Xbar) / |X|^2 + beta H(X)``.

    Ric^(3) and Ric^(4) are not Hermitian; their real part is used.
    """
    X = _vector(X)
    nx = norm_sq(g, X)
    ric = ricci_form(summary.ricci(params.k), X).real / nx
    h = curvature_form(R, X).real / nx**2
    return params.alpha * ric + params.beta * h


def frame_curvature(R: np.ndarray, E: np.ndarray) -> np.ndarray:
    """Components ``R(e_a, ebar_b, e_c, ebar_d)`` in the frame with columns ``E``."""
    Ec = E.conj()
    return np.einsum("ia,jb,kc,ld,ijkl->abcd", E, Ec, E, Ec, R, optimize=False)


def weyl_minus(Rf: np.ndarray) -> WeylMinus:
    """Anti-self-dual Weyl components of a surface from unitary-frame curvature."""
    if Rf.shape != (2, 2, 2, 2):
        raise ValueError("anti-self-dual Weyl components are defined only for n = 2")
    r = lambda a, b, c, d: Rf[a - 1, b - 1, c - 1, d - 1]  # noqa: E731
    w1 = r(1, 2, 1, 2)
    w2 = (r(1, 2, 2, 2) + r(2, 2, 1, 2) - r(1, 2, 1, 1) - r(1, 1, 1, 2)) / math.sqrt(2)
    w3 = (r(1, 1, 1, 1) + r(2, 2, 2, 2) - r(1, 1, 2, 2) - r(2, 2, 1, 1) - r(1, 2, 2, 1) - r(2, 1, 1, 2)) / 6
    return WeylMinus(complex(w1), complex(w2), complex(w3))


# ---------------------------------------------------------------------------
# conformal change
# ---------------------------------------------------------------------------


def conformal_metric(spec: MetricSpec, F: Expr, check_points: Sequence[ChartPoint] = (), name: str | None = None) -> MetricSpec:
    """Components ``exp(2F) g_{i jbar}``.

    ``F`` must be real; it is checked at ``check_points`` when given.
    """
    for p in check_points:
        val = ex.evaluate(F, p, spec.params)
        if abs(val.imag) > 1e-9 * max(1.0, abs(val)):
            raise MetricError(f"conformal factor is not real at {p.coords}: {val}")
    factor = ex.exp(ex.mul(ex.Const(2), F))
    comps = tuple(tuple(ex.mul(factor, e) for e in row) for row in spec.components)
    return MetricSpec(spec.n, comps, name or f"{spec.name}-conformal", spec.params)


class FunctionHessian:
    """Value and complex Hessian ``F_{k lbar} = d_k dbar_l F`` of a scalar."""

    def __init__(self, F: Expr, n: int):
        self.F = F
        self.n = n
        memo = {j: {} for j in range(n)}
        exprs = [F]
        for k in range(n):
            dk = ex.wirtinger_derivative(F, k + 1, False)
            exprs += [ex.wirtinger_derivative(dk, l + 1, True, memo[l]) for l in range(n)]
        self._batch = CompiledBatch(exprs)

    def __call__(self, p: ChartPoint, params: Mapping[str, float] | None = None) -> tuple[complex, np.ndarray]:
        vals = self._batch.at(p, params)
        return vals[0], np.array(vals[1:], dtype=complex).reshape(self.n, self.n)


def conformal_curvature_prediction(R: np.ndarray, g: np.ndarray, F_value: complex, F_hess: np.ndarray) -> np.ndarray:
    """``e^{2F}(R_{k lbar i jbar} - 2 g_{i jbar} F_{k lbar})`` in ``[k, l, i, j]`` order."""
    return np.exp(2 * F_value.real) * (R - 2 * np.einsum("ij,kl->klij", g, F_hess))


# ---------------------------------------------------------------------------
# convenience bundle
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PointGeometry:
    """Everything computed at one point; cached by :func:`geometry_at`."""

    point: ChartPoint
    jet: MetricJet
    R: np.ndarray
    ricci: RicciSummary
    torsion: TorsionData

    @property
    def g(self) -> np.ndarray:
        return self.jet.g

    @property
    def n(self) -> int:
        return self.jet.n

    def frame(self) -> np.ndarray:
        return unitary_frame(self.g)

    def frame_curvature(self, E: np.ndarray | None = None) -> np.ndarray:
        return frame_curvature(self.R, self.frame() if E is None else E)

    def weyl_minus(self, E: np.ndarray | None = None) -> WeylMinus:
        return weyl_minus(self.frame_curvature(E))

    def holomorphic_sectional(self, X) -> float:
        return holomorphic_sectional(self.R, self.g, X)

    def mixed_curvature(self, X, params: MixedCurvatureParams) -> float:
        return mixed_curvature(self.R, self.ricci, self.g, X, params)


def geometry_at(spec: MetricSpec, p: ChartPoint) -> PointGeometry:
    jet = metric_jet(spec, p)
    R = chern_curvature(jet)
    return PointGeometry(p, jet, R, ricci_summary(R, jet.g), torsion_data(jet))
