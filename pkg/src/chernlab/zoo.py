"""Built-in example metrics with closed-form curvature where one is known."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from . import expr as ex
from .curvature import MetricSpec
from .expr import ChartPoint

ZOO_NAMES = ("flat", "fubini_study", "complex_hyperbolic", "hopf", "product_case2")


class ZooError(ValueError):
    pass


class NoOracleError(ZooError):
    pass


@dataclass(frozen=True)
class Oracle:
    """Closed-form values at a point, expressed in ``frame``."""

    frame: np.ndarray
    frame_curvature: np.ndarray
    ricci: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]
    u: float
    v: float
    eta_norm_sq: float


@dataclass(frozen=True, eq=False)
class ZooEntry:
    name: str
    spec: MetricSpec
    valid_region: ex.Expr
    tags: frozenset[str]
    sampler: Callable[[np.random.Generator], ChartPoint]
    oracle: Callable[[ChartPoint], Oracle] | None = None
    canonical_frame: Callable[[ChartPoint], np.ndarray] | None = None
    params: Mapping[str, float] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.spec.n

    def is_valid(self, p: ChartPoint) -> bool:
        return ex.evaluate(self.valid_region, p, self.spec.params).real > 0

    def sample_point(self, rng: np.random.Generator) -> ChartPoint:
        return self.sampler(rng)

    def sample_points(self, count: int, seed: int) -> list[ChartPoint]:
        """``count`` points; point ``i`` depends only on ``(seed, i)``."""
        return [self.sampler(np.random.default_rng([seed, i])) for i in range(count)]


# -- samplers ----------------------------------------------------------------


def _unit_direction(rng, n):
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def _disk(rng, radius):
    r = radius * np.sqrt(rng.uniform())
    return r * np.exp(2j * np.pi * rng.uniform())


def _shell_sampler(n, rmin, rmax):
    def sample(rng):
        r = rng.uniform(rmin, rmax)
        return ChartPoint(tuple(r * _unit_direction(rng, n)))

    return sample


def _ball_sampler(n, radius):
    def sample(rng):
        r = radius * rng.uniform() ** (1 / (2 * n))
        return ChartPoint(tuple(r * _unit_direction(rng, n)))

    return sample


def _polydisk_sampler(radii):
    def sample(rng):
        return ChartPoint(tuple(_disk(rng, r) for r in radii))

    return sample


# -- component builders ------------------------------------------------------


def _r2(n: int) -> str:
    return "(" + " + ".join(f"z{i}*zb{i}" for i in range(1, n + 1)) + ")"


def _scaled(rows, scale):
    if scale == 1:
        return rows
    return [[s if s == "0" else f"{scale!r}*({s})" for s in row] for row in rows]


def _flat_rows(n):
    return [["1" if i == j else "0" for j in range(n)] for i in range(n)]


def _kahler_potential_rows(n, sign):
    # d_i dbar_j (sign * log(1 + sign |z|^2)) for sign = +1 (FS) or -1 (hyperbolic)
    r = _r2(n)
    base = f"(1 + {r})" if sign > 0 else f"(1 - {r})"
    op = "-" if sign > 0 else "+"
    rows = []
    for i in range(1, n + 1):
        row = []
        for j in range(1, n + 1):
            cross = f"zb{i}*z{j}/{base}^2"
            row.append(f"1/{base} {op} {cross}" if i == j else (f"-{cross}" if sign > 0 else cross))
        rows.append(row)
    return rows


def _hopf_rows(n):
    r = _r2(n)
    return [[f"1/{r}" if i == j else "0" for j in range(n)] for i in range(n)]


def _product_rows():
    return [["2/(1 - z1*zb1)^2", "0"], ["0", "2/(1 + z2*zb2)^2"]]


# -- oracles -----------------------------------------------------------------


def _hopf_frame(p: ChartPoint) -> np.ndarray:
    zs = np.array(p.coords)
    return np.linalg.norm(zs) * np.eye(p.n, dtype=complex)


def _hopf_oracle(scale):
    def oracle(p: ChartPoint) -> Oracle:
        n = p.n
        zs = np.array(p.coords)
        r = float(np.vdot(zs, zs).real)
        P = np.outer(zs.conj(), zs) / r  # P[a, b] = zbar_a z_b / |z|^2
        eye = np.eye(n)
        Rf = np.einsum("ab,cd->abcd", eye - P, eye) / scale
        ric1 = n * (eye - P) / scale
        ric2 = (n - 1) * eye / scale + 0j
        ric3 = (eye - P) / scale
        return Oracle(
            frame=_hopf_frame(p) / np.sqrt(scale),
            frame_curvature=Rf,
            ricci=(ric1, ric2, ric3, ric3.conj().T),
            u=(n * n - n) / scale,
            v=(n - 1) / scale,
            eta_norm_sq=(n - 1) ** 2 / scale,
        )

    return oracle


def _product_frame(p: ChartPoint) -> np.ndarray:
    z1, z2 = p.coords
    return np.diag([(1 - abs(z1) ** 2) / np.sqrt(2), (1 + abs(z2) ** 2) / np.sqrt(2)]).astype(complex)


def _product_oracle(scale):
    def oracle(p: ChartPoint) -> Oracle:
        Rf = np.zeros((2, 2, 2, 2), dtype=complex)
        Rf[0, 0, 0, 0] = -1 / scale
        Rf[1, 1, 1, 1] = 1 / scale
        ric = np.diag([-1.0, 1.0]).astype(complex) / scale
        return Oracle(_product_frame(p) / np.sqrt(scale), Rf, (ric, ric, ric, ric), 0.0, 0.0, 0.0)

    return oracle


# -- public ------------------------------------------------------------------


def zoo_metric(name: str, n: int = 2, params: Mapping[str, float] | None = None) -> ZooEntry:
    """Built-in metric by name.

    ``params`` may contain ``scale`` (a positive constant multiplying the
    metric); oracles account for it.
    """
    params = dict(params or {})
    unknown = set(params) - {"scale"}
    if unknown:
        raise ZooError(f"unknown zoo parameters {sorted(unknown)}")
    scale = float(params.get("scale", 1.0))
    if scale <= 0:
        raise ZooError("scale must be positive")
    if name not in ZOO_NAMES:
        raise ZooError(f"unknown zoo metric {name!r}; choose from {', '.join(ZOO_NAMES)}")
    if n < 1:
        raise ZooError("dimension must be positive")

    oracle = frame = None
    if name == "flat":
        rows, region = _flat_rows(n), "1"
        tags = {"kahler", "balanced", "constant_H", "chern_flat"}
        sampler = _polydisk_sampler([1.5] * n)
    elif name == "fubini_study":
        rows, region = _kahler_potential_rows(n, +1), "1"
        tags = {"kahler", "balanced", "constant_H"}
        sampler = _polydisk_sampler([1.5] * n)
    elif name == "complex_hyperbolic":
        rows, region = _kahler_potential_rows(n, -1), f"1 - {_r2(n)}"
        tags = {"kahler", "balanced", "constant_H"}
        sampler = _ball_sampler(n, 0.8)
    elif name == "hopf":
        if n < 2:
            raise ZooError("hopf requires n >= 2")
        rows, region = _hopf_rows(n), _r2(n)
        tags = set()
        sampler = _shell_sampler(n, 0.5, 2.0)
        oracle = _hopf_oracle(scale)
        frame = lambda p: _hopf_frame(p) / np.sqrt(scale)  # noqa: E731
    else:  # product_case2
        if n != 2:
            raise ZooError("product_case2 requires n = 2")
        rows, region = _product_rows(), "1 - z1*zb1"
        tags = {"kahler", "balanced"}
        sampler = _polydisk_sampler([0.9, 2.0])
        oracle = _product_oracle(scale)
        frame = lambda p: _product_frame(p) / np.sqrt(scale)  # noqa: E731
    if n == 2:
        tags.add("self_dual")
    spec = MetricSpec.from_strings(_scaled(rows, scale), name=name)
    return ZooEntry(
        name=name,
        spec=spec,
        valid_region=ex.parse_expression(region, n),
        tags=frozenset(tags),
        sampler=sampler,
        oracle=oracle,
        canonical_frame=frame,
        params=params,
    )


def zoo_oracle(name: str, p: ChartPoint, params: Mapping[str, float] | None = None) -> Oracle:
    entry = zoo_metric(name, p.n, params)
    if entry.oracle is None:
        raise NoOracleError(f"no closed-form oracle for {name!r}; use property checks instead")
    if not entry.is_valid(p):
        raise ZooError(f"point {p.coords} lies outside the valid region of {name}")
    return entry.oracle(p)
