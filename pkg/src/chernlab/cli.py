"""Command line front end.

Exit codes: 0 success, 1 parse/usage error, 2 singular metric,
3 a verification suite failed.  JSON goes to stdout (or ``--output``),
diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from . import expr as ex
from .curvature import MixedCurvatureParams, geometry_at
from .expr import ChartPoint, ExpressionError, SingularEvaluationError
from .hermitian import SingularMetricError
from .metricfile import MetricFile, emit_zoo, load_metric_file
from .verify import (
    Tolerances,
    _jsonable,
    classify_metric,
    conformal_formula_check,
    constancy_scan,
    constant_curvature_consequences,
    region_sampler,
    sample_points,
    self_duality_scan,
    sphere_average_check,
    verify_oracle,
    verify_pointwise_identities,
    verify_tags,
)
from .zoo import ZOO_NAMES, zoo_metric

log = logging.getLogger("chernlab")

EXIT_OK, EXIT_PARSE, EXIT_SINGULAR, EXIT_FAIL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class InvalidPointError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    seed: int = 0
    samples: int = 10_000
    tolerance_overrides: dict[str, float] = field(default_factory=dict)
    output: str | None = None
    workers: int = 1

    def __post_init__(self):
        if self.samples < 1:
            raise UsageError("--samples must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise UsageError("--seed must be an unsigned 64-bit integer")

    def tolerances(self) -> Tolerances:
        return Tolerances.from_env().with_overrides(self.tolerance_overrides)


@dataclass
class Target:
    """A metric plus the means to sample valid points on it."""

    file: MetricFile
    entry: object = None  # ZooEntry when built from the zoo

    def __post_init__(self):
        self.spec = self.file.to_spec()
        if self.entry is not None:
            self.sampler = self.entry.sampler
        else:
            self.sampler = region_sampler(self.spec.n, self.file.region_expr(), params=self.spec.params)


def parse_point(text: str, n: int | None = None) -> ChartPoint:
    """``"1+0i,0.5-2i"`` -> ChartPoint."""
    coords = []
    for part in text.split(","):
        s = part.strip().replace(" ", "").replace("i", "j")
        try:
            coords.append(complex(s))
        except ValueError:
            raise UsageError(f"cannot parse coordinate {part!r}") from None
    if n is not None and len(coords) != n:
        raise UsageError(f"point has {len(coords)} coordinates, metric dimension is {n}")
    return ChartPoint(tuple(coords))


def _load_target(args) -> Target:
    if args.target is not None:
        if args.metric or args.zoo:
            raise UsageError("positional metric given together with --metric/--zoo")
        if args.target in ZOO_NAMES:
            args.zoo = args.target
        else:
            args.metric = args.target
    if args.metric and args.zoo:
        raise UsageError("give either --metric or --zoo, not both")
    if args.metric:
        return Target(load_metric_file(args.metric))
    if args.zoo:
        entry = zoo_metric(args.zoo, args.n)
        return Target(MetricFile.from_spec(entry.spec, entry.valid_region), entry)
    raise UsageError("one of --metric or --zoo is required")


def _config(args) -> RunConfig:
    overrides = {}
    for item in getattr(args, "tol", None) or []:
        key, _, value = item.partition("=")
        try:
            overrides[key] = float(value)
        except ValueError:
            raise UsageError(f"bad tolerance override {item!r}") from None
    return RunConfig(args.seed, args.samples, overrides, args.output, args.workers)


def _meta(command, target: Target, cfg: RunConfig, tol: Tolerances, **extra) -> dict:
    meta = {
        "tool": "chernlab",
        "version": __version__,
        "command": command,
        "metric": target.file.name,
        "dimension": target.file.dimension,
        "metric_hash": target.file.digest(),
        "seed": cfg.seed,
        "samples": cfg.samples,
        "tolerances": asdict(tol),
    }
    meta.update(extra)
    return meta


def _emit(doc: dict, output: str | None):
    text = json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n"
    if output:
        with open(output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def run_compute(args) -> int:
    target = _load_target(args)
    cfg = _config(args)
    p = parse_point(args.point, target.spec.n)
    region = target.file.region_expr()
    if region is not None and not ex.evaluate(region, p, target.spec.params).real > 0:
        raise InvalidPointError(f"point {args.point} lies outside the valid region {target.file.valid_region}")
    G = geometry_at(target.spec, p)
    if args.frame == "canonical":
        if target.entry is None or target.entry.canonical_frame is None:
            raise UsageError("no canonical frame for this metric; use --frame triangular")
        E = target.entry.canonical_frame(p)
    else:
        E = G.frame()
    Rf = G.frame_curvature(E)
    rs = G.ricci
    result = {
        "point": list(p.coords),
        "g": G.g,
        "g_inv": G.jet.g_inv,
        "R": G.R,
        "frame_kind": args.frame,
        "frame": E,
        "R_frame": Rf,
        "ric1": rs.ric1,
        "ric2": rs.ric2,
        "ric3": rs.ric3,
        "ric4": rs.ric4,
        "u": rs.u,
        "v": rs.v,
        "torsion": G.torsion.T,
        "eta": G.torsion.eta,
        "eta_norm_sq": G.torsion.eta_norm_sq,
    }
    if target.spec.n == 2:
        W = G.weyl_minus(E)
        result["weyl_minus"] = {"W1": W.W1, "W2": W.W2, "W3": W.W3, "max_abs": W.max_abs}
    tol = cfg.tolerances()
    _emit({"meta": _meta("compute", target, cfg, tol), "results": [result]}, cfg.output)
    return EXIT_OK


def _default_conformal_factors(n: int) -> list[str]:
    fs = ["z1*zb1", "log(1 + z1*zb1)", "0.25*(z1 + zb1)"]
    if n >= 2:
        fs.append("0.3*(z1*zb2 + z2*zb1) + 0.1*z2*zb2")
    return fs


def run_verify(args) -> int:
    target = _load_target(args)
    cfg = _config(args)
    tol = cfg.tolerances()
    spec, n = target.spec, target.spec.n
    points = sample_points(target.sampler, args.points, cfg.seed)
    suites = ["pointwise", "conformal", "average", "consequences"] if args.suite == "all" else [args.suite]
    mixed = MixedCurvatureParams(args.k, args.alpha, args.beta)
    results, gated, informational = [], [], []
    for suite in suites:
        if suite == "pointwise":
            kahler = True if target.entry is not None and "kahler" in target.entry.tags else None
            results += verify_pointwise_identities(spec, points, tol, kahler=kahler, workers=cfg.workers)
            if target.entry is not None:
                results += verify_oracle(target.entry, points, tol=tol, workers=cfg.workers)
                results += verify_tags(target.entry, points, tol=tol, seed=cfg.seed, workers=cfg.workers)
        elif suite == "conformal":
            for text in args.F or _default_conformal_factors(n):
                F = ex.parse_expression(text, n)
                results += conformal_formula_check(spec, F, points, tol, mixed)
        elif suite == "average":
            ks = [args.k] if args.k_given else [1, 2, 3, 4]
            for p_index, p in enumerate(points[: args.average_points]):
                for k in ks:
                    params = MixedCurvatureParams(k, args.alpha, args.beta)
                    results.append(sphere_average_check(spec, p, params, cfg.samples, cfg.seed + p_index, tol, cfg.workers))
        elif suite == "consequences":
            n_points = max(1, int(math.sqrt(cfg.samples)))
            scan = constancy_scan(spec, mixed, n_points, -(-cfg.samples // n_points), cfg.seed, target.sampler, tol, cfg.workers)
            if scan.passed:
                gated.append(scan)
                results += constant_curvature_consequences(spec, mixed, scan.mean, points, tol, seed=cfg.seed)
            else:
                # the consequences only apply to metrics with constant C; nothing to check
                scan.notes["skipped_consequences"] = True
                informational.append(scan)
    ok = all(r.passed for r in results + gated)
    results = results + gated + informational
    meta = _meta("verify", target, cfg, tol, suite=args.suite, points=args.points, k=args.k, alpha=args.alpha, beta=args.beta)
    meta["passed"] = ok
    _emit({"meta": meta, "results": [r.to_dict() for r in results]}, cfg.output)
    for r in results:
        if not r.passed and not any(r is x for x in informational):
            log.warning("FAILED %s on %s", getattr(r, "identity", getattr(r, "quantity", "?")), r.metric)
    return EXIT_OK if ok else EXIT_FAIL


def run_scan(args) -> int:
    target = _load_target(args)
    cfg = _config(args)
    tol = cfg.tolerances()
    spec = target.spec
    extra = {}
    if args.classify:
        result = classify_metric(spec, args.points, cfg.seed, target.sampler, tol)
        results = [result]
    elif args.self_dual:
        results = [self_duality_scan(spec, args.points, cfg.seed, target.sampler, tol, cfg.workers).to_dict()]
    else:
        if args.beta == 0:
            if not args.allow_beta_zero:
                raise UsageError("beta = 0 excluded (mixed curvature assumes beta != 0); pass --allow-beta-zero to override")
            log.warning("running with beta = 0 by request")
        params = MixedCurvatureParams(args.k, args.alpha, args.beta)
        per_point = -(-cfg.samples // args.points)
        results = [constancy_scan(spec, params, args.points, per_point, cfg.seed, target.sampler, tol, cfg.workers).to_dict()]
        extra = {"k": args.k, "alpha": args.alpha, "beta": args.beta}
    meta = _meta("scan", target, cfg, tol, points=args.points, **extra)
    _emit({"meta": meta, "results": results}, cfg.output)
    return EXIT_OK


def run_zoo(args) -> int:
    mf = emit_zoo(args.name, args.n)
    text = mf.dumps()
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser):
    src = p.add_argument_group("metric")
    src.add_argument("target", nargs="?", help="zoo name or metric file path (shorthand for --zoo / --metric)")
    src.add_argument("--metric", metavar="PATH", help="metric JSON file")
    src.add_argument("--zoo", choices=ZOO_NAMES, help="built-in metric")
    src.add_argument("--n", type=int, default=2, help="dimension for --zoo (default 2)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--tol", action="append", metavar="NAME=VALUE", help="override one tolerance")
    p.add_argument("--output", metavar="PATH")
    p.add_argument("--workers", type=int, default=1, help="threads for sampling loops; results do not depend on it")


def _add_mixed(p: argparse.ArgumentParser):
    p.add_argument("--k", type=int, choices=(1, 2, 3, 4), default=None)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=1.0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="chernlab", description="Chern curvature of Hermitian metrics given as formulas.")
    parser.add_argument("--version", action="version", version=f"chernlab {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("compute", help="all curvature quantities at one point")
    _add_common(p)
    p.add_argument("--point", required=True, help='coordinates, e.g. "1+0i,0"')
    p.add_argument("--frame", choices=("triangular", "canonical"), default="triangular")
    p.set_defaults(func=run_compute)

    p = sub.add_parser("verify", help="run identity suites")
    _add_common(p)
    p.add_argument("--suite", choices=("pointwise", "conformal", "average", "consequences", "all"), default="pointwise")
    p.add_argument("--points", type=int, default=20, help="sample points (default 20)")
    p.add_argument("--average-points", type=int, default=3)
    p.add_argument("--F", action="append", help="real conformal factor expression (repeatable)")
    _add_mixed(p)
    p.set_defaults(func=run_verify)

    p = sub.add_parser("scan", help="constancy / self-duality / classification scans")
    _add_common(p)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--self-dual", action="store_true")
    mode.add_argument("--classify", action="store_true")
    p.add_argument("--points", type=int, default=100)
    p.add_argument("--allow-beta-zero", action="store_true")
    _add_mixed(p)
    p.set_defaults(func=run_scan)

    p = sub.add_parser("zoo", help="emit a built-in metric as a metric file")
    p.add_argument("name", choices=ZOO_NAMES)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--output", metavar="PATH")
    p.set_defaults(func=run_zoo)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors, --help, --version
        return exc.code if isinstance(exc.code, int) else EXIT_PARSE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr, format="%(levelname)s %(message)s")
    if hasattr(args, "k"):
        args.k_given = args.k is not None
        if args.k is None:
            args.k = 2
    try:
        return args.func(args)
    except (SingularMetricError, np.linalg.LinAlgError, SingularEvaluationError, InvalidPointError) as exc:
        log.error("singular metric: %s", exc)
        return EXIT_SINGULAR
    except (UsageError, ExpressionError, ValueError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_PARSE

if __name__ == "__main__":
    sys.exit(main())
