"""``fhutch`` command-line entry point.

Exit status: 0 success, 1 usage or I/O error (or failed verification),
2 iteration stopped without converging.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

from . import harness
from .compact import hausdorff, hausdorff_accelerated
from .config import SystemConfig, load_config, preset_seed
from .errors import FhutchError
from .hutchinson import default_cell, iterate
from .metric import (
    ABS_DIFF,
    DEFAULT_SEED,
    EUCLIDEAN,
    SNOWFLAKE,
    abs_diff,
    check_b_triangle,
    check_F_axioms,
    check_tau,
    euclidean,
    snowflake,
)
from .pointio import fmt_fixed12, fmt_num, read_points_csv, write_points_csv
from .render import parse_size, parse_viewport, rasterize

SUITES = (
    "axioms",
    "lemma14",
    "lemma15",
    "lifted",
    "convergence",
    "eq-1.2",
    "eq-1.3",
    "cor-2.5",
    "cor-2.6",
    "cor-2.7",
)

# Trajectory cells for the set-level certificate are coarse so T^2 stays small.
SET_LEVEL_FRACTION = 2.0**-6


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fail(msg: str) -> int:
    print(f"fhutch: error: {msg}", file=sys.stderr)
    return 1


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None if math.isnan(v) else ("inf" if v > 0 else "-inf")
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if hasattr(v, "item"):  # numpy scalar
        return _jsonable(v.item())
    return v


# ---------------------------------------------------------------------------
# iterate
# ---------------------------------------------------------------------------


def cmd_iterate(cfg: SystemConfig, outdir) -> int:
    S = cfg.system()
    A0 = cfg.seed_set()
    cell = cfg.resolved_cell(A0)
    tol = cfg.resolved_tol(cell)
    result, trace = iterate(S, A0, tol, cfg.max_iter, cell)
    out = Path(outdir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        write_points_csv(out / "attractor.csv", result.attractor)
        (out / "trace.csv").write_text(trace.to_csv(), encoding="utf-8")
        meta = dict(result.to_json(), tol=tol)
        (out / "result.json").write_text(json.dumps(_jsonable(meta), indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        return _fail(f"cannot write to {out}: {exc.strerror or exc}")
    print(f"{result.stop_reason} after {result.iterations} iterations: {len(result.attractor)} points, "
          f"residual {fmt_num(result.residual)}")
    return 0 if result.converged else 2


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def axioms_suite(cfg: SystemConfig, seed: int = DEFAULT_SEED) -> harness.SuiteReport:
    """F-class, tau-class and declared-b checks as one suite."""
    t0 = time.perf_counter()
    rep = harness.SuiteReport("axioms", 3)
    fa = check_F_axioms(cfg.F, seed=seed)
    for name, ok in (("F1", fa.f1), ("F2", fa.f2), ("F3", fa.f3)):
        if not ok:
            rep.failures.append(harness.Failure(0, seed, f"F={cfg.F.kind} fails {name}",
                                                math.nan, math.nan, math.nan))
    ta = check_tau(cfg.tau, seed=seed)
    if not ta.positive:
        rep.failures.append(harness.Failure(1, seed, f"tau not positive at t={ta.worst_t}",
                                            cfg.tau(ta.worst_t), 0.0, cfg.tau(ta.worst_t)))
    if not ta.liminf:
        rep.failures.append(harness.Failure(1, seed, "tau near 0 drops below its declared floor",
                                            ta.min_near_zero, cfg.tau.liminf_floor,
                                            ta.min_near_zero - cfg.tau.liminf_floor))
    vb = check_b_triangle(cfg.metric, seed=seed, dim=cfg.dimension)
    if not vb.passed:
        rep.failures.append(harness.Failure(2, seed, f"{len(vb.violations)} triples break the b-triangle",
                                            vb.worst_ratio, vb.b, vb.b - vb.worst_ratio))
    rep.notes = {"F_h": fa.h, "tau_min_near_zero": ta.min_near_zero, "b_worst_ratio": vb.worst_ratio}
    rep.ms = 1e3 * (time.perf_counter() - t0)
    return rep


def _other_seed(cfg: SystemConfig, A0):
    for name in ("corners", "origin"):
        B = preset_seed(name, cfg.dimension)
        if B != A0:
            return B
    return None


def run_suite(name: str, cfg: SystemConfig, cases: int, seed: int) -> harness.SuiteReport:
    S = cfg.system()
    if name == "axioms":
        return axioms_suite(cfg, seed)
    if name == "lemma14":
        return harness.run_lemma14_suite(cfg.metric, cases, seed)
    if name == "lemma15":
        return harness.run_lemma15_suite(cfg.metric, cases, seed)
    if name == "lifted":
        return harness.run_lifted_contraction_suite(S, max(1, cases // 2), seed)
    if name == "eq-1.2":
        return harness.run_pointwise_certificates(S, 10 * cases, seed)
    if name.startswith("cor-"):
        return harness.run_corollary_certificates(name, S, 10 * cases, seed, require_agreement=True)
    A0 = cfg.seed_set()
    if name == "eq-1.3":
        return harness.run_set_level_certificate(S, A0, 10, default_cell(S, A0, SET_LEVEL_FRACTION))
    if name == "convergence":
        cell = cfg.resolved_cell(A0)
        seeds = [A0] + [B for B in [_other_seed(cfg, A0)] if B is not None]
        return harness.run_convergence_suite(S, seeds, cfg.resolved_tol(cell), cell, cfg.max_iter)
    raise UsageError(f"unknown suite {name!r}")


def select_suites(spec: str) -> list:
    names = [s.strip() for s in spec.split(",") if s.strip()]
    if names == ["all"]:
        return list(SUITES)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise UsageError(f"unknown suite {unknown[0]!r}; choose from all, {', '.join(SUITES)}")
    return list(dict.fromkeys(names))


def cmd_verify(cfg: SystemConfig, suites: str, cases: int = 1000, seed: int = DEFAULT_SEED) -> int:
    names = select_suites(suites)
    if not names:
        return _fail("no suites selected")
    reports = [run_suite(n, cfg, cases, seed) for n in names]
    passed = all(r.passed for r in reports)
    doc = {"passed": passed, "suites": [r.to_json() for r in reports]}
    print(json.dumps(_jsonable(doc), indent=2))
    return 0 if passed else 1


# ---------------------------------------------------------------------------
# distance
# ---------------------------------------------------------------------------


def parse_metric(text: str):
    """``euclidean``, ``abs-diff`` or ``snowflake:p=2[,base=abs-diff]``."""
    kind, _, rest = text.partition(":")
    if kind == EUCLIDEAN and not rest:
        return euclidean()
    if kind == ABS_DIFF and not rest:
        return abs_diff()
    if kind == SNOWFLAKE:
        opts = dict(kv.split("=", 1) for kv in rest.split(",") if "=" in kv)
        try:
            p = float(opts["p"])
        except (KeyError, ValueError):
            raise UsageError("snowflake metric needs p, e.g. snowflake:p=2") from None
        base = opts.get("base", EUCLIDEAN)
        if base not in (EUCLIDEAN, ABS_DIFF):
            raise UsageError(f"snowflake base must be {EUCLIDEAN} or {ABS_DIFF}")
        return snowflake(p, euclidean() if base == EUCLIDEAN else abs_diff())
    raise UsageError(f"unknown metric {text!r}")


def _coords(p) -> str:
    return "(" + ", ".join(fmt_num(v) for v in p) + ")"


def cmd_distance(path_a, path_b, metric: str = EUCLIDEAN, accel: bool = False) -> int:
    m = parse_metric(metric)
    A, B = read_points_csv(path_a), read_points_csv(path_b)
    if A.dim != B.dim:
        return _fail(f"dimension mismatch: {A.dim} vs {B.dim}")
    h = hausdorff_accelerated(A, B, m) if accel else hausdorff(A, B, m)
    print(fmt_fixed12(h.value))
    a, b = h.witness_forward
    print(f"forward {fmt_fixed12(h.forward)} a={_coords(a)} b={_coords(b)}")
    b, a = h.witness_backward
    print(f"backward {fmt_fixed12(h.backward)} b={_coords(b)} a={_coords(a)}")
    return 0


# ---------------------------------------------------------------------------
# render
# ---------------------------------------------------------------------------


def cmd_render(path, out, size: str = "512x512", viewport=None) -> int:
    A = read_points_csv(path)
    w, h = parse_size(size)
    vp = parse_viewport(viewport) if viewport else None
    img = rasterize(A, w, h, vp)
    try:
        img.write(out)
    except OSError as exc:
        return _fail(f"cannot write {out}: {exc.strerror or exc}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fhutch", description="Hutchinson-operator attractors in b-metric spaces.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    it = sub.add_parser("iterate", help="iterate T from the config's seed to the attractor")
    it.add_argument("-c", "--config", required=True, help="config file or preset name")
    it.add_argument("-o", "--outdir", required=True)

    ve = sub.add_parser("verify", help="run verification suites and print a JSON report")
    ve.add_argument("-c", "--config", required=True, help="config file or preset name")
    ve.add_argument("--suites", default="all", help="comma-separated suite names, or all")
    ve.add_argument("--cases", type=int, default=1000, help="random cases per lemma suite")
    ve.add_argument("--seed", type=int, default=DEFAULT_SEED)

    di = sub.add_parser("distance", help="Hausdorff distance between two CSV point sets")
    di.add_argument("a")
    di.add_argument("b")
    di.add_argument("--metric", default=EUCLIDEAN)
    di.add_argument("--accel", action="store_true", help="use the grid index")

    re_ = sub.add_parser("render", help="render a planar point CSV as a PGM image")
    re_.add_argument("csv")
    re_.add_argument("-o", "--output", required=True)
    re_.add_argument("--size", default="512x512")
    re_.add_argument("--viewport", help="x0,y0,x1,y1")
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command == "iterate":
            return cmd_iterate(load_config(args.config), args.outdir)
        if args.command == "verify":
            if args.cases < 1:
                raise UsageError("--cases must be positive")
            return cmd_verify(load_config(args.config), args.suites, args.cases, args.seed)
        if args.command == "distance":
            return cmd_distance(args.a, args.b, args.metric, args.accel)
        return cmd_render(args.csv, args.output, args.size, args.viewport)
    except (UsageError, FhutchError) as exc:
        return _fail(str(exc))
    except OSError as exc:
        return _fail(f"{exc.filename or ''}: {exc.strerror or exc}".lstrip(": "))


if __name__ == "__main__":
    sys.exit(main())
