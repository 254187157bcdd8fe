"""Declarative JSON system configs and the built-in presets.

Schema::

    {
      "dimension": 2,
      "metric": {"kind": "euclidean" | "abs-diff" | "snowflake", "p": 2, "base": "euclidean", "b": 2},
      "maps": [{"matrix": [[0.5, 0], [0, 0.5]], "translation": [0, 0], "lipschitz": 0.5}],
      "F": {"kind": "log", "h": 0.5},
      "tau": {"kind": "constant", "c": 0.6} | {"kind": "expr", "expr": "0.5 + t", "floor": 0.5}
             | {"kind": "auto", "eps": 0.001},
      "iterate": {"tol": 1e-3 | "auto", "max_iter": 30, "cell": 1e-3 | "auto" | null},
      "seed": {"points": [[0, 0]]} | {"csv": "seed.csv"} | {"preset": "origin" | "corners"}
    }

``tol: "auto"`` means twice the cell; ``cell: "auto"`` means 2^-10 of the
bounding-box diagonal of the seed and the maps' fixed points. A ``tau`` of
kind ``auto`` is derived from the declared Lipschitz bounds and stored as a
constant.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .compact import PointSet
from .errors import ConfigError, FhutchError
from .hutchinson import AffineMap, IfsSystem, default_cell, lipschitz_tau
from .metric import (
    ABS_DIFF,
    DEFAULT_H,
    EUCLIDEAN,
    F_KINDS,
    SNOWFLAKE,
    TAU_CONSTANT,
    TAU_EXPR,
    BMetric,
    FGenerator,
    TauGenerator,
    abs_diff,
    euclidean,
    snowflake,
)
from .pointio import fmt_num, read_points_csv

AUTO = "auto"
SEED_PRESETS = ("origin", "corners")
_TOP_KEYS = {"dimension", "metric", "maps", "F", "tau", "iterate", "seed"}


@dataclass(frozen=True)
class SeedSpec:
    kind: str  # "points", "csv" or "preset"
    value: object


@dataclass(frozen=True)
class SystemConfig:
    dimension: int
    metric: BMetric
    maps: tuple
    F: FGenerator
    tau: TauGenerator
    tol: Union[float, str]
    max_iter: int
    cell: Union[float, str, None]
    seed: SeedSpec
    base_dir: Optional[Path] = None

    def system(self) -> IfsSystem:
        return IfsSystem(self.metric, self.maps, self.F, self.tau)

    def seed_set(self) -> PointSet:
        kind, value = self.seed.kind, self.seed.value
        if kind == "points":
            return PointSet(value, dim=self.dimension)
        if kind == "preset":
            return preset_seed(value, self.dimension)
        path = Path(value)
        if not path.is_absolute() and self.base_dir is not None:
            path = self.base_dir / path
        A = read_points_csv(path)
        if A.dim != self.dimension:
            raise ConfigError([("seed.csv", f"points have dimension {A.dim}, expected {self.dimension}")])
        return A

    def resolved_cell(self, seed: Optional[PointSet] = None) -> Optional[float]:
        if self.cell == AUTO:
            return default_cell(self.system(), seed if seed is not None else self.seed_set())
        return self.cell

    def resolved_tol(self, cell: Optional[float]) -> float:
        return 2.0 * cell if self.tol == AUTO else self.tol

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "metric": _metric_dict(self.metric),
            "maps": [_map_dict(f) for f in self.maps],
            "F": {"kind": self.F.kind, "h": self.F.h},
            "tau": _tau_dict(self.tau),
            "iterate": {"tol": self.tol, "max_iter": self.max_iter, "cell": self.cell},
            "seed": {self.seed.kind: self.seed.value},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def preset_seed(name: str, dim: int) -> PointSet:
    if name == "origin":
        return PointSet(np.zeros((1, dim)))
    if name == "corners":
        return PointSet(np.array(list(itertools.product((0.0, 1.0), repeat=dim))))
    raise ConfigError([("seed.preset", f"unknown seed preset {name!r}")])


def _metric_dict(m: BMetric) -> dict:
    if m.kind == SNOWFLAKE:
        return {"kind": SNOWFLAKE, "p": m.p, "base": m.base.kind, "b": m.b}
    return {"kind": m.kind}


def _map_dict(f: AffineMap) -> dict:
    out = {"matrix": f.linear.tolist(), "translation": f.translation.tolist()}
    if f.lipschitz is not None:
        out["lipschitz"] = f.lipschitz
    return out


def _tau_dict(tau: TauGenerator) -> dict:
    if tau.kind == TAU_CONSTANT:
        return {"kind": TAU_CONSTANT, "c": tau.c}
    return {"kind": TAU_EXPR, "expr": tau.expr, "floor": tau.liminf_floor}


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def _is_num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


class _Checker:
    def __init__(self):
        self.errors = []

    def err(self, path: str, msg: str) -> None:
        self.errors.append((path, msg))

    def section(self, doc: dict, key: str, required: bool = True) -> Optional[dict]:
        v = doc.get(key)
        if v is None:
            if required:
                self.err(key, "missing")
            return None
        if not isinstance(v, dict):
            self.err(key, "must be an object")
            return None
        return v


def _check_metric(c: _Checker, spec: Optional[dict], dim: Optional[int]) -> Optional[BMetric]:
    if spec is None:
        return None
    kind = spec.get("kind")
    if kind == EUCLIDEAN:
        m = euclidean()
    elif kind in (ABS_DIFF, "absolute-difference"):
        m = abs_diff()
    elif kind == SNOWFLAKE:
        p = spec.get("p")
        if not _is_num(p) or not p > 1:
            c.err("metric.p", "snowflake needs a number p > 1")
            return None
        base = spec.get("base", EUCLIDEAN)
        if base not in (EUCLIDEAN, ABS_DIFF):
            c.err("metric.base", f"must be {EUCLIDEAN!r} or {ABS_DIFF!r}")
            return None
        m = snowflake(float(p), euclidean() if base == EUCLIDEAN else abs_diff())
    else:
        c.err("metric.kind", f"unknown metric kind {kind!r}")
        return None
    if "b" in spec:
        b = spec["b"]
        want = m.expected_b
        if not _is_num(b) or abs(b - want) > 1e-12 * max(1.0, want):
            rule = "2^(p-1)" if m.kind == SNOWFLAKE else "b"
            c.err("metric.b", f"expected {rule}={fmt_num(want)}")
    if dim is not None and m.fixed_dim is not None and m.fixed_dim != dim:
        c.err("metric.kind", f"{m.label()} needs dimension {m.fixed_dim}, config has {dim}")
    return m


def _check_maps(c: _Checker, spec, dim: Optional[int]) -> tuple:
    if spec is None:
        c.err("maps", "missing")
        return ()
    if not isinstance(spec, list):
        c.err("maps", "must be a list")
        return ()
    if not spec:
        c.err("maps", "must be non-empty")
        return ()
    maps = []
    for i, item in enumerate(spec):
        path = f"maps[{i}]"
        if not isinstance(item, dict):
            c.err(path, "must be an object")
            continue
        mat, tr = item.get("matrix"), item.get("translation")
        try:
            A = np.array(mat, dtype=float)
            t = np.array(tr, dtype=float)
        except (TypeError, ValueError):
            c.err(path, "matrix and translation must be numeric arrays")
            continue
        if dim is not None and (A.shape != (dim, dim) or t.shape != (dim,)):
            c.err(path, f"dimension mismatch: expected a {dim}x{dim} matrix and a length-{dim} "
                  f"translation, got {A.shape} and {t.shape}")
            continue
        lip = item.get("lipschitz")
        if lip is not None and not _is_num(lip):
            c.err(f"{path}.lipschitz", "must be a number")
            continue
        try:
            maps.append(AffineMap(A, t, lip))
        except FhutchError as exc:
            c.err(path, str(exc))
    return tuple(maps)


def _check_F(c: _Checker, spec: Optional[dict]) -> Optional[FGenerator]:
    if spec is None:
        return None
    kind = spec.get("kind")
    if kind not in F_KINDS:
        c.err("F.kind", f"unknown F kind {kind!r}; expected one of {', '.join(F_KINDS)}")
        return None
    h = spec.get("h", DEFAULT_H[kind])
    if not _is_num(h) or not 0 < h < 1:
        c.err("F.h", "must lie in (0, 1)")
        return None
    return FGenerator(kind, float(h))


def _check_tau(c: _Checker, spec: Optional[dict], maps: tuple, metric) -> Optional[TauGenerator]:
    if spec is None:
        return None
    kind = spec.get("kind")
    if kind == TAU_CONSTANT:
        v = spec.get("c")
        if not _is_num(v) or not v > 0:
            c.err("tau.c", "must be a positive number")
            return None
        return TauGenerator.constant(float(v))
    if kind == TAU_EXPR:
        floor = spec.get("floor")
        if floor is not None and (not _is_num(floor) or not floor > 0):
            c.err("tau.floor", "must be a positive number")
            return None
        try:
            return TauGenerator.expression(str(spec.get("expr", "")), floor)
        except FhutchError as exc:
            c.err("tau.expr", str(exc))
            return None
    if kind == AUTO:
        eps = spec.get("eps", 1e-3)
        if not _is_num(eps) or not eps > 0:
            c.err("tau.eps", "must be a positive number")
            return None
        if not maps or metric is None:
            return None  # already reported elsewhere
        try:
            return lipschitz_tau(IfsSystem(metric, maps, FGenerator("log"), TauGenerator.constant(1.0)), eps)
        except FhutchError as exc:
            c.err("tau", str(exc))
            return None
    c.err("tau.kind", f"unknown tau kind {kind!r}")
    return None


def _check_iterate(c: _Checker, spec: Optional[dict]):
    spec = spec or {}
    tol = spec.get("tol", AUTO)
    if tol != AUTO and (not _is_num(tol) or not tol > 0):
        c.err("iterate.tol", "must be a positive number or \"auto\"")
    max_iter = spec.get("max_iter", 50)
    if not _is_int(max_iter) or max_iter < 1:
        c.err("iterate.max_iter", "must be a positive integer")
    cell = spec.get("cell", AUTO)
    if cell is not None and cell != AUTO and (not _is_num(cell) or not cell > 0):
        c.err("iterate.cell", "must be a positive number, \"auto\" or null")
    if tol == AUTO and cell is None:
        c.err("iterate.tol", "\"auto\" needs a cell")
    as_float = lambda v: float(v) if _is_num(v) else v  # noqa: E731
    return as_float(tol), max_iter, as_float(cell)


def _check_seed(c: _Checker, spec: Optional[dict], dim: Optional[int]) -> Optional[SeedSpec]:
    if spec is None:
        return SeedSpec("preset", "origin")
    keys = [k for k in ("points", "csv", "preset") if k in spec]
    if len(keys) != 1:
        c.err("seed", "give exactly one of points, csv, preset")
        return None
    kind = keys[0]
    value = spec[kind]
    if kind == "points":
        try:
            pts = np.array(value, dtype=float)
        except (TypeError, ValueError):
            c.err("seed.points", "must be a list of numeric points")
            return None
        if pts.ndim != 2 or len(pts) == 0 or (dim is not None and pts.shape[1] != dim):
            c.err("seed.points", f"must be a non-empty list of points of dimension {dim}")
            return None
        if not np.all(np.isfinite(pts)):
            c.err("seed.points", "coordinates must be finite")
            return None
        return SeedSpec("points", pts.tolist())
    if kind == "preset" and value not in SEED_PRESETS:
        c.err("seed.preset", f"unknown seed preset {value!r}; expected one of {', '.join(SEED_PRESETS)}")
        return None
    if kind == "csv" and not isinstance(value, str):
        c.err("seed.csv", "must be a path")
        return None
    return SeedSpec(kind, value)


def config_from_dict(doc, base_dir: Optional[Path] = None) -> SystemConfig:
    """Validate a decoded document; raises :class:`ConfigError` listing every problem."""
    if not isinstance(doc, dict):
        raise ConfigError([("", "config must be a JSON object")])
    c = _Checker()
    for key in sorted(set(doc) - _TOP_KEYS):
        c.err(key, "unknown field")
    dim = doc.get("dimension")
    if not _is_int(dim) or dim < 1:
        c.err("dimension", "must be a positive integer")
        dim = None
    metric = _check_metric(c, c.section(doc, "metric"), dim)
    maps = _check_maps(c, doc.get("maps"), dim)
    F = _check_F(c, c.section(doc, "F"))
    tau = _check_tau(c, c.section(doc, "tau"), maps, metric)
    tol, max_iter, cell = _check_iterate(c, c.section(doc, "iterate", required=False))
    seed = _check_seed(c, c.section(doc, "seed", required=False), dim)
    if c.errors:
        raise ConfigError(c.errors)
    return SystemConfig(dim, metric, maps, F, tau, tol, max_iter, cell, seed, base_dir)


def parse_config(text: str, base_dir: Optional[Path] = None) -> SystemConfig:
    """Parse and validate a JSON config; relative CSV paths resolve against ``base_dir``."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([("", f"invalid JSON at line {exc.lineno}: {exc.msg}")]) from None
    return config_from_dict(doc, base_dir)


# ---------------------------------------------------------------------------
# Presets
# ---------------------------------------------------------------------------


def _scaled(r: float, dim: int, t) -> dict:
    return {"matrix": (r * np.eye(dim)).tolist(), "translation": list(t), "lipschitz": r}


PRESETS = {
    "sierpinski": {
        "dimension": 2,
        "metric": {"kind": EUCLIDEAN},
        "maps": [_scaled(0.5, 2, t) for t in ((0, 0), (0.5, 0), (0.25, math.sqrt(3) / 4))],
        "F": {"kind": "log", "h": 0.5},
        "tau": {"kind": TAU_CONSTANT, "c": 0.6},
        "iterate": {"tol": AUTO, "max_iter": 30, "cell": AUTO},
        "seed": {"preset": "origin"},
    },
    "cantor": {
        "dimension": 1,
        "metric": {"kind": ABS_DIFF},
        "maps": [_scaled(1 / 3, 1, t) for t in ((0,), (2 / 3,))],
        "F": {"kind": "log", "h": 0.5},
        "tau": {"kind": TAU_CONSTANT, "c": 1.0},
        "iterate": {"tol": AUTO, "max_iter": 30, "cell": AUTO},
        "seed": {"preset": "origin"},
    },
    "square": {
        "dimension": 2,
        "metric": {"kind": EUCLIDEAN},
        "maps": [_scaled(0.5, 2, t) for t in itertools.product((0, 0.5), repeat=2)],
        "F": {"kind": "log", "h": 0.5},
        "tau": {"kind": TAU_CONSTANT, "c": 0.6},
        "iterate": {"tol": AUTO, "max_iter": 30, "cell": 2.0**-6},
        "seed": {"preset": "origin"},
    },
}


def preset_config(name: str) -> SystemConfig:
    if name not in PRESETS:
        raise ConfigError([("", f"unknown preset {name!r}; expected one of {', '.join(PRESETS)}")])
    return config_from_dict(PRESETS[name])


def load_config(source: str) -> SystemConfig:
    """Config from a file path, or a preset when ``source`` names one and no such file exists."""
    path = Path(source)
    if path.is_file():
        return parse_config(path.read_text(encoding="utf-8"), path.parent)
    if source in PRESETS:
        return preset_config(source)
    raise ConfigError([("", f"no config file or preset named {source!r}")])
