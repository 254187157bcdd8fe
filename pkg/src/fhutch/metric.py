"""b-metrics on R^n and the generator families used by F-contractions.

Three distance kinds are built in:

* ``euclidean`` on any R^n (a true metric, b = 1);
* ``abs-diff`` on R (|x - y|, b = 1);
* ``snowflake`` ``rho = d**p`` over one of the above, p > 1, which relaxes the
  triangle inequality to ``rho(x, y) <= 2**(p-1) * (rho(x, z) + rho(z, y))``.

Every axiom that quantifies over all inputs (the relaxed triangle inequality,
the F1-F3 conditions, the lower limit of tau near zero) is checked here by
sampling on seeded random draws and dyadic grids. A sampler can falsify an
axiom but never prove it; the reports carry witnesses for that reason.
"""

from __future__ import annotations

import ast
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DimensionError, DomainError, InputError

EPS = 1e-12
DEFAULT_SEED = 0xF1A7

EUCLIDEAN = "euclidean"
ABS_DIFF = "abs-diff"
SNOWFLAKE = "snowflake"
CUSTOM = "custom"

# Outside this range the sum of squares may have lost precision.
_SAFE_LO = 1e-150
_SAFE_HI = 1e150


# ---------------------------------------------------------------------------
# b-metrics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BMetric:
    """A distance on R^n together with its declared relaxation constant ``b``.

    Use the factories :func:`euclidean`, :func:`abs_diff`, :func:`snowflake`
    and :func:`custom_metric`; they fill in the canonical ``b``. The
    constructor itself does not enforce ``b`` so that deliberately wrong
    declarations can be built for fault-injection runs (see :meth:`problems`).
    """

    kind: str
    b: float = 1.0
    p: Optional[float] = None
    base: Optional["BMetric"] = None
    func: Optional[Callable] = field(default=None, compare=False, repr=False)
    name: Optional[str] = None

    def __post_init__(self):
        if self.kind not in (EUCLIDEAN, ABS_DIFF, SNOWFLAKE, CUSTOM):
            raise InputError(f"unknown metric kind {self.kind!r}")
        if not (self.b >= 1.0 and math.isfinite(self.b)):
            raise InputError(f"b must be a finite real >= 1, got {self.b}")
        if self.kind == SNOWFLAKE:
            if self.p is None or not self.p > 1.0:
                raise InputError("snowflake metric needs p > 1")
            if self.base is None or self.base.kind not in (EUCLIDEAN, ABS_DIFF):
                raise InputError("snowflake base must be euclidean or abs-diff")
        if self.kind == CUSTOM and self.func is None:
            raise InputError("custom metric needs a distance function")

    @property
    def fixed_dim(self) -> Optional[int]:
        """Required ambient dimension, or None if any n works."""
        if self.kind == ABS_DIFF:
            return 1
        if self.kind == SNOWFLAKE:
            return self.base.fixed_dim
        return None

    @property
    def expected_b(self) -> Optional[float]:
        if self.kind in (EUCLIDEAN, ABS_DIFF):
            return 1.0
        if self.kind == SNOWFLAKE:
            return 2.0 ** (self.p - 1.0)
        return None

    @property
    def monotone(self) -> bool:
        """True when distances are an increasing function of Euclidean distance."""
        return self.kind != CUSTOM

    def problems(self) -> list[str]:
        """Consistency problems between the kind and the declared ``b``."""
        want = self.expected_b
        if want is not None and abs(self.b - want) > EPS * max(1.0, want):
            return [f"declared b={self.b:g} but this metric has b={want:g}"]
        return []

    def check_dim(self, n: int) -> None:
        need = self.fixed_dim
        if need is not None and n != need:
            raise DimensionError(f"{self.label()} needs dimension {need}, got {n}")

    def rows(self, x, y) -> np.ndarray:
        """Distances between aligned rows of ``x`` and ``y`` (broadcasting on leading axes)."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.kind == EUCLIDEAN:
            diff = x - y
            with np.errstate(over="ignore"):
                r = np.sqrt(np.sum(diff * diff, axis=-1))
            extreme = (r < _SAFE_LO) | (r > _SAFE_HI)
            if np.any(extreme):  # squares under/overflowed; rescale like hypot
                d = np.broadcast_to(diff, extreme.shape + diff.shape[-1:])[extreme]
                s = np.max(np.abs(d), axis=-1)
                safe = np.where(s > 0, s, 1.0)[:, None]
                r = np.array(r, copy=True)
                r[extreme] = s * np.sqrt(np.sum((d / safe) ** 2, axis=-1))
            return r
        if self.kind == ABS_DIFF:
            if x.shape[-1] != 1 or y.shape[-1] != 1:
                raise DimensionError("abs-diff metric is defined on R only")
            return np.abs(x[..., 0] - y[..., 0])
        if self.kind == SNOWFLAKE:
            return self.base.rows(x, y) ** self.p
        return np.asarray(self.func(x, y), dtype=float)

    def pairwise(self, x, y) -> np.ndarray:
        """Full distance matrix, shape ``(len(x), len(y))``."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return self.rows(x[:, None, :], y[None, :, :])

    def from_euclidean(self, e):
        """Map a Euclidean distance to this metric's scale (monotone kinds only)."""
        if self.kind in (EUCLIDEAN, ABS_DIFF):
            return e
        if self.kind == SNOWFLAKE:
            return self.base.from_euclidean(e) ** self.p
        raise NotImplementedError("custom metrics have no Euclidean transform")

    def label(self) -> str:
        if self.kind == SNOWFLAKE:
            return f"snowflake({self.base.label()}, p={self.p:g})"
        if self.kind == CUSTOM:
            return self.name or "custom"
        return self.kind


def euclidean() -> BMetric:
    return BMetric(EUCLIDEAN)


def abs_diff() -> BMetric:
    return BMetric(ABS_DIFF)


def snowflake(p: float, base: Optional[BMetric] = None, b: Optional[float] = None) -> BMetric:
    """``d**p`` over ``base`` (Euclidean by default); ``b`` defaults to ``2**(p-1)``."""
    base = base if base is not None else euclidean()
    if b is None:
        b = 2.0 ** (p - 1.0)
    return BMetric(SNOWFLAKE, b=b, p=p, base=base)


def custom_metric(func: Callable, b: float = 1.0, name: str = "custom") -> BMetric:
    """Wrap a vectorized ``func(x, y) -> distances`` over aligned rows."""
    return BMetric(CUSTOM, b=b, func=func, name=name)


def _as_point(x) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.ndim != 1:
        raise InputError("a point is a flat coordinate tuple")
    if not np.all(np.isfinite(arr)):
        raise InputError("point coordinates must be finite")
    return arr


def eval_metric(m: BMetric, x, y) -> float:
    """Distance between two points under ``m``."""
    xa, ya = _as_point(x), _as_point(y)
    if xa.shape != ya.shape:
        raise DimensionError(f"points have dimensions {xa.size} and {ya.size}")
    m.check_dim(xa.size)
    return float(m.rows(xa, ya))


@dataclass
class ViolationReport:
    """Outcome of sampling the relaxed triangle inequality."""

    b: float
    samples: int
    worst_ratio: float
    worst_triple: Optional[tuple]
    violations: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations


def check_b_triangle(
    m: BMetric,
    count: int = 10_000,
    seed: int = DEFAULT_SEED,
    low: float = -10.0,
    high: float = 10.0,
    dim: Optional[int] = None,
    triples=None,
) -> ViolationReport:
    """Sample ``d(x,y) <= b (d(x,z) + d(z,y))`` on random or given triples.

    ``triples`` overrides sampling with explicit ``(x, z, y)`` rows. The ratio
    ``d(x,y) / (d(x,z) + d(z,y))`` is reported for every triple; a violation is
    a ratio above ``b + 1e-12``.
    """
    if triples is not None:
        arr = np.asarray(triples, dtype=float)
        if arr.ndim == 2:
            arr = arr[..., None]
        if arr.ndim != 3 or arr.shape[1] != 3:
            raise InputError("triples must have shape (k, 3, n)")
        x, z, y = arr[:, 0], arr[:, 1], arr[:, 2]
    else:
        if count <= 0:
            raise InputError("empty triangle sample")
        n = dim or m.fixed_dim or 2
        rng = np.random.default_rng(seed)
        x, z, y = rng.uniform(low, high, size=(3, count, n))
    if len(x) == 0:
        raise InputError("empty triangle sample")
    m.check_dim(x.shape[1])

    dxy = m.rows(x, y)
    denom = m.rows(x, z) + m.rows(z, y)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(denom > 0, dxy / denom, 0.0)
    bad = np.flatnonzero(ratio > m.b + EPS)
    worst = int(np.argmax(ratio))
    violations = [
        (tuple(x[i]), tuple(z[i]), tuple(y[i]), float(ratio[i])) for i in bad
    ]
    return ViolationReport(
        b=m.b,
        samples=len(x),
        worst_ratio=float(ratio[worst]),
        worst_triple=(tuple(x[worst]), tuple(z[worst]), tuple(y[worst])),
        violations=violations,
    )


# ---------------------------------------------------------------------------
# The family of F generators
# ---------------------------------------------------------------------------

F_LOG = "log"
F_LOG_LINEAR = "log-plus-linear"
F_LOG_QUADRATIC = "log-quadratic"
F_INV_SQRT = "inverse-sqrt"
F_CUSTOM = "custom"

F_KINDS = (F_LOG, F_LOG_LINEAR, F_LOG_QUADRATIC, F_INV_SQRT)

# Exponents h in (0, 1) for which alpha**h * F(alpha) -> 0 as alpha -> 0+.
DEFAULT_H = {F_LOG: 0.5, F_LOG_LINEAR: 0.5, F_LOG_QUADRATIC: 0.5, F_INV_SQRT: 0.75}


def _f_log(a):
    return np.log(a)


def _f_log_linear(a):
    return np.log(a) + a


def _f_log_quadratic(a):
    return np.log(a * a + a) + a


def _f_inv_sqrt(a):
    return -1.0 / np.sqrt(a)


_F_FUNCS = {
    F_LOG: _f_log,
    F_LOG_LINEAR: _f_log_linear,
    F_LOG_QUADRATIC: _f_log_quadratic,
    F_INV_SQRT: _f_inv_sqrt,
}


@dataclass(frozen=True)
class FGenerator:
    kind: str
    h: Optional[float] = None
    func: Optional[Callable] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.kind == F_CUSTOM:
            if self.func is None:
                raise InputError("custom F needs a function")
        elif self.kind not in _F_FUNCS:
            raise InputError(f"unknown F kind {self.kind!r}")
        if self.h is None:
            object.__setattr__(self, "h", DEFAULT_H.get(self.kind, 0.5))

    @classmethod
    def custom(cls, func: Callable, h: float = 0.5) -> "FGenerator":
        return cls(F_CUSTOM, h=h, func=func)

    def __call__(self, alpha):
        a = np.asarray(alpha, dtype=float)
        if np.any(~(a > 0)):
            raise DomainError("F is defined for alpha > 0 only")
        fn = self.func if self.kind == F_CUSTOM else _F_FUNCS[self.kind]
        out = np.asarray(fn(a), dtype=float)
        if out.shape != a.shape:
            out = np.broadcast_to(out, a.shape).copy()
        return float(out) if out.ndim == 0 else out


def eval_F(F: FGenerator, alpha: float) -> float:
    return float(F(alpha))


@dataclass
class FAxiomReport:
    f1: bool
    f2: bool
    f3: bool
    f1_witness: Optional[tuple]  # (alpha, beta, F(alpha), F(beta)) of a failing pair
    f2_value: float  # F(2**-depth)
    f3_value: float  # |(2**-depth)**h * F(2**-depth)|
    h: float

    @property
    def passed(self) -> bool:
        return self.f1 and self.f2 and self.f3


def check_F_axioms(
    F: FGenerator,
    pairs: int = 1000,
    depth: int = 40,
    seed: int = DEFAULT_SEED,
    threshold: float = 10.0,
    tol: float = 1e-2,
) -> FAxiomReport:
    """Sample conditions F1-F3 for ``F``.

    F1 is checked on ``pairs`` log-uniform random pairs in ``[2**-depth, 2**20]``
    and along the dyadic ladder. F2 follows ``alpha_n = 2**-n`` and passes when
    ``F`` strictly decreases along it and ``F(2**-depth) < -threshold``. F3 uses
    the declared ``h``: ``|alpha_n**h F(alpha_n)|`` must be non-increasing over
    the last quarter of the ladder and end below ``tol``.
    """
    rng = np.random.default_rng(seed)
    lo, hi = -float(depth), 20.0
    u = np.sort(rng.uniform(lo, hi, size=(pairs, 2)), axis=1)
    alpha = np.exp2(u[:, 0])
    beta = np.exp2(u[:, 1])
    keep = alpha < beta
    alpha, beta = alpha[keep], beta[keep]
    ladder = np.exp2(-np.arange(-20, depth + 1, dtype=float))  # 2**20 down to 2**-depth
    with np.errstate(all="ignore"):
        fa, fb = np.asarray(F(alpha)), np.asarray(F(beta))
        fl = np.asarray(F(ladder))

    bad = np.flatnonzero(~(fa < fb))
    f1 = bad.size == 0 and bool(np.all(np.diff(fl) < 0))
    witness = None
    if bad.size:
        i = bad[0]
        witness = (float(alpha[i]), float(beta[i]), float(fa[i]), float(fb[i]))
    elif not f1:
        i = int(np.flatnonzero(~(np.diff(fl) < 0))[0])
        witness = (float(ladder[i + 1]), float(ladder[i]), float(fl[i + 1]), float(fl[i]))

    tail = fl[20:]  # F(2**-n), n = 0..depth
    f2_value = float(tail[-1])
    f2 = bool(np.all(np.diff(tail) < 0)) and f2_value < -threshold

    h = float(F.h)
    n = np.arange(depth + 1, dtype=float)
    with np.errstate(all="ignore"):
        decay = np.abs(np.exp2(-n * h) * tail)
    quarter = decay[-max(2, (depth + 1) // 4):]
    f3_value = float(decay[-1])
    f3 = 0.0 < h < 1.0 and bool(np.all(np.diff(quarter) <= 0)) and f3_value < tol
    return FAxiomReport(f1, f2, f3, witness, f2_value, f3_value, h)


# ---------------------------------------------------------------------------
# The family of tau generators
# ---------------------------------------------------------------------------

TAU_CONSTANT = "constant"
TAU_EXPR = "expr"

_UNARY = {"exp": np.exp, "ln": np.log, "sqrt": np.sqrt}
_BINOPS = {
    ast.Add: np.add,
    ast.Sub: np.subtract,
    ast.Mult: np.multiply,
    ast.Div: np.divide,
}


def _check_expr(node) -> None:
    if isinstance(node, ast.Expression):
        return _check_expr(node.body)
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        _check_expr(node.left)
        _check_expr(node.right)
    elif isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        _check_expr(node.operand)
    elif isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
            and not isinstance(node.value, bool):
        pass
    elif isinstance(node, ast.Name) and node.id == "t":
        pass
    elif (
        isinstance(node, ast.Call)
        and isinstance(node.func, ast.Name)
        and node.func.id in _UNARY
        and len(node.args) == 1
        and not node.keywords
    ):
        _check_expr(node.args[0])
    else:
        raise InputError(f"unsupported token in tau expression: {ast.dump(node)[:40]}")


def _eval_expr(node, t):
    if isinstance(node, ast.Expression):
        return _eval_expr(node.body, t)
    if isinstance(node, ast.BinOp):
        return _BINOPS[type(node.op)](_eval_expr(node.left, t), _eval_expr(node.right, t))
    if isinstance(node, ast.UnaryOp):
        v = _eval_expr(node.operand, t)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.Constant):
        return np.full_like(t, float(node.value))
    if isinstance(node, ast.Name):
        return t
    return _UNARY[node.func.id](_eval_expr(node.args[0], t))


def parse_tau_expr(text: str) -> ast.Expression:
    """Parse ``text`` as an arithmetic expression in ``t``.

    Allowed: numbers, ``t``, ``+ - * /``, unary minus, ``exp``, ``ln``, ``sqrt``.
    """
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise InputError(f"cannot parse tau expression {text!r}: {exc.msg}") from None
    _check_expr(tree)
    return tree


@dataclass(frozen=True)
class TauGenerator:
    """The gap function tau(t) of a generalized F-contraction.

    ``liminf_floor`` is the declared positive lower bound of tau near 0; it
    defaults to ``c`` for a constant and to ``1e-6`` for an expression.
    Positivity is not enforced at construction (see :func:`check_tau`).
    """

    kind: str
    c: Optional[float] = None
    expr: Optional[str] = None
    liminf_floor: Optional[float] = None
    _tree: Optional[ast.Expression] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.kind == TAU_CONSTANT:
            if self.c is None or not math.isfinite(self.c):
                raise InputError("constant tau needs a finite c")
            if self.liminf_floor is None:
                object.__setattr__(self, "liminf_floor", float(self.c))
        elif self.kind == TAU_EXPR:
            if not self.expr:
                raise InputError("expression tau needs an expression")
            object.__setattr__(self, "_tree", parse_tau_expr(self.expr))
            if self.liminf_floor is None:
                object.__setattr__(self, "liminf_floor", 1e-6)
        else:
            raise InputError(f"unknown tau kind {self.kind!r}")

    @classmethod
    def constant(cls, c: float) -> "TauGenerator":
        return cls(TAU_CONSTANT, c=float(c))

    @classmethod
    def expression(cls, expr: str, liminf_floor: Optional[float] = None) -> "TauGenerator":
        return cls(TAU_EXPR, expr=expr, liminf_floor=liminf_floor)

    def __call__(self, t):
        ta = np.asarray(t, dtype=float)
        if np.any(~(ta >= 0)):
            raise DomainError("tau is defined for t >= 0 only")
        if self.kind == TAU_CONSTANT:
            out = np.full(ta.shape, float(self.c))
        else:
            with np.errstate(all="ignore"):
                out = np.asarray(_eval_expr(self._tree, ta.astype(float)), dtype=float)
        return float(out) if out.ndim == 0 else out


def eval_tau(tau: TauGenerator, t: float) -> float:
    return float(tau(t))


@dataclass
class TauAxiomReport:
    positive: bool
    liminf: bool
    min_near_zero: float
    worst_t: Optional[float]  # a sampled t with tau(t) <= 0, if any

    @property
    def passed(self) -> bool:
        return self.positive and self.liminf


def check_tau_liminf(tau: TauGenerator, depth: int = 40) -> bool:
    """``min tau(2**-k), k = 0..depth`` must stay at or above the declared floor."""
    t = np.exp2(-np.arange(depth + 1, dtype=float))
    v = np.asarray(tau(t))
    floor = tau.liminf_floor
    return bool(floor > 0 and np.all(np.isfinite(v)) and v.min() >= floor)


def check_tau(tau: TauGenerator, count: int = 1000, depth: int = 40,
              seed: int = DEFAULT_SEED) -> TauAxiomReport:
    """Positivity on sampled ``t >= 0`` plus the lower-limit check at 0."""
    rng = np.random.default_rng(seed)
    t = np.concatenate([
        [0.0],
        np.exp2(-np.arange(depth + 1, dtype=float)),
        np.exp2(rng.uniform(-depth, 10.0, size=count)),
        rng.uniform(0.0, 100.0, size=count),
    ])
    v = np.asarray(tau(t))
    bad = np.flatnonzero(~(v > 0))
    near = np.asarray(tau(np.exp2(-np.arange(depth + 1, dtype=float))))
    return TauAxiomReport(
        positive=bad.size == 0,
        liminf=check_tau_liminf(tau, depth),
        min_near_zero=float(np.nanmin(near)) if np.any(np.isfinite(near)) else float("nan"),
        worst_t=float(t[bad[0]]) if bad.size else None,
    )
