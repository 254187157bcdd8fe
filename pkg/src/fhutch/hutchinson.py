"""Iterated function systems of affine maps and their Hutchinson operator.

``T(A) = f_1(A) | f_2(A) | ... | f_N(A)`` acts on finite point sets. Deterministic
iteration ``A_{m+1} = T(A_m)`` grows the point count by up to a factor N per
step, so :func:`iterate` optionally thins each iterate with
:func:`~fhutch.compact.decimate`.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .compact import (
    GridIndex,
    PointSet,
    decimate,
    hausdorff,
    hausdorff_accelerated,
    hausdorff_auto,
)
from .errors import DimensionError, InputError
from .metric import BMetric, FGenerator, TauGenerator
from .pointio import fmt_num

CONVERGED = "converged"
MAX_ITER = "max-iter"
STALLED = "stalled"


class AffineMap:
    """``x -> linear @ x + translation``, optionally with a declared Lipschitz bound.

    The declared bound is the Euclidean operator norm bound ``c``; it is rejected
    if smaller than the spectral norm of ``linear``.
    """

    __slots__ = ("linear", "translation", "lipschitz")

    def __init__(self, linear, translation, lipschitz: Optional[float] = None):
        lin = np.array(linear, dtype=float)
        if lin.ndim == 0:
            lin = lin.reshape(1, 1)
        tr = np.atleast_1d(np.array(translation, dtype=float))
        n = tr.shape[0]
        if lin.shape != (n, n) or tr.ndim != 1:
            raise DimensionError(f"matrix {lin.shape} does not fit translation of length {n}")
        if not (np.all(np.isfinite(lin)) and np.all(np.isfinite(tr))):
            raise InputError("affine map entries must be finite")
        if lipschitz is not None:
            lipschitz = float(lipschitz)
            norm = float(np.linalg.norm(lin, 2))
            if not lipschitz >= 0 or lipschitz < norm - 1e-9:
                raise InputError(f"declared lipschitz {lipschitz:g} below operator norm {norm:g}")
        lin.flags.writeable = False
        tr.flags.writeable = False
        self.linear, self.translation, self.lipschitz = lin, tr, lipschitz

    @classmethod
    def scaling(cls, ratio: float, translation) -> "AffineMap":
        tr = np.atleast_1d(np.asarray(translation, dtype=float))
        return cls(ratio * np.eye(tr.size), tr, lipschitz=abs(ratio))

    @property
    def dim(self) -> int:
        return self.translation.shape[0]

    def __call__(self, x):
        return np.asarray(x, dtype=float) @ self.linear.T + self.translation

    def fixed_point(self) -> Optional[np.ndarray]:
        """Solution of ``x = f(x)``, or None if ``I - linear`` is singular."""
        try:
            return np.linalg.solve(np.eye(self.dim) - self.linear, self.translation)
        except np.linalg.LinAlgError:
            return None

    def __eq__(self, other):
        if not isinstance(other, AffineMap):
            return NotImplemented
        return (np.array_equal(self.linear, other.linear)
                and np.array_equal(self.translation, other.translation)
                and self.lipschitz == other.lipschitz)

    def __repr__(self):
        return f"AffineMap({self.linear.tolist()}, {self.translation.tolist()}, lipschitz={self.lipschitz})"


@dataclass(frozen=True)
class IfsSystem:
    metric: BMetric
    maps: tuple
    F: FGenerator
    tau: TauGenerator

    def __post_init__(self):
        maps = tuple(self.maps)
        if not maps:
            raise InputError("an IFS needs at least one map")
        dims = {f.dim for f in maps}
        if len(dims) != 1:
            raise DimensionError(f"maps have dimensions {sorted(dims)}")
        self.metric.check_dim(dims.pop())
        object.__setattr__(self, "maps", maps)

    @property
    def dim(self) -> int:
        return self.maps[0].dim

    @property
    def b(self) -> float:
        return self.metric.b


def apply_map(f: AffineMap, A: PointSet) -> PointSet:
    if f.dim != A.dim:
        raise DimensionError(f"map acts on R^{f.dim}, set lives in R^{A.dim}")
    return PointSet(f(A.points))


def hutchinson_step(S: IfsSystem, A: PointSet) -> PointSet:
    """``T(A)``: the union of the images of ``A`` under every map."""
    if S.dim != A.dim:
        raise DimensionError(f"system acts on R^{S.dim}, set lives in R^{A.dim}")
    return PointSet(np.vstack([f(A.points) for f in S.maps]))


def default_cell(S: IfsSystem, A0: PointSet, fraction: float = 2.0**-10) -> float:
    """``fraction`` of the bounding-box diagonal of the seed and the maps' fixed points.

    The fixed points of the maps lie on the attractor, so this box is a cheap
    proxy for its extent even when the seed is a single point.
    """
    pts = [A0.points]
    for f in S.maps:
        fp = f.fixed_point()
        if fp is not None and np.all(np.isfinite(fp)):
            pts.append(fp[None, :])
    allp = np.vstack(pts)
    diag = float(np.linalg.norm(allp.max(axis=0) - allp.min(axis=0)))
    return fraction * (diag if diag > 0 else 1.0)


@dataclass(frozen=True)
class StepRecord:
    m: int
    card: int  # |A_m|
    h_step: float  # H(A_m, A_{m+1})
    ms: float


@dataclass
class IterationTrace:
    records: list = field(default_factory=list)
    stop_reason: Optional[str] = None

    @property
    def h_values(self) -> np.ndarray:
        return np.array([r.h_step for r in self.records])

    def to_csv(self) -> str:
        lines = ["m,card,h_step,ms"]
        for r in self.records:
            lines.append(f"{r.m},{r.card},{fmt_num(r.h_step)},{fmt_num(round(r.ms, 3))}")
        return "\n".join(lines) + "\n"


@dataclass
class AttractorResult:
    attractor: PointSet
    residual: float  # H(U, T(U)) against the undecimated T(U)
    iterations: int
    cell: Optional[float]
    stop_reason: str

    @property
    def converged(self) -> bool:
        return self.stop_reason == CONVERGED

    def to_json(self) -> dict:
        return {
            "iterations": self.iterations,
            "residual": self.residual,
            "cell": self.cell,
            "stop_reason": self.stop_reason,
            "points": len(self.attractor),
        }


def iterate(
    S: IfsSystem,
    A0: PointSet,
    tol: float,
    max_iter: int = 100,
    cell: Optional[float] = None,
    patience: int = 5,
) -> tuple[AttractorResult, IterationTrace]:
    """Run ``A_{m+1} = decimate(T(A_m), cell)`` until ``H(A_m, A_{m+1}) <= tol``.

    ``cell=None`` disables decimation. The returned attractor is the last
    iterate ``A_{m+1}``; ``iterations`` is the index ``m`` of the stopping step,
    so a seed with ``T(A_0) = A_0`` reports 0. If the step distance fails to
    reach a new minimum for ``patience`` consecutive steps (decimation jitter)
    the run stops as ``stalled``.
    """
    if not tol > 0:
        raise InputError("tol must be positive")
    if max_iter < 1:
        raise InputError("max_iter must be a positive integer")
    if cell is not None and not cell > 0:
        raise InputError("cell must be positive or None")
    if A0.dim != S.dim:
        raise DimensionError(f"seed lives in R^{A0.dim}, system acts on R^{S.dim}")

    trace = IterationTrace()
    A = decimate(A0, cell) if cell is not None else A0
    idx_a = None
    best, since_best = math.inf, 0
    reason = MAX_ITER
    for m in range(max_iter):
        t0 = time.perf_counter()
        nxt = hutchinson_step(S, A)
        if cell is not None:
            nxt = decimate(nxt, cell)
        hv, idx_a = _step_distance(A, nxt, S.metric, idx_a)
        trace.records.append(StepRecord(m, len(A), hv, 1e3 * (time.perf_counter() - t0)))
        A = nxt
        if hv <= tol:
            reason = CONVERGED
            break
        if hv < best:
            best, since_best = hv, 0
        else:
            since_best += 1
            if since_best >= patience:
                reason = STALLED
                break
    trace.stop_reason = reason
    residual = hausdorff_auto(A, hutchinson_step(S, A), S.metric).value
    result = AttractorResult(A, residual, len(trace.records) - 1, cell, reason)
    return result, trace


def _step_distance(A: PointSet, B: PointSet, m: BMetric, idx_a):
    """H(A, B), reusing the index of ``A`` built on the previous step."""
    if not m.monotone or len(A) * len(B) <= 50_000:
        return hausdorff(A, B, m).value, None
    idx_b = GridIndex(B)
    if idx_a is None or idx_a.points is not A.points:
        idx_a = GridIndex(A)
    return hausdorff_accelerated(A, B, m, index_b=idx_b, index_a=idx_a).value, idx_b


@dataclass(frozen=True)
class CiricWeight:
    """The seven-term maximum ``M_T(A, B)`` and its constituents."""

    value: float
    terms: tuple

    NAMES = (
        "H(A,B)",
        "H(A,TA)",
        "H(B,TB)",
        "(H(A,TB)+H(B,TA))/2b",
        "H(T2A,TA)",
        "H(T2A,B)",
        "H(T2A,TB)",
    )

    def as_dict(self) -> dict:
        return dict(zip(self.NAMES, self.terms))


def ciric_weight(S: IfsSystem, A: PointSet, B: PointSet, images: Optional[tuple] = None) -> CiricWeight:
    """Compute ``M_T(A, B)`` with exact (undecimated) ``T(A)``, ``T(B)``, ``T^2(A)``.

    ``images`` may pass precomputed ``(T(A), T(B), T^2(A))``.
    """
    if images is None:
        TA, TB = hutchinson_step(S, A), hutchinson_step(S, B)
        T2A = hutchinson_step(S, TA)
    else:
        TA, TB, T2A = images
    m, b = S.metric, S.metric.b

    def H(X, Y):
        return hausdorff_auto(X, Y, m).value

    terms = (
        H(A, B),
        H(A, TA),
        H(B, TB),
        (H(A, TB) + H(B, TA)) / (2.0 * b),
        H(T2A, TA),
        H(T2A, B),
        H(T2A, TB),
    )
    return CiricWeight(max(terms), terms)


def chaos_game(
    S: IfsSystem,
    start,
    n_points: int,
    burn_in: int = 0,
    seed: int = 0,
) -> PointSet:
    """Random orbit ``x_{k+1} = f_{j_k}(x_k)`` with ``j_k`` uniform over the maps.

    Records ``x_1 .. x_{n_points}`` and drops the first ``burn_in`` of them.
    """
    if not (0 <= burn_in < n_points):
        raise InputError("need n_points > burn_in >= 0")
    x = np.atleast_1d(np.asarray(start, dtype=float)).copy()
    if x.shape != (S.dim,):
        raise DimensionError("start point dimension does not match the system")
    rng = np.random.default_rng(seed)
    choice = rng.integers(0, len(S.maps), size=n_points)
    lins = np.stack([f.linear for f in S.maps])
    trs = np.stack([f.translation for f in S.maps])
    out = np.empty((n_points, S.dim))
    for k in range(n_points):
        j = choice[k]
        x = lins[j] @ x + trs[j]
        out[k] = x
    return PointSet(out[burn_in:])


def fixed_point_iteration(f: AffineMap, x0, tol: float, max_iter: int = 1000):
    """Scalar Picard iteration ``x_{k+1} = f(x_k)`` on a single point.

    This is the singleton case of :func:`iterate`; returns ``(x, steps)``.
    """
    x = np.atleast_1d(np.asarray(x0, dtype=float))
    for k in range(max_iter):
        nxt = f(x)
        if np.linalg.norm(nxt - x) <= tol:
            return nxt, k
        x = nxt
    return x, max_iter


def lipschitz_tau(S: IfsSystem, eps: float = 1e-3) -> TauGenerator:
    """Constant ``tau = -ln(max_i c_i) - eps`` from declared Lipschitz bounds.

    The bound is taken in the metric's own scale: a map with Euclidean
    Lipschitz constant ``c`` scales snowflake distances by ``c**p``. Valid for
    ``F = log`` certificates.
    """
    cs = [f.lipschitz for f in S.maps]
    if any(c is None for c in cs):
        raise InputError("every map needs a declared lipschitz bound")
    worst = max(cs)
    if S.metric.monotone and S.metric.kind == "snowflake":
        worst = worst ** S.metric.p
    if not 0 < worst < 1:
        raise InputError(f"maps are not strict contractions (max ratio {worst:g})")
    return TauGenerator.constant(-math.log(worst) - eps)


def images_of(S: IfsSystem, A: PointSet, B: PointSet):
    """``(T(A), T(B), T^2(A))`` computed without decimation."""
    TA = hutchinson_step(S, A)
    return TA, hutchinson_step(S, B), hutchinson_step(S, TA)
