"""Finite point sets as compact sets, and the Pompeiu-Hausdorff distance.

A :class:`PointSet` is a nonempty finite subset of R^n. Points are stored
deduplicated (exact coordinate equality) and sorted lexicographically, so
"first point" and tie-breaking are deterministic everywhere.

Every sup/inf over a finite set is an exact max/min. :func:`hausdorff` is the
brute-force reference; :func:`hausdorff_accelerated` answers the same query
through a :class:`GridIndex` and must agree with it to 1e-12.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .errors import DimensionError, InputError, UnsupportedMetricError
from .metric import BMetric

# Rows of the brute-force distance matrix per block; keeps memory at ~32 MB.
_BLOCK_ELEMS = 4_000_000


def _unique_rows(arr: np.ndarray) -> np.ndarray:
    """Distinct rows in lexicographic order (same result as ``np.unique(axis=0)``, faster)."""
    order = np.lexsort(arr.T[::-1])
    srt = arr[order]
    keep = np.ones(len(srt), dtype=bool)
    keep[1:] = np.any(srt[1:] != srt[:-1], axis=1)
    return srt[keep]


class PointSet:
    """An immutable, nonempty, deduplicated finite set of points in R^n."""

    __slots__ = ("_pts",)

    def __init__(self, points, dim: Optional[int] = None):
        arr = np.array(points, dtype=float)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1) if dim in (None, 1) else arr.reshape(-1, dim)
        if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
            raise InputError("a point set needs at least one point")
        if dim is not None and arr.shape[1] != dim:
            raise DimensionError(f"expected dimension {dim}, got {arr.shape[1]}")
        if not np.all(np.isfinite(arr)):
            raise InputError("point coordinates must be finite")
        arr = _unique_rows(arr + 0.0)  # + 0.0 folds -0.0 into 0.0
        arr.flags.writeable = False
        self._pts = arr

    @property
    def points(self) -> np.ndarray:
        return self._pts

    @property
    def dim(self) -> int:
        return self._pts.shape[1]

    def __len__(self) -> int:
        return self._pts.shape[0]

    def __iter__(self):
        return (tuple(float(c) for c in row) for row in self._pts)

    def __contains__(self, x) -> bool:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if x.shape != (self.dim,):
            return False
        return bool(np.any(np.all(self._pts == x, axis=1)))

    def __eq__(self, other) -> bool:
        if not isinstance(other, PointSet):
            return NotImplemented
        return self._pts.shape == other._pts.shape and bool(np.array_equal(self._pts, other._pts))

    def __hash__(self) -> int:
        return hash((self._pts.shape, self._pts.tobytes()))

    def __repr__(self) -> str:
        if len(self) <= 4:
            return f"PointSet({[tuple(p) for p in self]})"
        return f"PointSet(<{len(self)} points in R^{self.dim}>)"

    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        return self._pts.min(axis=0), self._pts.max(axis=0)


def _same_dim(*sets: PointSet) -> int:
    dims = {s.dim for s in sets}
    if len(dims) != 1:
        raise DimensionError(f"point sets have dimensions {sorted(dims)}")
    return dims.pop()


def union(A: PointSet, B: PointSet) -> PointSet:
    _same_dim(A, B)
    return PointSet(np.vstack([A.points, B.points]))


def point_to_set(x, B: PointSet, m: BMetric) -> float:
    """``d(x, B) = min over y in B of d(x, y)``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (B.dim,):
        raise DimensionError(f"point has dimension {x.size}, set has {B.dim}")
    m.check_dim(B.dim)
    return float(m.rows(x[None, :], B.points).min())


def nearest_brute(Q: np.ndarray, P: np.ndarray, m: BMetric) -> tuple[np.ndarray, np.ndarray]:
    """For each row of ``Q``: distance to and index of its nearest row of ``P``.

    Ties resolve to the smallest index in ``P``.
    """
    dist = np.empty(len(Q))
    idx = np.empty(len(Q), dtype=np.int64)
    step = max(1, _BLOCK_ELEMS // max(1, len(P)))
    for s in range(0, len(Q), step):
        block = m.pairwise(Q[s:s + step], P)
        j = np.argmin(block, axis=1)
        idx[s:s + step] = j
        dist[s:s + step] = block[np.arange(len(j)), j]
    return dist, idx


def sup_distance(A: PointSet, B: PointSet, m: BMetric) -> float:
    """``sup over a in A of d(a, B)`` (the directed Hausdorff excess of A over B)."""
    _same_dim(A, B)
    m.check_dim(A.dim)
    return float(nearest_brute(A.points, B.points, m)[0].max())


@dataclass(frozen=True)
class HausdorffValue:
    """H(A, B) with the two directed witnesses.

    ``witness_forward`` is ``(a, b)`` with ``a`` attaining ``sup_a d(a, B)`` and
    ``b`` its nearest point in B; ``witness_backward`` is the mirror image.
    """

    value: float
    forward: float
    backward: float
    witness_forward: tuple
    witness_backward: tuple

    def __float__(self) -> float:
        return self.value


def _directed(Qs: PointSet, dist: np.ndarray, idx: np.ndarray, Ps: PointSet):
    i = int(np.argmax(dist))
    pair = (tuple(float(c) for c in Qs.points[i]), tuple(float(c) for c in Ps.points[idx[i]]))
    return float(dist[i]), pair


def _assemble(A, B, fd, fi, bd, bi) -> HausdorffValue:
    fwd, wf = _directed(A, fd, fi, B)
    bwd, wb = _directed(B, bd, bi, A)
    return HausdorffValue(max(fwd, bwd), fwd, bwd, wf, wb)


def hausdorff(A: PointSet, B: PointSet, m: BMetric) -> HausdorffValue:
    """Exact Pompeiu-Hausdorff distance by exhaustive nearest-point search."""
    _same_dim(A, B)
    m.check_dim(A.dim)
    if len(A) * len(B) <= _BLOCK_ELEMS:
        # One matrix serves both directions; the metric is exactly symmetric.
        D = m.pairwise(A.points, B.points)
        fi, bi = np.argmin(D, axis=1), np.argmin(D, axis=0)
        fd = D[np.arange(len(A)), fi]
        bd = D[bi, np.arange(len(B))]
    else:
        fd, fi = nearest_brute(A.points, B.points, m)
        bd, bi = nearest_brute(B.points, A.points, m)
    return _assemble(A, B, fd, fi, bd, bi)


# ---------------------------------------------------------------------------
# Uniform grid index
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def ring_offsets(r: int, n: int) -> np.ndarray:
    """Integer offsets with Chebyshev norm exactly ``r`` in ``n`` dimensions."""
    if r == 0:
        return np.zeros((1, n), dtype=np.int64)
    rng = range(-r, r + 1)
    offs = [o for o in itertools.product(rng, repeat=n) if max(abs(v) for v in o) == r]
    return np.array(offs, dtype=np.int64)


def _auto_cell(pts: np.ndarray) -> float:
    ext = float(np.max(pts.max(axis=0) - pts.min(axis=0)))
    if ext == 0.0:
        return 1.0
    per_axis = max(1.0, math.ceil(len(pts) ** (1.0 / pts.shape[1])))
    return ext / per_axis


class GridIndex:
    """Points bucketed into a uniform grid of cubes of side ``cell_size``.

    Cells are ``floor(x / cell_size)``; buckets are stored as contiguous runs
    of a key-sorted copy of the points. Within a bucket points keep their
    original order, so original indices break distance ties.
    """

    def __init__(self, points, cell_size: Optional[float] = None, max_occupancy: float = 8.0):
        pts = points.points if isinstance(points, PointSet) else np.asarray(points, dtype=float)
        if pts.ndim != 2 or len(pts) == 0:
            raise InputError("cannot index an empty point collection")
        self.points = pts
        fixed = cell_size is not None
        s = float(cell_size) if fixed else _auto_cell(pts)
        if not s > 0:
            raise InputError("cell_size must be positive")
        while True:
            self._build(s)
            if fixed or len(self.starts) == len(pts) or len(pts) / len(self.starts) <= max_occupancy:
                break
            s *= 0.5
            if s * (1 << 20) < _auto_cell(pts):
                break

    def _build(self, s: float) -> None:
        pts = self.points
        n = pts.shape[1]
        while True:
            cells = np.floor(pts / s).astype(np.int64)
            lo, hi = cells.min(axis=0), cells.max(axis=0)
            span = hi - lo + 1
            if float(np.prod(span.astype(float))) < 2.0**62:
                break
            s *= 2.0
        self.cell_size = s
        self.lo, self.hi, self.span = lo, hi, span
        strides = np.ones(n, dtype=np.int64)
        for k in range(n - 2, -1, -1):
            strides[k] = strides[k + 1] * span[k + 1]
        self.strides = strides
        keys = ((cells - lo) * strides).sum(axis=1)
        order = np.argsort(keys, kind="stable")
        skeys = keys[order]
        self.order = order  # original index of each sorted point
        self.sorted_points = pts[order]
        self.keys, self.starts = np.unique(skeys, return_index=True)
        self.ends = np.append(self.starts[1:], len(skeys))

    @property
    def buckets(self) -> dict:
        """Map from integer cell coordinates to the points stored there."""
        out = {}
        for key, s, e in zip(self.keys, self.starts, self.ends):
            rem = int(key)
            coord = []
            for st in self.strides:
                coord.append(rem // int(st))
                rem %= int(st)
            cell = tuple(int(c) + int(l) for c, l in zip(coord, self.lo))
            out[cell] = self.sorted_points[s:e]
        return out

    def nearest(self, Q: np.ndarray, m: BMetric, chunk_pairs: int = 2_000_000):
        """Nearest indexed point for each row of ``Q``, as ``(dist, index)``.

        Rings of cells around each query's cell are scanned outward. A query is
        settled once its best distance is strictly below the smallest possible
        distance to any cell outside the scanned block, or once the block covers
        the whole grid. When a ring would hold more cells than the index has
        buckets, the remaining queries fall back to an exhaustive scan.
        """
        if not m.monotone:
            raise UnsupportedMetricError(f"{m.label()} is not monotone in Euclidean distance")
        Q = np.asarray(Q, dtype=float)
        n = self.points.shape[1]
        if Q.ndim != 2 or Q.shape[1] != n:
            raise DimensionError("query dimension does not match the index")
        s = self.cell_size
        qcell = np.floor(Q / s).astype(np.int64)
        best = np.full(len(Q), np.inf)
        bidx = np.full(len(Q), np.iinfo(np.int64).max)
        active = np.arange(len(Q))
        nbuckets = len(self.keys)
        r = 0
        while active.size:
            offs = ring_offsets(r, n)
            if r > 1 and len(offs) > nbuckets:
                d, j = nearest_brute(Q[active], self.points, m)
                best[active], bidx[active] = d, j
                break
            per = max(1, chunk_pairs // (len(offs) * 4))
            for c0 in range(0, active.size, per):
                qs = active[c0:c0 + per]
                self._scan(Q, qcell, qs, offs, m, best, bidx)
            # Settle queries whose best beats everything outside the block.
            qa, ca = Q[active], qcell[active]
            inner = qa - (ca - r) * s
            outer = (ca + r + 1) * s - qa
            margin = np.minimum(inner, outer).min(axis=1)
            margin = np.maximum(margin * (1.0 - 1e-9) - 1e-12 * s, 0.0)
            bound = m.from_euclidean(margin)
            covered = np.all((ca - r <= self.lo) & (ca + r >= self.hi), axis=1)
            done = covered | (best[active] < bound)
            active = active[~done]
            r += 1
        return best, bidx

    def _scan(self, Q, qcell, qs, offs, m, best, bidx) -> None:
        cells = qcell[qs][:, None, :] + offs[None, :, :]
        inside = np.all((cells >= self.lo) & (cells <= self.hi), axis=2)
        keys = ((cells - self.lo) * self.strides).sum(axis=2)
        pos = np.searchsorted(self.keys, keys)
        pos = np.minimum(pos, len(self.keys) - 1)
        hit = inside & (self.keys[pos] == keys)
        qi_rows, oi = np.nonzero(hit)
        if qi_rows.size == 0:
            return
        b = pos[qi_rows, oi]
        starts, counts = self.starts[b], self.ends[b] - self.starts[b]
        total = int(counts.sum())
        rep_q = np.repeat(qi_rows, counts)
        # Candidate positions: starts[k] + 0..counts[k]-1, flattened.
        offsets_within = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
        cand = np.repeat(starts, counts) + offsets_within
        qids = qs[rep_q]
        d = m.rows(Q[qids], self.sorted_points[cand])
        orig = self.order[cand]
        o = np.lexsort((orig, d, qids))
        qids_o = qids[o]
        first = np.ones(len(o), dtype=bool)
        first[1:] = qids_o[1:] != qids_o[:-1]
        sel = o[first]
        q_sel, d_sel, i_sel = qids[sel], d[sel], orig[sel]
        better = (d_sel < best[q_sel]) | ((d_sel == best[q_sel]) & (i_sel < bidx[q_sel]))
        best[q_sel[better]] = d_sel[better]
        bidx[q_sel[better]] = i_sel[better]


def hausdorff_accelerated(
    A: PointSet,
    B: PointSet,
    m: BMetric,
    index_b: Optional[GridIndex] = None,
    index_a: Optional[GridIndex] = None,
) -> HausdorffValue:
    """Grid-indexed Hausdorff distance; same value and witnesses as :func:`hausdorff`."""
    _same_dim(A, B)
    m.check_dim(A.dim)
    if not m.monotone:
        raise UnsupportedMetricError(f"{m.label()} is not monotone in Euclidean distance")
    index_b = index_b or GridIndex(B)
    index_a = index_a or GridIndex(A)
    fd, fi = index_b.nearest(A.points, m)
    bd, bi = index_a.nearest(B.points, m)
    return _assemble(A, B, fd, fi, bd, bi)


def hausdorff_auto(A: PointSet, B: PointSet, m: BMetric, threshold: int = 50_000) -> HausdorffValue:
    """Brute force for small inputs, grid-accelerated when sizes make it worthwhile."""
    if m.monotone and len(A) * len(B) > threshold:
        return hausdorff_accelerated(A, B, m)
    return hausdorff(A, B, m)


def diameter(A: PointSet, m: BMetric) -> float:
    """Largest pairwise distance; 0 exactly for singletons."""
    m.check_dim(A.dim)
    pts = A.points
    best = 0.0
    step = max(1, _BLOCK_ELEMS // len(pts))
    for s in range(0, len(pts), step):
        best = max(best, float(m.pairwise(pts[s:s + step], pts).max()))
    return best


def decimate(A: PointSet, cell: float) -> PointSet:
    """Keep the first point (in set order) of every occupied grid cell.

    The Euclidean Hausdorff distance between ``A`` and the result is at most
    ``cell * sqrt(n)``.
    """
    if not (cell > 0 and math.isfinite(cell)):
        raise InputError("decimation cell must be a positive real")
    cells = np.floor(A.points / cell).astype(np.int64)
    lo = cells.min(axis=0)
    span = cells.max(axis=0) - lo + 1
    if float(np.prod(span.astype(float))) < 2.0**62:
        # one integer per cell; 1-D unique is much faster than row-wise
        strides = np.append(np.cumprod(span[:0:-1])[::-1], 1)
        _, first = np.unique((cells - lo) @ strides, return_index=True)
    else:
        _, first = np.unique(cells, axis=0, return_index=True)
    if len(first) == len(A):
        return A
    return PointSet(A.points[np.sort(first)])
