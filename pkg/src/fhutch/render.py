"""Rasterize planar point sets into binary PGM images."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .compact import PointSet
from .errors import DimensionError, InputError

MARGIN = 0.05


@dataclass(frozen=True)
class Viewport:
    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self):
        vals = (self.x0, self.y0, self.x1, self.y1)
        if not all(np.isfinite(vals)):
            raise InputError("viewport corners must be finite")
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise InputError("viewport is empty: need x0 < x1 and y0 < y1")


def auto_viewport(A: PointSet, margin: float = MARGIN) -> Viewport:
    """Bounding box grown by ``margin`` of its extent on every side.

    A flat axis (all points share the coordinate) gets the extent of the other
    axis, or 1 if the set is a single point.
    """
    lo, hi = A.bbox()
    ext = hi - lo
    fallback = float(ext.max()) if ext.max() > 0 else 1.0
    ext = np.where(ext > 0, ext, fallback)
    mid = (lo + hi) / 2
    half = ext / 2 * (1 + 2 * margin)
    return Viewport(mid[0] - half[0], mid[1] - half[1], mid[0] + half[0], mid[1] + half[1])


@dataclass
class RasterImage:
    width: int
    height: int
    viewport: Viewport
    hits: np.ndarray  # (height, width) counts, row 0 at the top

    def gray(self) -> np.ndarray:
        """Hit counts tone-mapped to 0..255 by ``255 * log(1+c) / log(1+max)``."""
        top = int(self.hits.max())
        if top == 0:
            return np.zeros(self.hits.shape, dtype=np.uint8)
        scaled = np.log1p(self.hits) / np.log1p(top)
        return np.rint(255 * scaled).astype(np.uint8)

    def to_pgm(self) -> bytes:
        header = f"P5\n{self.width} {self.height}\n255\n".encode("ascii")
        return header + self.gray().tobytes()

    def write(self, path) -> None:
        Path(path).write_bytes(self.to_pgm())


def rasterize(A: PointSet, width: int, height: int, viewport: Optional[Viewport] = None) -> RasterImage:
    """Count points per pixel; each point lands in the pixel containing it.

    Points outside the viewport are dropped; the top and right edges belong to
    the last row and column.
    """
    if A.dim != 2:
        raise DimensionError("render requires dimension 2")
    if width < 1 or height < 1:
        raise InputError("raster size must be at least 1x1")
    vp = viewport or auto_viewport(A)
    x, y = A.points[:, 0], A.points[:, 1]
    inside = (x >= vp.x0) & (x <= vp.x1) & (y >= vp.y0) & (y <= vp.y1)
    col = np.floor((x[inside] - vp.x0) / (vp.x1 - vp.x0) * width).astype(np.int64)
    row = np.floor((y[inside] - vp.y0) / (vp.y1 - vp.y0) * height).astype(np.int64)
    col = np.minimum(col, width - 1)
    row = height - 1 - np.minimum(row, height - 1)
    hits = np.zeros((height, width), dtype=np.int64)
    np.add.at(hits, (row, col), 1)
    return RasterImage(width, height, vp, hits)


def parse_size(text: str) -> tuple[int, int]:
    try:
        w, h = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise InputError(f"size must look like 512x512, got {text!r}") from None
    if w < 1 or h < 1:
        raise InputError("raster size must be at least 1x1")
    return w, h


def parse_viewport(text: str) -> Viewport:
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise InputError(f"viewport must be x0,y0,x1,y1, got {text!r}") from None
    if len(vals) != 4:
        raise InputError(f"viewport must be x0,y0,x1,y1, got {text!r}")
    return Viewport(*vals)
