"""CSV exchange for point sets and stable number formatting."""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path

import numpy as np

from .compact import PointSet
from .errors import InputError


def fmt_num(x: float) -> str:
    """Shortest text for ``x`` at no more than 12 significant digits."""
    x = float(x)
    if x == 0.0:
        return "0"
    if not math.isfinite(x):
        return repr(x)
    short = repr(x)
    if short.endswith(".0"):
        short = short[:-2]
    digits = short.split("e")[0].replace("-", "").replace(".", "").lstrip("0")
    return short if len(digits) <= 12 else f"{x:.12g}"


def fmt_fixed12(x: float) -> str:
    """``x`` with exactly 12 significant digits (``0`` printed bare)."""
    x = float(x)
    return "0" if x == 0.0 else f"{x:#.12g}"


def parse_points_csv(text: str) -> PointSet:
    rows = []
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        cells = [c.strip() for c in row]
        if not cells or all(c == "" for c in cells):
            continue
        try:
            rows.append([float(c) for c in cells])
        except ValueError:
            if lineno == 1 and not rows:
                continue  # header line
            raise InputError(f"line {lineno}: non-numeric value in {row!r}") from None
    if not rows:
        raise InputError("no points in CSV input")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise InputError(f"rows have differing column counts {sorted(widths)}")
    return PointSet(np.array(rows))


def read_points_csv(path) -> PointSet:
    return parse_points_csv(Path(path).read_text(encoding="utf-8"))


def points_to_csv(A: PointSet, header: bool = False) -> str:
    lines = []
    if header:
        lines.append(",".join(f"x{k}" for k in range(A.dim)))
    for row in A.points:
        lines.append(",".join(fmt_num(v) for v in row))
    return "\n".join(lines) + "\n"


def write_points_csv(path, A: PointSet, header: bool = False) -> None:
    Path(path).write_text(points_to_csv(A, header), encoding="utf-8")
