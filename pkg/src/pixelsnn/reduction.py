"""Spatial reduction patterns: pixel -> input-group assignments merged by OR."""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

KINDS = ("full", "row_stride", "column_stride", "box")


@dataclass(frozen=True, eq=False)
class ReductionPattern:
    kind: str
    params: tuple[int, ...]
    assignment: np.ndarray  # (rows, cols) int group ids
    group_count: int

    @property
    def shape(self) -> tuple[int, int]:
        return self.assignment.shape

    @property
    def name(self) -> str:
        return format_pattern(self.kind, self.params)

    def members(self) -> list[set[tuple[int, int]]]:
        """Pixel coordinates belonging to each group id."""
        out = [set() for _ in range(self.group_count)]
        for (r, c), g in np.ndenumerate(self.assignment):
            out[g].add((r, c))
        return out


def build_pattern(kind: str, rows: int, cols: int, *params: int) -> ReductionPattern:
    """Build a repeating pixel-to-group assignment.

    ``row_stride(n)`` counts 0..n-1 down each column, moving column by column,
    so ``n == rows`` puts each row in its own group. ``column_stride(n)``
    counts 0..n-1 along each row, row by row, so ``n == cols`` gives one group
    per column. Strides longer than the dimension keep counting into the next
    column/row. ``box(w, h)`` tiles a w-wide, h-tall block of ids across the
    frame: pixel (r, c) -> (r % h) * w + (c % w).
    """
    if rows <= 0 or cols <= 0:
        raise ValueError("frame dimensions must be positive")
    if any(p <= 0 for p in params):
        raise ValueError("pattern parameters must be positive")
    r, c = np.indices((rows, cols))
    if kind == "full":
        if params:
            raise ValueError("full takes no parameters")
        ids = r * cols + c
    elif kind == "row_stride":
        (n,) = params
        ids = (c * rows + r) % n
    elif kind == "column_stride":
        (n,) = params
        ids = (r * cols + c) % n
    elif kind == "box":
        w, h = params
        ids = (r % h) * w + (c % w)
    else:
        raise ValueError(f"unknown pattern kind {kind!r}; expected one of {KINDS}")
    # relabel densely so every id in [0, group_count) is used (small frames may
    # not reach every stride/box id)
    used, dense = np.unique(ids, return_inverse=True)
    assignment = dense.reshape(rows, cols).astype(np.int64)
    assignment.setflags(write=False)
    return ReductionPattern(kind, tuple(params), assignment, int(len(used)))


def group_count(pattern: ReductionPattern) -> int:
    return pattern.group_count


def input_channel_count(pattern: ReductionPattern, bias: bool = False) -> int:
    return 2 * pattern.group_count + int(bias)


_NAME_RE = re.compile(r"^(full|row-stride:(\d+)|col-stride:(\d+)|box:(\d+)x(\d+))$")


def parse_pattern(name: str) -> tuple[str, tuple[int, ...]]:
    """Parse ``full``, ``row-stride:N``, ``col-stride:N`` or ``box:WxH``."""
    m = _NAME_RE.match(name.strip())
    if not m:
        raise ValueError(f"bad pattern name {name!r}; use full, row-stride:N, col-stride:N or box:WxH")
    if m.group(1) == "full":
        return "full", ()
    if m.group(2):
        return "row_stride", (int(m.group(2)),)
    if m.group(3):
        return "column_stride", (int(m.group(3)),)
    return "box", (int(m.group(4)), int(m.group(5)))


def format_pattern(kind: str, params: tuple[int, ...]) -> str:
    if kind == "full":
        return "full"
    if kind == "row_stride":
        return f"row-stride:{params[0]}"
    if kind == "column_stride":
        return f"col-stride:{params[0]}"
    return f"box:{params[0]}x{params[1]}"


def pattern_from_name(name: str, rows: int, cols: int) -> ReductionPattern:
    kind, params = parse_pattern(name)
    return build_pattern(kind, rows, cols, *params)


def reduce_spikes(per_pixel: np.ndarray, pattern: ReductionPattern) -> np.ndarray:
    """OR per-pixel spike trains into per-group channels.

    Args:
        per_pixel: bool array (rows, cols, 2, T); axis 2 is (rising, falling).
        pattern: assignment with matching (rows, cols).

    Returns:
        bool array (2 * group_count, T), group-major with rising before falling.
    """
    per_pixel = np.asarray(per_pixel, dtype=bool)
    if per_pixel.ndim != 4 or per_pixel.shape[:2] != pattern.shape or per_pixel.shape[2] != 2:
        raise ValueError(f"raster shape {per_pixel.shape} does not match pattern {pattern.shape} x 2 x T")
    T = per_pixel.shape[3]
    out = np.zeros((pattern.group_count, 2, T), dtype=bool)
    np.logical_or.at(out, pattern.assignment.ravel(), per_pixel.reshape(-1, 2, T))
    return out.reshape(2 * pattern.group_count, T)
