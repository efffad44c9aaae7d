"""Axis-aligned box arithmetic in normalized [0, 1] frame coordinates."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


@dataclass(frozen=True, slots=True)
class BBox:
    """Box ``(x1, y1, x2, y2)`` with ``x1 < x2`` and ``y1 < y2``.

    Coordinates are continuous; area is ``(x2 - x1) * (y2 - y1)`` with no
    pixel offset. Range clamping happens at parse time (see ``dataio``).
    """

    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self) -> None:
        coords = (self.x1, self.y1, self.x2, self.y2)
        if not all(math.isfinite(c) for c in coords):
            raise ValueError(f"non-finite box coordinates {coords}")
        if not (self.x1 < self.x2 and self.y1 < self.y2):
            raise ValueError(f"degenerate box {coords}: need x1 < x2 and y1 < y2")
        if self.area <= 0.0:
            raise ValueError(f"degenerate box {coords}: area underflows to zero")

    @classmethod
    def from_seq(cls, seq: Sequence[float]) -> "BBox":
        if len(seq) != 4:
            raise ValueError(f"box needs 4 coordinates, got {len(seq)}")
        return cls(*(float(v) for v in seq))

    def to_list(self) -> list[float]:
        return [self.x1, self.y1, self.x2, self.y2]

    @property
    def area(self) -> float:
        return (self.x2 - self.x1) * (self.y2 - self.y1)


def intersection_area(a: BBox, b: BBox) -> float:
    w = min(a.x2, b.x2) - max(a.x1, b.x1)
    h = min(a.y2, b.y2) - max(a.y1, b.y1)
    if w <= 0.0 or h <= 0.0:
        return 0.0
    return w * h


def iou(a: BBox, b: BBox) -> float:
    """Intersection over union; 0 for disjoint boxes."""
    inter = intersection_area(a, b)
    if inter == 0.0:
        return 0.0
    # symmetric form so iou(a, b) == iou(b, a) bit for bit; the max guards
    # against rounding pushing the union below the larger box
    union = max((a.area + b.area) - inter, a.area, b.area)
    return inter / union


def iof(fg: BBox, container: BBox) -> float:
    """Intersection over the foreground box area (1.0 iff ``fg`` lies inside)."""
    inter = intersection_area(fg, container)
    if inter == 0.0:
        return 0.0
    return inter / fg.area


def enclosing_box(boxes: Iterable[BBox]) -> BBox:
    boxes = list(boxes)
    if not boxes:
        raise ValueError("empty member set")
    return BBox(
        min(b.x1 for b in boxes),
        min(b.y1 for b in boxes),
        max(b.x2 for b in boxes),
        max(b.y2 for b in boxes),
    )


def as_array(boxes: Sequence[BBox]) -> np.ndarray:
    """Stack boxes into an ``(N, 4)`` float64 array."""
    if not boxes:
        return np.zeros((0, 4), dtype=np.float64)
    return np.array([(b.x1, b.y1, b.x2, b.y2) for b in boxes], dtype=np.float64)


def pairwise_iou(a: Sequence[BBox], b: Sequence[BBox]) -> np.ndarray:
    """IoU matrix of shape ``(len(a), len(b))``.

    Uses the same operation order as :func:`iou`, so entries agree with the
    scalar function exactly.
    """
    A, B = as_array(a), as_array(b)
    w = np.minimum(A[:, None, 2], B[None, :, 2]) - np.maximum(A[:, None, 0], B[None, :, 0])
    h = np.minimum(A[:, None, 3], B[None, :, 3]) - np.maximum(A[:, None, 1], B[None, :, 1])
    overlap = (w > 0.0) & (h > 0.0)
    inter = np.where(overlap, w * h, 0.0)
    area_a = (A[:, 2] - A[:, 0]) * (A[:, 3] - A[:, 1])
    area_b = (B[:, 2] - B[:, 0]) * (B[:, 3] - B[:, 1])
    union = (area_a[:, None] + area_b[None, :]) - inter
    union = np.maximum(np.maximum(union, area_a[:, None]), area_b[None, :])
    out = np.zeros_like(inter)
    np.divide(inter, union, out=out, where=overlap)
    return out


def pairwise_iof(fg: Sequence[BBox], containers: Sequence[BBox]) -> np.ndarray:
    """IoF matrix: entry ``(i, j)`` is ``iof(fg[i], containers[j])``."""
    A, B = as_array(fg), as_array(containers)
    w = np.minimum(A[:, None, 2], B[None, :, 2]) - np.maximum(A[:, None, 0], B[None, :, 0])
    h = np.minimum(A[:, None, 3], B[None, :, 3]) - np.maximum(A[:, None, 1], B[None, :, 1])
    overlap = (w > 0.0) & (h > 0.0)
    inter = np.where(overlap, w * h, 0.0)
    area_fg = (A[:, 2] - A[:, 0]) * (A[:, 3] - A[:, 1])
    out = np.zeros_like(inter)
    np.divide(inter, np.broadcast_to(area_fg[:, None], inter.shape), out=out, where=overlap)
    return out
