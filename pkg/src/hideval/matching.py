"""Person-to-person cost construction and optimal bipartite matching.

The cost between a ground-truth box and a predicted box is ``-IoU`` when the
pair overlaps enough (``IoU >= 0.5`` by default) and a large constant
``EPSILON`` otherwise, so the minimum-cost assignment first maximises the
number of overlapping pairs and then their total IoU. Pairs below the
overlap floor are dropped afterwards by :func:`filter_matches`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .geometry import BBox, iou, pairwise_iou

EPSILON = 1e6
MATCH_IOU = 0.5

Pair = tuple[int, int]


@dataclass(frozen=True)
class Assignment:
    """One-to-one (row, col) pairs, kept sorted by row then col."""

    pairs: tuple[Pair, ...] = ()

    def __post_init__(self) -> None:
        pairs = tuple(sorted((int(r), int(c)) for r, c in self.pairs))
        rows = [r for r, _ in pairs]
        cols = [c for _, c in pairs]
        if len(set(rows)) != len(rows) or len(set(cols)) != len(cols):
            raise ValueError(f"assignment is not one-to-one: {pairs}")
        object.__setattr__(self, "pairs", pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[Pair]:
        return iter(self.pairs)

    def total(self, cost: np.ndarray) -> float:
        """Exactly rounded sum of the selected entries (independent of order)."""
        return math.fsum(float(cost[r, c]) for r, c in self.pairs)


def build_cost_matrix(
    gt_boxes: Sequence[BBox],
    pred_boxes: Sequence[BBox],
    epsilon: float = EPSILON,
    min_iou: float = MATCH_IOU,
) -> np.ndarray:
    """Cost matrix of shape ``(len(gt_boxes), len(pred_boxes))``."""
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if not gt_boxes or not pred_boxes:
        raise ValueError("empty box set")
    return cost_from_iou(pairwise_iou(gt_boxes, pred_boxes), epsilon, min_iou)


def cost_from_iou(ious: np.ndarray, epsilon: float = EPSILON, min_iou: float = MATCH_IOU) -> np.ndarray:
    # threshold is inclusive
    return np.where(ious >= min_iou, -ious, epsilon)


def _solve_wide(cost: list[list[float]]) -> list[Pair]:
    """Shortest-augmenting-path Hungarian for ``n <= m``; every row is matched."""
    n, m = len(cost), len(cost[0])
    inf = math.inf
    u = [0.0] * (n + 1)
    v = [0.0] * (m + 1)
    owner = [0] * (m + 1)  # owner[j]: 1-based row matched to column j, 0 if free
    way = [0] * (m + 1)
    for i in range(1, n + 1):
        owner[0] = i
        j0 = 0
        minv = [inf] * (m + 1)
        used = [False] * (m + 1)
        while True:
            used[j0] = True
            i0 = owner[j0]
            row = cost[i0 - 1]
            ui0 = u[i0]
            delta = inf
            j1 = 0
            for j in range(1, m + 1):
                if not used[j]:
                    cur = row[j - 1] - ui0 - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(m + 1):
                if used[j]:
                    u[owner[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if owner[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            owner[j0] = owner[j1]
            j0 = j1
    return [(owner[j] - 1, j - 1) for j in range(1, m + 1) if owner[j]]


def _solve(cost: np.ndarray) -> list[Pair]:
    """Some optimal injection of the smaller side (no tie-break guarantee)."""
    U, V = cost.shape
    if U == 0 or V == 0:
        return []
    if U <= V:
        return _solve_wide(cost.tolist())
    return [(r, c) for c, r in _solve_wide(cost.T.tolist())]


def _lex_refine(cost: np.ndarray, pairs: list[Pair]) -> list[Pair]:
    """Turn an optimal assignment into the lexicographically smallest optimal one.

    Walks the sorted pair list; at each position tries every pair that would
    sort earlier and keeps it when the rest of the matrix can still be
    completed at no extra cost.
    """
    U, V = cost.shape
    k = min(U, V)
    current = sorted(pairs)
    best = math.fsum(float(cost[r, c]) for r, c in current)
    fixed: list[Pair] = []
    used_cols: set[int] = set()
    prev_row = -1
    for step in range(k):
        need = k - step - 1
        r0, c0 = current[step]
        for r in range(prev_row + 1, r0 + 1):
            rows_left = list(range(r + 1, U))
            if len(rows_left) < need:
                break
            for c in range(V):
                if (r, c) >= (r0, c0):
                    break
                if c in used_cols:
                    continue
                cols_left = [j for j in range(V) if j not in used_cols and j != c]
                if min(len(rows_left), len(cols_left)) != need:
                    continue
                sub = cost[np.ix_(rows_left, cols_left)]
                tail = [(rows_left[a], cols_left[b]) for a, b in _solve(sub)]
                cand = fixed + [(r, c)] + tail
                total = math.fsum(float(cost[i, j]) for i, j in cand)
                if total <= best:
                    best = total
                    current = sorted(cand)
                    break
            else:
                continue
            break
        r_fix, c_fix = current[step]
        fixed.append((r_fix, c_fix))
        used_cols.add(c_fix)
        prev_row = r_fix
    return current


def hungarian_min_cost(cost: np.ndarray | Sequence[Sequence[float]], tie_break: bool = True) -> Assignment:
    """Minimum-cost injection of the smaller side of ``cost``.

    With ``tie_break`` (the default) the result is the lexicographically
    smallest pair list among all optimal assignments, so the output does not
    depend on solver internals. Totals are compared exactly (``math.fsum``).
    """
    C = np.asarray(cost, dtype=np.float64)
    if C.ndim != 2:
        raise ValueError(f"cost matrix must be 2-D, got shape {C.shape}")
    if not np.isfinite(C).all():
        raise ValueError("cost matrix has non-finite entries")
    pairs = _solve(C)
    if tie_break and pairs:
        pairs = _lex_refine(C, pairs)
    return Assignment(tuple(pairs))


def filter_matches(
    assignment: Assignment,
    gt_boxes: Sequence[BBox],
    pred_boxes: Sequence[BBox],
    min_iou: float = MATCH_IOU,
) -> Assignment:
    return Assignment(tuple((r, c) for r, c in assignment if iou(gt_boxes[r], pred_boxes[c]) >= min_iou))
