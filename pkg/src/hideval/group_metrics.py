"""Group-level IoU and group average precision.

A predicted group is compared with a ground-truth group by optimally
matching their member boxes (see :mod:`hideval.matching`); with ``R``
surviving matches the group IoU is ``R / (U + V - R)``. Group AP ranks all
predicted groups by confidence and counts a prediction as a hit at
threshold ``delta`` when its group IoU with a still-unclaimed ground-truth
group of the same frame reaches ``delta``. The summary AP averages the six
thresholds 0.5, 0.6, ..., 1.0.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence, TypeVar

import numpy as np

from .ap import average_precision
from .dataio import FrameGroundTruth, FrameKey, FramePrediction, KeyMismatchError
from .geometry import BBox, pairwise_iou
from .matching import EPSILON, MATCH_IOU, cost_from_iou, hungarian_min_cost

DELTAS: tuple[float, ...] = (0.5, 0.6, 0.7, 0.8, 0.9, 1.0)

T = TypeVar("T")
S = TypeVar("S")


@dataclass(frozen=True)
class MatchConfig:
    epsilon: float = EPSILON
    cost_iou: float = MATCH_IOU  # cost branch threshold (inclusive)
    filter_iou: float = MATCH_IOU  # post-matching floor (inclusive)


@dataclass
class APResult:
    per_threshold: dict[float, float]
    mean: float
    num_gt_groups: int
    num_pred_groups: int

    def to_dict(self) -> dict:
        return {
            "per_threshold": {f"{d:.1f}": v for d, v in self.per_threshold.items()},
            "mean": self.mean,
            "num_gt_groups": self.num_gt_groups,
            "num_pred_groups": self.num_pred_groups,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "APResult":
        return cls(
            per_threshold={float(k): float(v) for k, v in d["per_threshold"].items()},
            mean=float(d["mean"]),
            num_gt_groups=int(d["num_gt_groups"]),
            num_pred_groups=int(d["num_pred_groups"]),
        )


def matched_count(ious: np.ndarray, config: MatchConfig = MatchConfig()) -> int:
    """Number of member pairs kept after optimal matching and filtering."""
    if ious.size == 0:
        return 0
    assignment = hungarian_min_cost(cost_from_iou(ious, config.epsilon, config.cost_iou))
    return sum(1 for r, c in assignment if ious[r, c] >= config.filter_iou)


def group_iou_from_matrix(ious: np.ndarray, config: MatchConfig = MatchConfig()) -> float:
    U, V = ious.shape
    if U == 0 or V == 0:
        raise ValueError("group must have at least one member")
    R = matched_count(ious, config)
    return R / (U + V - R)


def group_iou(g: Sequence[BBox], g_pred: Sequence[BBox], config: MatchConfig = MatchConfig()) -> float:
    """Group IoU between two member-box lists; 1.0 only when every member matches."""
    if not g or not g_pred:
        raise ValueError("group must have at least one member")
    return group_iou_from_matrix(pairwise_iou(g, g_pred), config)


def frame_group_iou_table(
    gt: FrameGroundTruth, pred: FramePrediction | None, config: MatchConfig = MatchConfig()
) -> np.ndarray:
    """IoU^G of every (ground-truth group, predicted group) pair in one frame."""
    n_pred = 0 if pred is None else len(pred.groups)
    table = np.zeros((len(gt.groups), n_pred))
    if table.size == 0:
        return table
    person_iou = pairwise_iou([p.box for p in gt.persons], [p.box for p in pred.persons])
    for a, members in enumerate(gt.groups):
        for b, pg in enumerate(pred.groups):
            table[a, b] = group_iou_from_matrix(person_iou[np.ix_(members, pg.members)], config)
    return table


def _table_job(args: tuple[FrameGroundTruth, FramePrediction | None, MatchConfig]) -> np.ndarray:
    return frame_group_iou_table(*args)


def parallel_map(fn: Callable[[T], S], items: Sequence[T], workers: int = 1) -> list[S]:
    """Order-preserving map, optionally across worker processes."""
    if workers <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    chunksize = max(1, len(items) // (workers * 8))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=chunksize))


def align_frames(
    gt_frames: Sequence[FrameGroundTruth], pred_frames: Sequence[FramePrediction]
) -> list[tuple[FrameGroundTruth, FramePrediction | None]]:
    """Pair each ground-truth frame with its prediction (or None).

    Raises :class:`KeyMismatchError` for predicted frames with no ground
    truth and for duplicated keys on either side.
    """
    gt_by_key: dict[FrameKey, FrameGroundTruth] = {}
    for f in gt_frames:
        if f.key in gt_by_key:
            raise KeyMismatchError(f"duplicate ground-truth frame {f.key}", [f.key])
        gt_by_key[f.key] = f
    pred_by_key: dict[FrameKey, FramePrediction] = {}
    for f in pred_frames:
        if f.key in pred_by_key:
            raise KeyMismatchError(f"duplicate predicted frame {f.key}", [f.key])
        pred_by_key[f.key] = f
    missing = sorted(k for k in pred_by_key if k not in gt_by_key)
    if missing:
        shown = ", ".join(map(str, missing[:20]))
        more = f" (+{len(missing) - 20} more)" if len(missing) > 20 else ""
        raise KeyMismatchError(f"predicted frames missing from ground truth: {shown}{more}", missing)
    return [(gt_by_key[k], pred_by_key.get(k)) for k in sorted(gt_by_key)]


@dataclass
class GroupRanking:
    """Everything AP needs once the IoU^G tables are known."""

    keys: list[FrameKey]
    tables: list[np.ndarray]
    order: list[tuple[int, int]] = field(default_factory=list)  # (frame idx, pred group idx), best first
    num_gt: int = 0

    def hits(self, delta: float) -> list[bool]:
        """TP/FP flag per ranked prediction at one IoU^G threshold."""
        claimed = [np.zeros(t.shape[0], dtype=bool) for t in self.tables]
        flags = []
        for fi, b in self.order:
            col = self.tables[fi][:, b]
            ok = (col >= delta) & ~claimed[fi]
            if ok.any():
                # highest IoU^G wins; argmax takes the lowest index on ties
                a = int(np.argmax(np.where(ok, col, -1.0)))
                claimed[fi][a] = True
                flags.append(True)
            else:
                flags.append(False)
        return flags


def rank_groups(
    gt_frames: Sequence[FrameGroundTruth],
    pred_frames: Sequence[FramePrediction],
    config: MatchConfig = MatchConfig(),
    workers: int = 1,
) -> GroupRanking:
    pairs = align_frames(gt_frames, pred_frames)
    tables = parallel_map(_table_job, [(g, p, config) for g, p in pairs], workers)
    keys = [g.key for g, _ in pairs]
    scored = []
    for fi, (_, pred) in enumerate(pairs):
        if pred is not None:
            scored.extend((-pg.score, fi, b) for b, pg in enumerate(pred.groups))
    # frames are already in key order, so (fi, b) breaks score ties by key then index
    scored.sort()
    return GroupRanking(
        keys=keys,
        tables=tables,
        order=[(fi, b) for _, fi, b in scored],
        num_gt=sum(len(g.groups) for g, _ in pairs),
    )


def evaluate_group_ap(
    gt_frames: Sequence[FrameGroundTruth],
    pred_frames: Sequence[FramePrediction],
    thresholds: Sequence[float] = DELTAS,
    config: MatchConfig = MatchConfig(),
    workers: int = 1,
) -> APResult:
    ranking = rank_groups(gt_frames, pred_frames, config, workers)
    per = {float(d): average_precision(ranking.hits(d), ranking.num_gt) for d in thresholds}
    return APResult(
        per_threshold=per,
        mean=math.fsum(per.values()) / len(per),
        num_gt_groups=ranking.num_gt,
        num_pred_groups=len(ranking.order),
    )
