"""Per-person interactive action AP at a fixed box IoU (AVA-style frame mAP)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Sequence

from .ap import average_precision
from .dataio import DEFAULT_NUM_ACTIONS, FrameGroundTruth, FramePrediction, SchemaError
from .geometry import pairwise_iou
from .group_metrics import align_frames, parallel_map

ScoreMode = Literal["action", "action*person"]
SCORE_MODES: tuple[str, ...] = ("action", "action*person")


@dataclass(frozen=True)
class ClassAP:
    class_id: int
    ap: float
    num_gt: int
    num_detections: int = 0


@dataclass
class PersonAPResult:
    per_class: list[ClassAP]
    mean_ap: float

    def to_dict(self, labels: Sequence[str] | None = None) -> dict:
        rows = []
        for c in self.per_class:
            row = {"class_id": c.class_id, "ap": c.ap, "num_gt": c.num_gt, "num_detections": c.num_detections}
            if labels is not None:
                row["name"] = labels[c.class_id]
            rows.append(row)
        return {"map": self.mean_ap, "per_class": rows}

    @classmethod
    def from_dict(cls, d: dict) -> "PersonAPResult":
        return cls(
            per_class=[
                ClassAP(int(r["class_id"]), float(r["ap"]), int(r["num_gt"]), int(r.get("num_detections", 0)))
                for r in d["per_class"]
            ],
            mean_ap=float(d["map"]),
        )


def _frame_iou(args: tuple[FrameGroundTruth, FramePrediction | None]) -> list[list[float]]:
    gt, pred = args
    if pred is None or not gt.persons or not pred.persons:
        return []
    return pairwise_iou([p.box for p in gt.persons], [p.box for p in pred.persons]).tolist()


def _infer_num_actions(pred_frames: Sequence[FramePrediction]) -> int:
    for f in pred_frames:
        for p in f.persons:
            return len(p.action_scores)
    return DEFAULT_NUM_ACTIONS


def class_hits(
    pairs: Sequence[tuple[FrameGroundTruth, FramePrediction | None]],
    ious: Sequence[list[list[float]]],
    k: int,
    iou_threshold: float = 0.5,
    score_mode: ScoreMode = "action",
) -> tuple[list[bool], int]:
    """Ranked TP/FP flags for action class ``k`` and its ground-truth count.

    ``pairs`` must be in frame-key order; score ties then fall back to the
    frame key and the person index.
    """
    dets = []
    gt_idx: list[list[int]] = []
    for fi, (gt, pred) in enumerate(pairs):
        gt_idx.append([i for i, p in enumerate(gt.persons) if k in p.actions])
        if pred is None:
            continue
        for j, p in enumerate(pred.persons):
            s = p.action_scores[k]
            if score_mode == "action*person":
                s *= p.score
            if s > 0.0:
                dets.append((-s, fi, j))
    dets.sort()
    num_gt = sum(len(g) for g in gt_idx)
    claimed = [set() for _ in pairs]
    flags = []
    for _, fi, j in dets:
        best, best_iou = -1, -1.0
        frame_iou = ious[fi]
        for i in gt_idx[fi]:
            if i in claimed[fi]:
                continue
            v = frame_iou[i][j]
            if v >= iou_threshold and v > best_iou:
                best, best_iou = i, v
        if best >= 0:
            claimed[fi].add(best)
            flags.append(True)
        else:
            flags.append(False)
    return flags, num_gt


def evaluate_person_ap(
    gt_frames: Sequence[FrameGroundTruth],
    pred_frames: Sequence[FramePrediction],
    iou_threshold: float = 0.5,
    num_actions: int | None = None,
    score_mode: ScoreMode = "action",
    workers: int = 1,
) -> PersonAPResult:
    """Per-class AP over every person detection; mAP skips classes without ground truth."""
    if score_mode not in SCORE_MODES:
        raise ValueError(f"score_mode must be one of {SCORE_MODES}, got {score_mode!r}")
    K = num_actions if num_actions is not None else _infer_num_actions(pred_frames)
    for f in gt_frames:
        for i, p in enumerate(f.persons):
            for a in p.actions:
                if not 0 <= a < K:
                    raise SchemaError(f"unknown action class {a} for person {i} at frame {f.key} (K={K})")
    for f in pred_frames:
        for i, p in enumerate(f.persons):
            if len(p.action_scores) != K:
                raise SchemaError(f"person {i} at frame {f.key} has {len(p.action_scores)} action scores, expected K={K}")

    pairs = align_frames(gt_frames, pred_frames)
    ious = parallel_map(_frame_iou, pairs, workers)
    per_class = []
    for k in range(K):
        flags, num_gt = class_hits(pairs, ious, k, iou_threshold, score_mode)
        per_class.append(ClassAP(k, average_precision(flags, num_gt), num_gt, len(flags)))
    scored = [c.ap for c in per_class if c.num_gt > 0]
    mean_ap = math.fsum(scored) / len(scored) if scored else 0.0
    return PersonAPResult(per_class, mean_ap)
