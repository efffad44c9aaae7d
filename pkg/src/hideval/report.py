from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Sequence

from . import __version__
from .action_metrics import PersonAPResult, evaluate_person_ap
from .dataio import DatasetMeta, FrameGroundTruth, FramePrediction
from .group_metrics import APResult, MatchConfig, evaluate_group_ap

TOOL = "hideval"


@dataclass
class EvalReport:
    group_ap: APResult
    person_ap: PersonAPResult
    counts: dict[str, int] = field(default_factory=dict)
    config: dict[str, Any] = field(default_factory=dict)
    labels: tuple[str, ...] | None = None
    tool: str = TOOL
    version: str = __version__

    def to_dict(self) -> dict[str, Any]:
        return {
            "tool": self.tool,
            "version": self.version,
            "config": self.config,
            "counts": self.counts,
            "group_ap": self.group_ap.to_dict(),
            "person_ap": self.person_ap.to_dict(self.labels),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=False)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "EvalReport":
        rows = d["person_ap"]["per_class"]
        labels = tuple(r["name"] for r in rows) if rows and all("name" in r for r in rows) else None
        return cls(
            group_ap=APResult.from_dict(d["group_ap"]),
            person_ap=PersonAPResult.from_dict(d["person_ap"]),
            counts=dict(d.get("counts", {})),
            config=dict(d.get("config", {})),
            labels=labels,
            tool=d.get("tool", TOOL),
            version=d.get("version", __version__),
        )

    def table(self) -> str:
        """Human-readable summary (percentages)."""
        g = self.group_ap
        lines = [
            f"{'metric':<12}{'value':>9}",
            f"{'AP^G':<12}{100 * g.mean:>9.2f}",
        ]
        for d, v in g.per_threshold.items():
            lines.append(f"{f'AP^G_{round(100 * d)}':<12}{100 * v:>9.2f}")
        lines.append(f"{'AP^P_50':<12}{100 * self.person_ap.mean_ap:>9.2f}")
        lines.append(f"groups: {g.num_gt_groups} gt / {g.num_pred_groups} pred; frames: {self.counts.get('gt_frames', 0)}")
        return "\n".join(lines)


def evaluate(
    gt_frames: Sequence[FrameGroundTruth],
    pred_frames: Sequence[FramePrediction],
    meta: DatasetMeta = DatasetMeta(),
    match: MatchConfig = MatchConfig(),
    iou_threshold: float = 0.5,
    score_mode: str = "action",
    workers: int = 1,
) -> EvalReport:
    """Group AP and person action mAP in one report."""
    group = evaluate_group_ap(gt_frames, pred_frames, config=match, workers=workers)
    person = evaluate_person_ap(
        gt_frames, pred_frames, iou_threshold=iou_threshold, num_actions=meta.num_actions, score_mode=score_mode, workers=workers
    )
    counts = {
        "gt_frames": len(gt_frames),
        "pred_frames": len(pred_frames),
        "gt_persons": sum(len(f.persons) for f in gt_frames),
        "pred_persons": sum(len(f.persons) for f in pred_frames),
        "gt_groups": group.num_gt_groups,
        "pred_groups": group.num_pred_groups,
    }
    config = {
        "epsilon": match.epsilon,
        "cost_iou": match.cost_iou,
        "filter_iou": match.filter_iou,
        "person_iou_threshold": iou_threshold,
        "score_mode": score_mode,
        "num_actions": meta.num_actions,
        "deltas": list(group.per_threshold),
    }
    return EvalReport(group, person, counts, config, meta.labels)
