"""Evaluation and merging toolkit for human-to-human interaction detection."""

__version__ = "0.1.0"

from .geometry import BBox, enclosing_box, iof, iou  # noqa: E402
from .matching import Assignment, build_cost_matrix, filter_matches, hungarian_min_cost  # noqa: E402
from .group_metrics import APResult, DELTAS, evaluate_group_ap, group_iou  # noqa: E402
from .action_metrics import ClassAP, evaluate_person_ap  # noqa: E402

__all__ = [
    "APResult",
    "Assignment",
    "BBox",
    "ClassAP",
    "DELTAS",
    "build_cost_matrix",
    "enclosing_box",
    "evaluate_group_ap",
    "evaluate_person_ap",
    "filter_matches",
    "group_iou",
    "hungarian_min_cost",
    "iof",
    "iou",
]
