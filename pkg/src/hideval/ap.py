from __future__ import annotations

from typing import Sequence

import numpy as np


def average_precision(tp: Sequence[bool], num_gt: int) -> float:
    """Area under the stepwise precision/recall curve of a ranked list.

    ``tp[k]`` flags whether the k-th ranked detection is a true positive.
    Every true positive raises recall by ``1 / num_gt`` at the precision
    reached at that rank; no precision envelope is applied. Returns 0.0 when
    there is nothing to retrieve.
    """
    if num_gt <= 0:
        return 0.0
    flags = np.asarray(tp, dtype=bool)
    if not flags.any():
        return 0.0
    hits = np.cumsum(flags)
    if hits[-1] > num_gt:
        raise ValueError(f"{hits[-1]} true positives for {num_gt} ground-truth items")
    precision = hits / np.arange(1, flags.size + 1)
    return float(precision[flags].sum() / num_gt)
