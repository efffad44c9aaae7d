"""Seeded synthetic scenes and brute-force reference computations.

Scenes are drawn with numpy's PCG64 generator, so a seed reproduces the
same files on every platform. People are placed in distinct cells of a
fixed grid, which keeps ground-truth boxes disjoint. Predictions copy the
ground truth and then apply three perturbations:

* box jitter: each predicted person box is translated by ``sigma`` times a
  fixed standard-normal direction (clipped to stay inside the frame), so
  raising ``sigma`` on the same seed only moves boxes further;
* membership corruption: each group not yet involved in a swap, with
  probability ``corruption``, trades one member with another group (or
  with an ungrouped person), so a rate of 1 always changes the partition;
* score noise: confidences are lowered, and absent actions raised, by
  ``noise`` times a uniform draw.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dataio import (
    DEFAULT_NUM_ACTIONS,
    FrameGroundTruth,
    FramePrediction,
    PersonGT,
    PredGroup,
    PredPerson,
)
from .geometry import BBox, enclosing_box

GRID = 5  # people sit in distinct cells of a GRID x GRID layout
MAX_PEOPLE = GRID * GRID


@dataclass(frozen=True)
class ScenarioSpec:
    seed: int = 0
    num_frames: int = 10
    people: tuple[int, int] = (2, 8)  # inclusive range per frame
    groups: tuple[int, int] = (1, 3)  # inclusive range per frame
    jitter: float = 0.0
    corruption: float = 0.0
    noise: float = 0.0
    num_actions: int = DEFAULT_NUM_ACTIONS
    num_videos: int = 1

    def __post_init__(self) -> None:
        lo, hi = self.people
        if not 0 <= lo <= hi:
            raise ValueError(f"people range {self.people} is empty")
        glo, ghi = self.groups
        if not 0 <= glo <= ghi:
            raise ValueError(f"groups range {self.groups} is empty")
        if hi > MAX_PEOPLE:
            raise ValueError(f"cannot place {hi} non-overlapping people on a {GRID}x{GRID} grid (max {MAX_PEOPLE})")
        for name in ("jitter", "corruption", "noise"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.num_frames < 0 or self.num_videos < 1 or self.num_actions < 1:
            raise ValueError("num_frames >= 0, num_videos >= 1 and num_actions >= 1 required")


def _person_box(rng: np.random.Generator, cell: int) -> BBox:
    cw = 1.0 / GRID
    cx, cy = (cell % GRID) * cw, (cell // GRID) * cw
    w = cw * rng.uniform(0.45, 0.9)
    h = cw * rng.uniform(0.55, 0.95)
    x1 = cx + rng.uniform(0.0, cw - w)
    y1 = cy + rng.uniform(0.0, cw - h)
    return BBox(x1, y1, x1 + w, y1 + h)


def _translate(box: BBox, dx: float, dy: float) -> BBox:
    # clip the shift, not the corners, so the box keeps its size
    dx = min(max(dx, -box.x1), 1.0 - box.x2)
    dy = min(max(dy, -box.y1), 1.0 - box.y2)
    return BBox(box.x1 + dx, box.y1 + dy, box.x2 + dx, box.y2 + dy)


def _split_groups(rng: np.random.Generator, n_people: int, n_groups: int) -> list[list[int]]:
    n_groups = min(n_groups, n_people // 2)
    if n_groups == 0:
        return []
    n_grouped = int(rng.integers(2 * n_groups, n_people + 1))
    order = [int(i) for i in rng.permutation(n_people)[:n_grouped]]
    sizes = [2] * n_groups
    for _ in range(n_grouped - 2 * n_groups):
        sizes[int(rng.integers(n_groups))] += 1
    groups, start = [], 0
    for s in sizes:
        groups.append(sorted(order[start : start + s]))
        start += s
    return groups


def _corrupt(rng: np.random.Generator, groups: list[list[int]], n_people: int, rate: float) -> list[list[int]]:
    groups = [list(g) for g in groups]
    if rate == 0.0:
        return groups
    moved: set[int] = set()
    touched: set[int] = set()
    for gi in range(len(groups)):
        # a group already hit by a swap may not start one, otherwise two swaps
        # can cancel into a mere relabelling of the original partition
        if rng.random() >= rate or gi in touched:
            continue
        mine = list(groups[gi])
        others = [gj for gj in range(len(groups)) if gj != gi and any(m not in moved for m in groups[gj])]
        grouped = {m for g in groups for m in g}
        free = [i for i in range(n_people) if i not in grouped]
        if mine and others:
            gj = others[int(rng.integers(len(others)))]
            a = mine[int(rng.integers(len(mine)))]
            theirs = [m for m in groups[gj] if m not in moved]
            b = theirs[int(rng.integers(len(theirs)))]
            groups[gi][groups[gi].index(a)] = b
            groups[gj][groups[gj].index(b)] = a
            moved.update((a, b))
            touched.update((gi, gj))
        elif mine and free:
            a = mine[int(rng.integers(len(mine)))]
            b = free[int(rng.integers(len(free)))]
            groups[gi][groups[gi].index(a)] = b
            moved.update((a, b))
        elif len(groups[gi]) > 2 and mine:
            a = mine[int(rng.integers(len(mine)))]
            groups[gi].remove(a)
            moved.add(a)
    return [sorted(g) for g in groups]


def generate(spec: ScenarioSpec) -> tuple[list[FrameGroundTruth], list[FramePrediction]]:
    """Ground-truth frames and perturbed predictions for ``spec``."""
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    K = spec.num_actions
    gts: list[FrameGroundTruth] = []
    preds: list[FramePrediction] = []
    per_video = math.ceil(spec.num_frames / spec.num_videos) if spec.num_frames else 0
    for f in range(spec.num_frames):
        video_id = f"vid{f // per_video:04d}"
        timestamp = 900 + f % per_video
        n = int(rng.integers(spec.people[0], spec.people[1] + 1))
        cells = rng.choice(MAX_PEOPLE, size=n, replace=False)
        boxes = [_person_box(rng, int(c)) for c in cells]
        groups = _split_groups(rng, n, int(rng.integers(spec.groups[0], spec.groups[1] + 1)))
        actions = []
        for _ in range(n):
            n_act = 1 + int(rng.random() < 0.3)
            actions.append(tuple(sorted({int(a) for a in rng.choice(K, size=min(n_act, K), replace=False)})))
        gt = FrameGroundTruth(
            video_id, timestamp, tuple(PersonGT(b, a) for b, a in zip(boxes, actions)), tuple(tuple(g) for g in groups)
        )

        # perturbation draws are taken unconditionally so the random stream,
        # and therefore every other quantity, does not depend on the rates
        shifts = rng.standard_normal((n, 2))
        person_u = rng.random(n)
        action_u = rng.random((n, K))
        group_u = rng.random(len(groups))
        corrupt_rng = np.random.Generator(np.random.PCG64(rng.integers(2**63)))

        p_boxes = [_translate(b, spec.jitter * sx, spec.jitter * sy) for b, (sx, sy) in zip(boxes, shifts.tolist())]
        persons = []
        for i in range(n):
            scores = [
                1.0 - spec.noise * action_u[i, k] if k in actions[i] else spec.noise * action_u[i, k] for k in range(K)
            ]
            persons.append(PredPerson(p_boxes[i], 1.0 - spec.noise * float(person_u[i]), tuple(float(s) for s in scores)))
        p_groups = _corrupt(corrupt_rng, groups, n, spec.corruption)
        pred_groups = tuple(
            PredGroup(tuple(g), 1.0 - spec.noise * float(group_u[gi]), enclosing_box(p_boxes[i] for i in g))
            for gi, g in enumerate(p_groups)
        )
        gts.append(gt)
        preds.append(FramePrediction(video_id, timestamp, tuple(persons), pred_groups))
    return gts, preds


# ----------------------------------------------------------------------------
# oracles

BRUTE_FORCE_LIMIT = 8


def brute_force_assignment(cost: Sequence[Sequence[float]] | np.ndarray) -> float:
    """Minimum total over every injection of the smaller side, by enumeration."""
    C = np.asarray(cost, dtype=np.float64)
    U, V = C.shape
    if min(U, V) > BRUTE_FORCE_LIMIT:
        raise ValueError(f"brute force limited to min(U, V) <= {BRUTE_FORCE_LIMIT}")
    if U == 0 or V == 0:
        return 0.0
    rows = C.tolist()
    best = math.inf
    if U <= V:
        for cols in itertools.permutations(range(V), U):
            best = min(best, math.fsum(rows[r][c] for r, c in enumerate(cols)))
    else:
        for rs in itertools.permutations(range(U), V):
            best = min(best, math.fsum(rows[r][c] for c, r in enumerate(rs)))
    return best


def brute_force_max_matches(qualified: Sequence[Sequence[bool]]) -> int:
    """Largest number of disjoint qualifying (row, col) pairs, by enumeration."""
    U = len(qualified)
    V = len(qualified[0]) if U else 0
    if min(U, V) > BRUTE_FORCE_LIMIT:
        raise ValueError(f"brute force limited to min(U, V) <= {BRUTE_FORCE_LIMIT}")
    best = 0
    if U <= V:
        for cols in itertools.permutations(range(V), U):
            best = max(best, sum(bool(qualified[r][c]) for r, c in enumerate(cols)))
    else:
        for rs in itertools.permutations(range(U), V):
            best = max(best, sum(bool(qualified[r][c]) for c, r in enumerate(rs)))
    return best


def brute_force_ap(ranked: Sequence[bool], num_gt: int) -> float:
    """AP of a ranked TP/FP list from its explicit precision/recall points."""
    if len(ranked) > 1000:
        raise ValueError("brute force AP limited to 1000 ranked items")
    if num_gt <= 0:
        return 0.0
    tp = fp = 0
    recalls, precisions = [0.0], [1.0]
    for hit in ranked:
        if hit:
            tp += 1
        else:
            fp += 1
        recalls.append(tp / num_gt)
        precisions.append(tp / (tp + fp))
    area = 0.0
    for k in range(1, len(recalls)):
        area += (recalls[k] - recalls[k - 1]) * precisions[k]
    return area
