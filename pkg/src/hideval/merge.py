"""Person-to-group merging and the pairwise greedy grouping baseline.

Detected people and detected groups are related through a ``u x v``
similarity matrix. Two sources exist: a spatial prior (how much of each
person box lies inside each group box) and a semantic affinity computed
from embeddings (or supplied precomputed). They are blended with a weight
``alpha`` on the spatial side, and each person joins the group with the
highest blended similarity.

The pairwise baseline instead starts from person-pair detections: boxes
that overlap strongly across pairs are merged into one identity, pairs
scoring at least 0.6 are linked, and connected components become groups.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal, Sequence

import numpy as np

from .dataio import FramePrediction, PredGroup, PredPerson
from .geometry import BBox, enclosing_box, iou, pairwise_iof

ALPHA_PRESET = 0.3
ALPHA_LEARNED = 0.3723
PAIR_GROUP_THRESHOLD = 0.6
PAIR_IDENTITY_IOU = 0.8

MergeMode = Literal["spatial", "semantic", "blend"]
MERGE_MODES: tuple[str, ...] = ("spatial", "semantic", "blend")


@dataclass(frozen=True)
class Instance:
    box: BBox
    score: float = 1.0
    action_scores: tuple[float, ...] = ()
    embedding: tuple[float, ...] | None = None


@dataclass(frozen=True)
class GroupProposal:
    box: BBox
    score: float = 1.0
    embedding: tuple[float, ...] | None = None


@dataclass(frozen=True)
class MergeConfig:
    alpha: float = ALPHA_PRESET
    person_score_threshold: float = 0.0
    group_score_threshold: float = 0.0
    min_group_size: int = 1

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        for name in ("person_score_threshold", "group_score_threshold"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.min_group_size < 1:
            raise ValueError(f"min_group_size must be >= 1, got {self.min_group_size}")


def _require_nonempty(instances: Sequence[Instance], groups: Sequence[GroupProposal]) -> None:
    if not instances or not groups:
        raise ValueError("merging needs at least one instance and one group")


def _embeddings(items: Sequence[Instance] | Sequence[GroupProposal], what: str) -> np.ndarray:
    if any(it.embedding is None for it in items):
        raise ValueError(f"semantic merging requires embeddings ({what} without one)")
    mat = np.array([it.embedding for it in items], dtype=np.float64)
    if mat.ndim != 2:
        raise ValueError(f"{what} embeddings have inconsistent dimensions")
    return mat


def spatial_similarity(instances: Sequence[Instance], groups: Sequence[GroupProposal]) -> np.ndarray:
    """IoF of each person box against each group box, in [0, 1]."""
    _require_nonempty(instances, groups)
    return pairwise_iof([p.box for p in instances], [g.box for g in groups])


def semantic_similarity_inner_product(instances: Sequence[Instance], groups: Sequence[GroupProposal]) -> np.ndarray:
    """Cosine similarity of (already transformed) person and group embeddings."""
    _require_nonempty(instances, groups)
    P = _embeddings(instances, "instance")
    G = _embeddings(groups, "group")
    if P.shape[1] != G.shape[1]:
        raise ValueError(f"embedding dimension mismatch: {P.shape[1]} vs {G.shape[1]}")
    pn = np.linalg.norm(P, axis=1)
    gn = np.linalg.norm(G, axis=1)
    if (pn == 0).any() or (gn == 0).any():
        raise ValueError("zero-norm embedding has no direction")
    cos = (P @ G.T) / (pn[:, None] * gn[None, :])
    return np.clip(cos, -1.0, 1.0)


def sigmoid(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def semantic_similarity_linear(
    instances: Sequence[Instance],
    groups: Sequence[GroupProposal],
    weights: Sequence[float],
    bias: float = 0.0,
) -> np.ndarray:
    """``sigmoid(w . [person_embedding, group_embedding] + bias)`` per pair."""
    _require_nonempty(instances, groups)
    P = _embeddings(instances, "instance")
    G = _embeddings(groups, "group")
    w = np.asarray(weights, dtype=np.float64)
    d_p, d_g = P.shape[1], G.shape[1]
    if w.ndim != 1 or w.size != d_p + d_g:
        raise ValueError(f"weights need {d_p + d_g} entries for concatenated embeddings, got {w.size}")
    z = (P @ w[:d_p])[:, None] + (G @ w[d_p:])[None, :] + bias
    return sigmoid(z)


def rescale_cosine(theta: np.ndarray) -> np.ndarray:
    """Map [-1, 1] onto [0, 1] via ``(x + 1) / 2``."""
    return (np.asarray(theta, dtype=np.float64) + 1.0) / 2.0


def blend(spatial: np.ndarray, semantic: np.ndarray, alpha: float) -> np.ndarray:
    """``alpha * spatial + (1 - alpha) * semantic``, correctly rounded per entry.

    The expression is evaluated exactly over the float inputs and rounded
    once, so ``alpha=0`` and ``alpha=1`` return the inputs bit for bit.
    """
    spatial = np.asarray(spatial, dtype=np.float64)
    semantic = np.asarray(semantic, dtype=np.float64)
    if spatial.shape != semantic.shape:
        raise ValueError(f"shape mismatch: {spatial.shape} vs {semantic.shape}")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    a = Fraction(alpha)
    b = 1 - a
    flat = [float(a * Fraction(s) + b * Fraction(t)) for s, t in zip(spatial.ravel().tolist(), semantic.ravel().tolist())]
    return np.array(flat, dtype=np.float64).reshape(spatial.shape)


def assign_groups(theta_hat: np.ndarray) -> list[int]:
    """Index of the most similar group for every instance (lowest index on ties)."""
    theta_hat = np.asarray(theta_hat, dtype=np.float64)
    if theta_hat.ndim != 2 or theta_hat.size == 0:
        raise ValueError(f"need a non-empty u x v matrix, got shape {theta_hat.shape}")
    return [int(k) for k in np.argmax(theta_hat, axis=1)]


def build_hid_prediction(
    instances: Sequence[Instance],
    groups: Sequence[GroupProposal],
    assignment: Sequence[int],
    config: MergeConfig = MergeConfig(),
    video_id: str = "",
    timestamp: int = 0,
) -> FramePrediction:
    """Package merged output as a prediction frame.

    Groups under the group threshold are dropped together with their
    members; people under the person threshold are dropped. Groups left with
    fewer than ``min_group_size`` members are dissolved and their members
    stay as ungrouped people.
    """
    if len(assignment) != len(instances):
        raise ValueError(f"assignment has {len(assignment)} entries for {len(instances)} instances")
    kept_groups = {j for j, g in enumerate(groups) if g.score >= config.group_score_threshold}
    kept = [
        i
        for i, inst in enumerate(instances)
        if inst.score >= config.person_score_threshold and assignment[i] in kept_groups
    ]
    new_index = {i: n for n, i in enumerate(kept)}
    pred_groups = []
    for j in sorted(kept_groups):
        members = tuple(new_index[i] for i in kept if assignment[i] == j)
        if len(members) >= config.min_group_size:
            pred_groups.append(PredGroup(members, groups[j].score, groups[j].box))
    persons = tuple(PredPerson(instances[i].box, instances[i].score, tuple(instances[i].action_scores)) for i in kept)
    return FramePrediction(video_id, timestamp, persons, tuple(pred_groups))


def merge_frame(
    instances: Sequence[Instance],
    groups: Sequence[GroupProposal],
    config: MergeConfig = MergeConfig(),
    mode: MergeMode = "blend",
    semantic: np.ndarray | None = None,
    video_id: str = "",
    timestamp: int = 0,
) -> FramePrediction:
    """Run similarity, assignment and packaging for one frame.

    ``semantic`` is needed for the ``semantic`` and ``blend`` modes.
    """
    if mode not in MERGE_MODES:
        raise ValueError(f"mode must be one of {MERGE_MODES}, got {mode!r}")
    if not instances or not groups:
        # nobody to assign, or nowhere to assign them
        return FramePrediction(video_id, timestamp)
    if mode != "spatial":
        if semantic is None:
            raise ValueError(f"mode '{mode}' needs a semantic similarity matrix")
        semantic = np.asarray(semantic, dtype=np.float64)
        if semantic.shape != (len(instances), len(groups)):
            raise ValueError(f"semantic matrix shape {semantic.shape} != ({len(instances)}, {len(groups)})")
    if mode == "semantic":
        theta_hat = semantic
    else:
        spatial = spatial_similarity(instances, groups)
        theta_hat = spatial if mode == "spatial" else blend(spatial, semantic, config.alpha)
    return build_hid_prediction(instances, groups, assign_groups(theta_hat), config, video_id, timestamp)


# ----------------------------------------------------------------------------
# pairwise baseline


class _DisjointSet:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def greedy_pairwise_grouping(pair_scores: np.ndarray, threshold: float = PAIR_GROUP_THRESHOLD) -> list[list[int]]:
    """Connected components of the graph linking pairs scoring ``>= threshold``.

    Returns every index exactly once, singletons included, with groups
    ordered by their smallest member.
    """
    S = np.asarray(pair_scores, dtype=np.float64)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError(f"pair scores must be square, got shape {S.shape}")
    if not np.array_equal(S, S.T):
        raise ValueError("pair score matrix is not symmetric")
    n = S.shape[0]
    dsu = _DisjointSet(n)
    rows, cols = np.nonzero(S >= threshold)
    for i, j in zip(rows.tolist(), cols.tolist()):
        if i < j:
            dsu.union(i, j)
    comps: dict[int, list[int]] = {}
    for i in range(n):
        comps.setdefault(dsu.find(i), []).append(i)
    return sorted(comps.values(), key=lambda c: c[0])


@dataclass(frozen=True)
class PairDetection:
    """Two interacting people detected as one pair."""

    box_a: BBox
    box_b: BBox
    score: float
    actions_a: tuple[float, ...] = ()
    actions_b: tuple[float, ...] = ()


@dataclass
class PairMergeResult:
    boxes: list[BBox] = field(default_factory=list)
    action_scores: list[tuple[float, ...]] = field(default_factory=list)
    person_scores: list[float] = field(default_factory=list)
    pair_scores: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    identities: list[tuple[int, int]] = field(default_factory=list)  # per input pair


def _merge_actions(a: tuple[float, ...], b: tuple[float, ...]) -> tuple[float, ...]:
    if not a:
        return tuple(b)
    if not b:
        return tuple(a)
    if len(a) != len(b):
        raise ValueError(f"action score vectors differ in length: {len(a)} vs {len(b)}")
    return tuple(max(x, y) for x, y in zip(a, b))


def match_instances_across_pairs(
    pair_detections: Sequence[PairDetection], iou_threshold: float = PAIR_IDENTITY_IOU
) -> PairMergeResult:
    """Deduplicate people that appear in several pairs.

    Boxes are visited in input order; a box joins the existing identity it
    overlaps most when that IoU is strictly above ``iou_threshold``, otherwise
    it founds a new identity and stays its representative box. Action scores
    of merged boxes combine by elementwise maximum. The pair score between
    two identities is the highest score of any pair linking them.
    """
    out = PairMergeResult()
    edges: dict[tuple[int, int], float] = {}

    def identify(box: BBox, actions: tuple[float, ...], score: float) -> int:
        best, best_iou = -1, iou_threshold
        for k, rep in enumerate(out.boxes):
            v = iou(box, rep)
            if v > best_iou:
                best, best_iou = k, v
        if best < 0:
            out.boxes.append(box)
            out.action_scores.append(tuple(actions))
            out.person_scores.append(score)
            return len(out.boxes) - 1
        out.action_scores[best] = _merge_actions(out.action_scores[best], actions)
        out.person_scores[best] = max(out.person_scores[best], score)
        return best

    for pd in pair_detections:
        a = identify(pd.box_a, pd.actions_a, pd.score)
        b = identify(pd.box_b, pd.actions_b, pd.score)
        out.identities.append((a, b))
        if a != b:
            key = (min(a, b), max(a, b))
            edges[key] = max(edges.get(key, -np.inf), pd.score)
    n = len(out.boxes)
    S = np.zeros((n, n))
    for (a, b), s in edges.items():
        S[a, b] = S[b, a] = s
    out.pair_scores = S
    return out


def pairs_to_prediction(
    pair_detections: Sequence[PairDetection],
    video_id: str = "",
    timestamp: int = 0,
    group_threshold: float = PAIR_GROUP_THRESHOLD,
    identity_iou: float = PAIR_IDENTITY_IOU,
    num_actions: int | None = None,
) -> FramePrediction:
    """Turn pairwise interaction detections into a grouped prediction frame.

    Components of two or more people become groups whose confidence is the
    strongest linking pair score inside them and whose box encloses the
    members. Everyone else stays ungrouped.
    """
    merged = match_instances_across_pairs(pair_detections, identity_iou)
    comps = greedy_pairwise_grouping(merged.pair_scores, group_threshold)
    persons = []
    for box, acts, s in zip(merged.boxes, merged.action_scores, merged.person_scores):
        if not acts and num_actions:
            acts = (0.0,) * num_actions
        persons.append(PredPerson(box, s, tuple(acts)))
    groups = []
    for comp in comps:
        if len(comp) < 2:
            continue
        sub = merged.pair_scores[np.ix_(comp, comp)]
        groups.append(PredGroup(tuple(comp), float(sub.max()), enclosing_box(merged.boxes[i] for i in comp)))
    return FramePrediction(video_id, timestamp, tuple(persons), tuple(groups))
