import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hideval.dataio import FrameGroundTruth, FramePrediction, KeyMismatchError, PersonGT, PredGroup, PredPerson
from hideval.geometry import BBox
from hideval.group_metrics import DELTAS, MatchConfig, evaluate_group_ap, group_iou, rank_groups
from hideval.synthkit import ScenarioSpec, generate
from oracles import ref_group_ap, ref_group_iou


def B(*c):
    return BBox(*c)


# three well separated people
P = [B(0.0, 0.0, 0.2, 0.5), B(0.3, 0.0, 0.5, 0.5), B(0.6, 0.0, 0.8, 0.5)]
FAR = [B(0.0, 0.6, 0.2, 0.9), B(0.3, 0.6, 0.5, 0.9)]


def test_group_iou_identical():
    assert group_iou(P[:2], P[:2]) == 1.0


def test_group_iou_partial():
    assert group_iou(P, P[:2]) == 2 / 3


def test_group_iou_disjoint():
    assert group_iou(P[:2], FAR) == 0.0


def test_group_iou_ignores_weak_overlap():
    # IoU 0.4 with the only candidate: matched by the solver, then filtered out
    assert group_iou([B(0, 0, 1, 1)], [B(0, 0, 0.4, 1)]) == 0.0


def test_group_iou_empty_group():
    with pytest.raises(ValueError):
        group_iou([], P)


@st.composite
def member_lists(draw):
    pool = P + FAR + [B(0.05, 0.0, 0.25, 0.5), B(0.62, 0.05, 0.8, 0.45)]
    a = draw(st.lists(st.sampled_from(pool), min_size=1, max_size=5))
    b = draw(st.lists(st.sampled_from(pool), min_size=1, max_size=5))
    return a, b


@settings(deadline=None)
@given(member_lists())
def test_group_iou_symmetric_and_matches_enumeration(ab):
    a, b = ab
    v = group_iou(a, b)
    assert 0.0 <= v <= 1.0
    assert v == group_iou(b, a)
    assert v == ref_group_iou(a, b)


@given(st.integers(2, 3))
def test_group_iou_one_iff_perfect(n):
    g = P[:n]
    assert group_iou(g, g) == 1.0
    assert group_iou(g, g[:-1]) < 1.0
    assert group_iou(g, g + [FAR[0]]) < 1.0


def _frame(key, boxes, groups):
    return FrameGroundTruth(key[0], key[1], tuple(PersonGT(b, (0,)) for b in boxes), tuple(tuple(g) for g in groups))


def _pred(key, boxes, groups, scores):
    persons = tuple(PredPerson(b, 1.0, (1.0,)) for b in boxes)
    return FramePrediction(key[0], key[1], persons, tuple(PredGroup(tuple(g), s) for g, s in zip(groups, scores)))


def test_perfect_retrieval():
    gt = [_frame(("v", 1), P, [[0, 1]]), _frame(("v", 2), P, [[1, 2]])]
    pred = [_pred(("v", 1), P, [[0, 1]], [1.0]), _pred(("v", 2), P, [[1, 2]], [1.0])]
    r = evaluate_group_ap(gt, pred)
    assert r.per_threshold == {d: 1.0 for d in DELTAS}
    assert r.mean == 1.0


def test_single_group_at_three_quarters():
    # GT has members {0, 1, 2} plus a fourth person; predicting {0, 1, 2, 3}
    # gives R = 3, U = 3, V = 4 and IoU^G = 3/4
    boxes = P + [B(0.85, 0.0, 0.99, 0.5)]
    gt = [_frame(("v", 1), boxes, [[0, 1, 2]])]
    pred = [_pred(("v", 1), boxes, [[0, 1, 2, 3]], [0.9])]
    r = evaluate_group_ap(gt, pred)
    assert r.per_threshold == {0.5: 1.0, 0.6: 1.0, 0.7: 1.0, 0.8: 0.0, 0.9: 0.0, 1.0: 0.0}
    assert r.mean == 0.5


def test_two_gt_one_perfect_prediction():
    boxes = P + FAR
    gt = [_frame(("v", 1), boxes, [[0, 1], [3, 4]])]
    pred = [_pred(("v", 1), boxes, [[3, 4]], [0.7])]
    r = evaluate_group_ap(gt, pred)
    assert all(v == 0.5 for v in r.per_threshold.values())
    assert r.mean == 0.5


def test_duplicate_prediction_is_false_positive():
    gt = [_frame(("v", 1), P, [[0, 1]])]
    pred = [_pred(("v", 1), P, [[0, 1], [2]], [0.9, 0.8])]
    pred_dup = [dataclasses.replace(pred[0], groups=(PredGroup((0, 1), 0.9), PredGroup((2,), 0.95)))]
    assert evaluate_group_ap(gt, pred).mean == 1.0
    # a higher-scored miss pushes the hit to rank 2: precision 1/2
    assert evaluate_group_ap(gt, pred_dup).mean == 0.5


def test_score_ties_break_by_frame_key_then_index():
    gt = [_frame(("b", 1), P, [[0, 1]]), _frame(("a", 1), P, [[0, 1]])]
    pred = [_pred(("b", 1), P, [[0, 1]], [0.5]), _pred(("a", 1), P, [[2], [0, 1]], [0.5, 0.5])]
    ranking = rank_groups(gt, pred)
    assert [(ranking.keys[fi], b) for fi, b in ranking.order] == [(("a", 1), 0), (("a", 1), 1), (("b", 1), 0)]
    assert ranking.hits(0.5) == [False, True, True]


def test_frames_without_predictions_count_as_missed():
    gt = [_frame(("v", 1), P, [[0, 1]]), _frame(("v", 2), P, [[0, 1]])]
    pred = [_pred(("v", 1), P, [[0, 1]], [1.0])]
    r = evaluate_group_ap(gt, pred)
    assert r.num_gt_groups == 2
    assert r.mean == 0.5


def test_unknown_prediction_frame_is_an_error():
    gt = [_frame(("v", 1), P, [[0, 1]])]
    pred = [_pred(("v", 1), P, [[0, 1]], [1.0]), _pred(("w", 9), P, [], [])]
    with pytest.raises(KeyMismatchError, match=r"\('w', 9\)") as info:
        evaluate_group_ap(gt, pred)
    assert info.value.keys == [("w", 9)]


def test_no_ground_truth_groups_gives_zero():
    gt = [_frame(("v", 1), P, [])]
    pred = [_pred(("v", 1), P, [[0, 1]], [1.0])]
    r = evaluate_group_ap(gt, pred)
    assert r.mean == 0.0 and r.num_pred_groups == 1


def test_filter_floor_is_configurable():
    gt = [_frame(("v", 1), [B(0, 0, 0.2, 0.5), B(0.3, 0, 0.5, 0.5)], [[0, 1]])]
    shifted = [B(0.04, 0, 0.24, 0.5), B(0.34, 0, 0.54, 0.5)]  # IoU 2/3 each
    pred = [_pred(("v", 1), shifted, [[0, 1]], [1.0])]
    assert evaluate_group_ap(gt, pred).mean == 1.0
    strict = MatchConfig(cost_iou=0.7, filter_iou=0.7)
    assert evaluate_group_ap(gt, pred, config=strict).mean == 0.0


def test_removing_a_true_positive_lowers_every_threshold():
    gt, pred = generate(ScenarioSpec(seed=3, num_frames=8, people=(4, 8), groups=(1, 3)))
    full = evaluate_group_ap(gt, pred)
    assert full.mean == 1.0
    victim = next(i for i, f in enumerate(pred) if f.groups)
    cut = list(pred)
    cut[victim] = dataclasses.replace(pred[victim], groups=pred[victim].groups[1:])
    less = evaluate_group_ap(gt, cut)
    assert all(less.per_threshold[d] < full.per_threshold[d] for d in DELTAS)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.floats(0, 0.08), st.floats(0, 1), st.floats(0, 1))
def test_matches_reference_and_is_monotone_in_delta(seed, jitter, corruption, noise):
    spec = ScenarioSpec(seed=seed, num_frames=6, people=(2, 7), groups=(1, 3), jitter=jitter, corruption=corruption, noise=noise)
    gt, pred = generate(spec)
    r = evaluate_group_ap(gt, pred)
    values = [r.per_threshold[d] for d in DELTAS]
    assert values == sorted(values, reverse=True)
    for d in DELTAS:
        ref, _ = ref_group_ap(gt, pred, d)
        assert r.per_threshold[d] == pytest.approx(ref, abs=1e-12)


def test_parallel_workers_give_identical_result():
    gt, pred = generate(ScenarioSpec(seed=5, num_frames=60, people=(2, 8), groups=(1, 3), jitter=0.02, corruption=0.3, noise=0.5))
    assert evaluate_group_ap(gt, pred, workers=1) == evaluate_group_ap(gt, pred, workers=3)


def test_result_round_trips_through_dict():
    gt, pred = generate(ScenarioSpec(seed=1, num_frames=5, jitter=0.02))
    r = evaluate_group_ap(gt, pred)
    assert type(r).from_dict(r.to_dict()) == r
    assert np.isfinite(list(r.per_threshold.values())).all()
