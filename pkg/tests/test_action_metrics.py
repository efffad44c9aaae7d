import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hideval.action_metrics import evaluate_person_ap
from hideval.dataio import FrameGroundTruth, FramePrediction, KeyMismatchError, PersonGT, PredPerson, SchemaError
from hideval.geometry import BBox
from hideval.synthkit import ScenarioSpec, generate
from oracles import ref_class_ap

K = 3
A = BBox(0.0, 0.0, 0.2, 0.5)
C = BBox(0.5, 0.0, 0.7, 0.5)


def gt_frame(persons, key=("v", 1)):
    return FrameGroundTruth(key[0], key[1], tuple(PersonGT(b, tuple(a)) for b, a in persons))


def pred_frame(persons, key=("v", 1)):
    return FramePrediction(key[0], key[1], tuple(PredPerson(b, s, tuple(sc)) for b, s, sc in persons))


def test_perfect_prediction():
    gt = [gt_frame([(A, [0, 2]), (C, [1])])]
    pred = [pred_frame([(A, 1.0, [1, 0, 1]), (C, 1.0, [0, 1, 0])])]
    r = evaluate_person_ap(gt, pred, num_actions=K)
    assert [c.ap for c in r.per_class] == [1.0, 1.0, 1.0]
    assert r.mean_ap == 1.0


def test_box_below_threshold_scores_zero():
    gt = [gt_frame([(BBox(0, 0, 1, 1), [0])])]
    pred = [pred_frame([(BBox(0, 0, 0.4, 1), 1.0, [0.9, 0, 0])])]
    r = evaluate_person_ap(gt, pred, num_actions=K)
    assert r.per_class[0].ap == 0.0


def test_one_of_two_found():
    gt = [gt_frame([(A, [1]), (C, [1])])]
    pred = [pred_frame([(A, 1.0, [0, 0.8, 0])])]
    r = evaluate_person_ap(gt, pred, num_actions=K)
    assert r.per_class[1].ap == 0.5
    assert r.per_class[1].num_gt == 2


def test_classes_without_ground_truth_are_left_out_of_the_mean():
    gt = [gt_frame([(A, [0])])]
    pred = [pred_frame([(A, 1.0, [1.0, 0.0, 0.7])])]
    r = evaluate_person_ap(gt, pred, num_actions=K)
    assert r.per_class[2].num_gt == 0 and r.per_class[2].num_detections == 1
    assert r.mean_ap == 1.0


def test_multi_label_person_counts_once_per_class():
    gt = [gt_frame([(A, [0, 1])])]
    pred = [pred_frame([(A, 1.0, [0.9, 0.4, 0])])]
    r = evaluate_person_ap(gt, pred, num_actions=K)
    assert (r.per_class[0].num_gt, r.per_class[1].num_gt) == (1, 1)
    assert r.mean_ap == 1.0


def test_score_mode_multiplies_person_confidence():
    # action scores alone rank the miss first; multiplying by s^P flips that
    gt = [gt_frame([(A, [0])])]
    pred = [pred_frame([(A, 0.9, [0.5, 0, 0]), (C, 0.1, [0.6, 0, 0])])]
    assert evaluate_person_ap(gt, pred, num_actions=K).mean_ap == 0.5
    assert evaluate_person_ap(gt, pred, num_actions=K, score_mode="action*person").mean_ap == 1.0
    with pytest.raises(ValueError):
        evaluate_person_ap(gt, pred, num_actions=K, score_mode="max")


def test_unknown_class_is_rejected():
    gt = [gt_frame([(A, [5])])]
    pred = [pred_frame([(A, 1.0, [1, 0, 0])])]
    with pytest.raises(SchemaError, match="unknown action class 5"):
        evaluate_person_ap(gt, pred, num_actions=K)
    with pytest.raises(SchemaError, match="expected K=4"):
        evaluate_person_ap([gt_frame([(A, [0])])], pred, num_actions=4)


def test_key_mismatch_is_rejected():
    with pytest.raises(KeyMismatchError):
        evaluate_person_ap([gt_frame([(A, [0])])], [pred_frame([(A, 1.0, [1, 0, 0])], key=("x", 3))], num_actions=K)


def test_frame_order_does_not_matter():
    gt, pred = generate(ScenarioSpec(seed=8, num_frames=30, jitter=0.03, noise=0.4, num_videos=3))
    base = evaluate_person_ap(gt, pred)
    rng = random.Random(0)
    for _ in range(3):
        g, p = list(gt), list(pred)
        rng.shuffle(g)
        rng.shuffle(p)
        assert evaluate_person_ap(g, p) == base


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.floats(0, 0.08), st.floats(0, 1))
def test_matches_reference(seed, jitter, noise):
    gt, pred = generate(ScenarioSpec(seed=seed, num_frames=6, people=(1, 6), jitter=jitter, noise=noise, num_actions=5))
    r = evaluate_person_ap(gt, pred)
    for c in r.per_class:
        ref, num_gt = ref_class_ap(gt, pred, c.class_id)
        assert c.num_gt == num_gt
        assert c.ap == pytest.approx(ref, abs=1e-12)
        assert 0.0 <= c.ap <= 1.0


def test_parallel_workers_give_identical_result():
    gt, pred = generate(ScenarioSpec(seed=2, num_frames=40, jitter=0.02, noise=0.3))
    assert evaluate_person_ap(gt, pred, workers=1) == evaluate_person_ap(gt, pred, workers=2)
