import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import boxes
from hideval.geometry import BBox, enclosing_box, iof, iou, pairwise_iof, pairwise_iou


def B(*c):
    return BBox(*c)


def test_iou_examples():
    assert iou(B(0, 0, 1, 1), B(0, 0, 1, 1)) == 1.0
    assert iou(B(0, 0, 0.4, 0.4), B(0.6, 0.6, 1, 1)) == 0.0
    assert iou(B(0, 0, 1, 1), B(0, 0, 0.5, 1)) == 0.5


def test_touching_boxes_do_not_overlap():
    assert iou(B(0, 0, 0.5, 1), B(0.5, 0, 1, 1)) == 0.0


def test_iof_examples():
    assert iof(B(0.2, 0.2, 0.4, 0.4), B(0, 0, 1, 1)) == 1.0
    assert iof(B(0, 0, 1, 1), B(0, 0, 0.5, 1)) == 0.5
    assert iof(B(0, 0, 0.3, 0.3), B(0.5, 0.5, 1, 1)) == 0.0


def test_enclosing_box_examples():
    assert enclosing_box([B(0, 0, 1, 1)]) == B(0, 0, 1, 1)
    assert enclosing_box([B(0, 0, 0.3, 0.3), B(0.7, 0.7, 1, 1)]) == B(0, 0, 1, 1)
    assert enclosing_box([B(0, 0, 1, 1), B(0.2, 0.2, 0.5, 0.5)]) == B(0, 0, 1, 1)


def test_enclosing_box_rejects_empty():
    with pytest.raises(ValueError, match="empty member set"):
        enclosing_box([])


@pytest.mark.parametrize(
    "coords",
    [(0.5, 0.1, 0.5, 0.9), (0.6, 0.1, 0.2, 0.9), (0.1, 0.1, 0.2, math.nan), (0.1, 0.1, math.inf, 0.3), (0.0, 0.0, 1e-200, 1e-200)],
)
def test_degenerate_boxes_rejected(coords):
    with pytest.raises(ValueError):
        BBox(*coords)


@given(boxes(), boxes())
def test_iou_symmetric_and_bounded(a, b):
    assert iou(a, b) == iou(b, a)
    assert 0.0 <= iou(a, b) <= 1.0


@given(boxes())
def test_iou_self_is_one(a):
    assert iou(a, a) == 1.0
    assert iof(a, a) == 1.0


@given(boxes(), boxes())
def test_iof_dominates_iou(a, b):
    assert iof(a, b) >= iou(a, b)


@given(st.lists(boxes(), min_size=1, max_size=6))
def test_enclosing_box_contains_and_is_idempotent(bs):
    e = enclosing_box(bs)
    assert enclosing_box([e]) == e
    for b in bs:
        assert iof(b, e) == pytest.approx(1.0, abs=1e-12)


@given(st.lists(boxes(), min_size=1, max_size=5), st.lists(boxes(), min_size=1, max_size=5))
def test_pairwise_matches_scalar_exactly(xs, ys):
    m = pairwise_iou(xs, ys)
    f = pairwise_iof(xs, ys)
    for i, a in enumerate(xs):
        for j, b in enumerate(ys):
            assert m[i, j] == iou(a, b)
            assert f[i, j] == iof(a, b)


def test_pairwise_empty_shapes():
    assert pairwise_iou([], [B(0, 0, 1, 1)]).shape == (0, 1)
    assert np.array_equal(pairwise_iof([B(0, 0, 1, 1)], []), np.zeros((1, 0)))
