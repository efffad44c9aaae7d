from pathlib import Path

import pytest
from hypothesis import assume
from hypothesis import strategies as st

from hideval.geometry import BBox

DATA = Path(__file__).parent / "data"


@pytest.fixture
def data_dir() -> Path:
    return DATA


@st.composite
def boxes(draw, lo: float = 0.0, hi: float = 1.0) -> BBox:
    xs = sorted(draw(st.lists(st.floats(lo, hi), min_size=2, max_size=2, unique=True)))
    ys = sorted(draw(st.lists(st.floats(lo, hi), min_size=2, max_size=2, unique=True)))
    assume((xs[1] - xs[0]) * (ys[1] - ys[0]) > 0.0)
    return BBox(xs[0], ys[0], xs[1], ys[1])
