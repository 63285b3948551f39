import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from potlab.eol import SIDE, pipeline, synthetic_line
from potlab.localinfo import (
    CornerInfo, InconsistentInfo, LineKnowledge, LocalInfo, codec_for, local_info, neighbours, phi_local, verify_locality,
)
from potlab.potential import STEP, d1, phi, rounding

from conftest import LINES_2D


@pytest.mark.parametrize("moves", LINES_2D)
def test_locality_exhaustive_d2(moves):
    rep = verify_locality(synthetic_line(2, moves))
    assert rep.points == 30**2 and rep.ok


def test_locality_exhaustive_d3(line3):
    assert verify_locality(line3).ok


@given(st.integers(1, 6), st.integers(0, 100), st.data())
def test_locality_on_random_pipelines(T, seed, data):
    line = pipeline(T, seed)
    x = tuple(data.draw(st.lists(st.integers(0, SIDE), min_size=line.d, max_size=line.d)))
    assert phi_local(x, local_info(line, rounding(x))) == phi(x, line)


def test_off_line_corner_has_blank_answers():
    line = synthetic_line(3, ["+1"])
    info = local_info(line, (29, 29, 29))
    assert all(not any(a) for a in info.answers)


def test_far_from_everything_uses_the_far_formula():
    line = synthetic_line(3, ["+1"])
    x = (27, 26, 25)
    assert phi_local(x, local_info(line, rounding(x))) == STEP * (line.T + 1) + d1(x, line.origin)


def test_end_value_is_zero():
    line = pipeline(3, 5)
    assert phi_local(line.end, local_info(line, line.end)) == 0


def test_interior_corner_answer_matches_directions():
    line = pipeline(3, 5)
    codec = codec_for(line)
    for t in range(0, line.T):
        c = line.corner(t)
        info = codec.decode(c, codec.answer(c))
        assert info.on_line and info.index == t
        assert info.succ == line.corner(t + 1) and info.pred == line.corner(t - 1)


def test_wrong_reference_is_rejected():
    line = synthetic_line(2, ["+1"])
    with pytest.raises(InconsistentInfo):
        phi_local((3, 3), local_info(line, (29, 0)))


def test_truncated_info_is_rejected():
    line = synthetic_line(2, ["+1"])
    info = local_info(line, (0, 0))
    with pytest.raises(InconsistentInfo):
        phi_local((3, 3), LocalInfo(info.reference, info.answers[:2], info.kind, info.T))


def test_conflicting_answers_are_inconsistent():
    line = synthetic_line(2, ["+1", "+2"])
    codec = codec_for(line)
    a = codec.decode((29, 0), codec.answer((29, 0)))
    b = CornerInfo((29, 29), True, a.index, None, (29, 0))  # a second corner with the same index
    with pytest.raises(InconsistentInfo):
        LineKnowledge(2, line.T, [a, b])
    with pytest.raises(InconsistentInfo):
        codec.decode((29, 29), codec.answer((29, 0)))  # a direction that leaves the grid


def test_sampled_locality_d6():
    line = synthetic_line(6, ["+1", "+2", "+3"])
    assert verify_locality(line, "sampled", count=5000, seed=1).ok


def test_neighbours_flip_one_axis():
    for c in itertools.product((0, SIDE), repeat=3):
        ns = neighbours(c)
        assert len(ns) == 3 and all(sum(a != b for a, b in zip(c, n)) == 1 for n in ns)
        assert np.all(np.isin(np.array(ns), (0, SIDE)))
