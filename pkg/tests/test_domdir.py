from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from potlab.domdir import SmallCube, axis_difference, cube_around, dominating_directions, feasible_directions, verify_domdir
from potlab.eol import SIDE, synthetic_line


def test_feasible_interior_and_faces():
    assert feasible_directions(SmallCube((5, 5), (7, 9))) == {(0, 1), (0, -1), (1, 1), (1, -1)}
    assert (0, 1) not in feasible_directions(SmallCube((29, 3), (29, 3)))
    assert (0, 1) in feasible_directions(SmallCube((27, 3), (29, 3)))
    assert (1, -1) not in feasible_directions(SmallCube((3, 0), (4, 0)))


def test_small_cube_rejects_wide_intervals():
    with pytest.raises(ValueError):
        SmallCube((0, 0), (5, 0))


def test_end_singleton_has_no_dominating_direction(line2):
    rep = dominating_directions(SmallCube(line2.end, line2.end), line2)
    assert rep.dominating is None
    assert set(rep.witnesses) == rep.feasible


def test_segment_direction_dominates():
    # E(2) of this line runs from (29,0) to (29,29), so phi falls along +e2
    line = synthetic_line(2, ["+1", "+2"])
    rep = dominating_directions(SmallCube((29, 10), (29, 13)), line)
    assert (1, 1) in rep.all_dominating


def test_far_cube_up_is_dominating():
    line = synthetic_line(2, ["+1"])
    rep = dominating_directions(SmallCube((14, 14), (16, 16)), line)
    assert (1, 1) in rep.all_dominating


def test_top_face_local_minimum_is_a_violation():
    # (13,29) is a strict local minimum of phi for this line
    line = synthetic_line(2, [])
    rep = dominating_directions(SmallCube((13, 29), (13, 29)), line)
    assert rep.dominating is None


def test_sweep_reports_the_end_exception():
    rep = verify_domdir(synthetic_line(2, ["+1"]), "exhaustive")
    assert rep.cubes == 140**2
    assert rep.exceptions == [{"lo": [29, 0], "hi": [29, 0]}]
    # every violation is on the top face (see the dominating-direction failure in the notes)
    assert rep.violations and all(v["lo"][1] == v["hi"][1] == SIDE for v in rep.violations)


def test_sweep_merge_is_order_independent():
    line = synthetic_line(2, ["+1"])
    a = verify_domdir(line, "sampled", count=2000, seed=3)
    b = verify_domdir(line, "sampled", count=2000, seed=3, chunk=500, threads=2)
    assert a.cubes == b.cubes and len(a.violations) == len(b.violations)


@given(st.fractions(0, SIDE, max_denominator=10), st.fractions(0, SIDE, max_denominator=10))
def test_axis_difference_at_least_one_where_dominating(a, b):
    line = synthetic_line(2, ["+1"])
    x = (a, b)
    cube = cube_around(x, 2)
    rep = dominating_directions(cube, line)
    if rep.dominating is None:
        return
    diff = axis_difference(line, x, rep.dominating)
    assert isinstance(diff, Fraction) and diff >= 1
