from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from potlab.eol import SIDE, synthetic_line
from potlab.games.reports import (
    Public, alice_truth, bob_truth_binary, bob_truth_ternary, combine, relevance_classify, report_based_potential,
    slots, two_player_reference,
)
from potlab.harness import split_instance
from potlab.localinfo import InconsistentInfo
from potlab.potential import multilinear_phi, rounding

rat = st.fractions(0, SIDE, max_denominator=4)


def test_vertex_region():
    r = relevance_classify((3, 27))
    assert r.region == "vertex" and r.relevant == 1 and r.ref1 == r.ref2 == (0, 29)


def test_edge_switches():
    at = lambda v: relevance_classify((v, 29))  # noqa: E731
    assert at(Fraction(14)).ref1 == (0, 29) and at(Fraction(14)).ref2 == (0, 29)
    assert at(Fraction(29, 2)).ref2 == (29, 29) and at(Fraction(29, 2)).ref1 == (0, 29)
    assert at(Fraction(15)).ref1 == (0, 29) and at(Fraction(31, 2)).ref1 == (29, 29)
    assert at(Fraction(29, 2)).relevant == 1 and at(Fraction(15)).relevant == 2


def test_initial_edge_and_far():
    assert relevance_classify((0, 14)).region == "initial-edge"
    far = relevance_classify((14, 15))
    assert far.region == "far" and far.relevant is None and far.ref1 == rounding((14, 15))


@given(rat, rat)
def test_references_are_corners_near_the_point(a, b):
    r = relevance_classify((a, b))
    for ref in (r.ref1, r.ref2):
        assert all(c in (0, SIDE) for c in ref)
        if r.region != "far":
            assert max(abs(x - c) for x, c in zip((a, b), ref)) <= 16


def test_two_player_reference():
    assert two_player_reference((3, 28)) == (0, 29)
    assert two_player_reference((14, 28)) == (0, 29)
    assert two_player_reference((13, 14)) == rounding((13, 14))


def _setup(moves=("+1",), seed=0):
    line = synthetic_line(2, list(moves))
    s = split_instance(line, seed)
    return line, s, Public(s.kind, s.T, s.d, s.width)


@given(st.integers(0, SIDE), st.integers(0, SIDE))
def test_truthful_reports_give_phi_bar(a, b):
    line, s, pub = _setup(("+1", "+2"))
    x = (a, b)
    ref = rounding(x)
    A = (alice_truth(s.alice_view(), ref), ref)
    B = (bob_truth_binary(s.bob_view(), ref), ref)
    assert report_based_potential(pub, A, B, [x])[0] == multilinear_phi(x, line)


def test_slots_are_reference_and_neighbours():
    assert slots((0, 29)) == [(0, 29), (29, 29), (0, 0)]


def test_bad_index_code_is_inconsistent():
    line, s, pub = _setup()
    ref = (0, 0)
    A = (alice_truth(s.alice_view(), ref), ref)
    B = bob_truth_binary(s.bob_view(), ref)
    B = (1, 1) + B[2:]
    with pytest.raises(InconsistentInfo):
        combine(pub, A, (B, ref))
    assert report_based_potential(pub, A, (B, ref), [(1, 1)]) == (0,)


def test_ternary_and_binary_truth_agree():
    _, s, _ = _setup()
    ref = (29, 0)
    tern = bob_truth_ternary(s.bob_view(), ref)
    bits = bob_truth_binary(s.bob_view(), ref)
    assert tuple(2 * bits[2 * i] + bits[2 * i + 1] for i in range(len(tern))) == tern


def test_no_relevant_report_means_public_knowledge_only():
    line, _, pub = _setup()
    k = combine(pub, None, None)
    assert set(k.infos) == {line.origin}
