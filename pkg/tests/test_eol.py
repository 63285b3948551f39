import itertools

import pytest
from hypothesis import given, strategies as st

from potlab import eol
from potlab.eol import PyramidVertex, SIDE


@given(st.integers(1, 40), st.integers(0, 2**32))
def test_random_line_is_valid_and_replayable(T, seed):
    a, b = eol.random_line(T, seed), eol.random_line(T, seed)
    assert a == b
    assert len(a.vertices) == T + 1
    assert all(a.in_pyramid(v) for v in a.vertices)
    assert [eol.meter_index(v) for v in a.vertices] == list(range(T + 1))


@given(st.integers(1, 12), st.integers(0, 1000))
def test_line_query_agrees_with_membership(T, seed):
    line = eol.random_line(T, seed)
    for v in line.pyramid_vertices():
        ans = eol.line_query(line, v)
        on = line.position(v) is not None
        assert bool(ans.t) == on
        if on and v.x + v.y < T:
            nxt = line.vertices[line.position(v) + 1]
            assert bool(ans.s) == (nxt.x > v.x)


def test_line_query_first_step():
    line = eol.PyramidLine.from_steps(["+1", "+2"])
    assert eol.line_query(line, PyramidVertex(0, 0)).bits() == (1, 1, 0)


def test_line_query_outside_pyramid():
    line = eol.random_line(3, 0)
    with pytest.raises(eol.DomainError):
        eol.line_query(line, PyramidVertex(3, 1))


@given(st.integers(0, 2**20))
def test_gray_roundtrip_and_adjacency(x):
    assert eol.gray_inverse(eol.gray(x)) == x
    assert bin(eol.gray(x) ^ eol.gray(x + 1)).count("1") == 1


@given(st.integers(1, 30), st.integers(0, 500))
def test_gray_embed_steps_flip_one_bit(T, seed):
    h = eol.gray_embed(eol.random_line(T, seed))
    for u, v in zip(h.points, h.points[1:]):
        assert sum(a != b for a, b in zip(u, v)) == 1


@given(st.integers(1, 20), st.integers(0, 500))
def test_embedding_is_a_simple_corner_path(T, seed):
    emb = eol.pipeline(T, seed)
    assert emb.T == T
    assert emb.corners[0] == (0,) * (emb.d - 1) + (SIDE,)
    assert emb.corners[1] == (0,) * emb.d
    assert len(set(emb.corners)) == len(emb.corners)


def test_synthetic_single_step():
    line = eol.synthetic_line(2, ["+1"])
    assert line.corners == ((0, 29), (0, 0), (29, 0))
    assert line.end == (29, 0)


@pytest.mark.parametrize("moves", [["+2"], ["+1", "-1"], ["+3"], ["+1", "+1"]])
def test_synthetic_rejects_bad_moves(moves):
    with pytest.raises(eol.InvalidLineError):
        eol.synthetic_line(2, moves)


def test_line_files_roundtrip(tmp_path):
    for line in (eol.random_line(5, 3), eol.synthetic_line(3, ["+1", "+2"])):
        p = tmp_path / "line.json"
        eol.write_line(p, line)
        assert eol.read_line(p) == line


def test_dimension_formula():
    for T in (1, 2, 3, 4, 7, 8):
        emb = eol.pipeline(T, 0)
        assert emb.d == 2 * eol.coord_bits(T) + 1


def test_segments_cover_the_line():
    emb = eol.pipeline(4, 1)
    pts = set(itertools.chain.from_iterable(emb.segment(t) for t in range(emb.T + 1)))
    for c in emb.corners:
        assert c in pts
