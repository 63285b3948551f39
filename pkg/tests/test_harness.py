import itertools

import pytest
from hypothesis import given, strategies as st

from potlab.eol import SIDE, pipeline, random_line, synthetic_line
from potlab.harness import (
    CountedOracle, Transcript, bits_of, follow_line_solver, int_of, naive_protocol, phi_query_cost, run_counted,
    run_protocol, split_instance,
)
from potlab.potential import phi


@given(st.integers(1, 60), st.integers(0, 1000))
def test_follow_line_uses_T_plus_one_queries(T, seed):
    line = random_line(T, seed)
    end, q = follow_line_solver(CountedOracle(line), T)
    assert end == line.vertices[-1] and q == T + 1


@pytest.mark.parametrize("T,seed", [(1, 0), (1, 3)])
def test_phi_query_cost_exhaustive_d3(T, seed):
    line = pipeline(T, seed)
    o = CountedOracle(line)
    for x in itertools.product(range(SIDE + 1), repeat=line.d):
        v, q = phi_query_cost(x, o)
        assert v == phi(x, line) and q <= line.d + 1


def test_phi_query_cost_synthetic():
    line = synthetic_line(2, ["+1"])
    o = CountedOracle(line)
    for x in itertools.product(range(0, SIDE + 1, 3), repeat=2):
        v, q = phi_query_cost(x, o)
        assert v == phi(x, line) and q == 3


@given(st.integers(1, 20), st.integers(0, 500), st.integers(0, 500))
def test_split_decodes_to_the_answers(T, seed, split_seed):
    s = split_instance(random_line(T, seed), split_seed)
    for key in s.keys:
        for k in range(s.width):
            assert s.indices[key][k] in (0, 1, 2)


@pytest.mark.parametrize("line", [random_line(5, 1), random_line(12, 4), synthetic_line(3, ["+1", "+2", "-1"])])
def test_naive_protocol_bits_match_closed_form(line):
    s = split_instance(line, 7)
    p = naive_protocol(s)
    res = run_protocol(p, s)
    assert res.status == "done"
    assert res.transcript.bits == p.closed_form_bits()
    want = line.vertices[-1] if hasattr(line, "vertices") else line.end
    assert res.output == want


def test_protocol_is_deterministic():
    s = split_instance(random_line(9, 2), 3)

    def once():
        r = run_protocol(naive_protocol(s), s)
        return r.output, r.transcript.bits, r.transcript.to_jsonl()

    assert run_counted(once) == once()


@given(st.integers(0, 2**16 - 1))
def test_bits_roundtrip(v):
    assert int_of(bits_of(v, 16)) == v


def test_transcript_counts_bits():
    tr = Transcript()
    tr.append("bob", (1, 0, 1))
    tr.append("alice", (1,))
    assert tr.bits == 4
    assert len(tr.to_jsonl().splitlines()) == 2
