import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from potlab.eol import synthetic_line
from potlab.games.cc import (
    PointGrid, SideProfile, best_response_protocol, build_cc_multiplayer_game, build_cc_twoplayer_game, certified,
    min_certified_n,
)
from potlab.games.verify import verify_potential_game, verify_sampled
from potlab.harness import run_protocol, split_instance
from potlab.rng import make_rng
from potlab.solvers import best_deviation


@pytest.fixture(scope="module")
def line():
    return synthetic_line(2, ["+1"])


@pytest.fixture(scope="module")
def split(line):
    return split_instance(line, 0)


@pytest.fixture(scope="module")
def ccn(split):
    return build_cc_multiplayer_game(split, 2)


@pytest.fixture(scope="module")
def cc2(split):
    return build_cc_twoplayer_game(split)


def test_certified_exponents(ccn, cc2):
    for kind, g in (("multiplayer", ccn), ("two-player", cc2)):
        n = min_certified_n(kind, g.ceiling)
        assert certified(kind, n, g.ceiling) and not certified(kind, n - 1, g.ceiling)
        assert g.certificate().holds


def test_uncertified_exponent_is_refused(split):
    g = build_cc_multiplayer_game(split, 2, n=1)
    with pytest.raises(ValueError):
        g.pure_ne()


def test_multiplayer_payoffs_are_integers(ccn):
    rng = make_rng(0, 1)
    for _ in range(30):
        p = ccn.random_profile(rng)
        assert all(isinstance(ccn.payoff(p, t), int) for t in "AB")


def test_multiplayer_sampled_cycles(ccn):
    assert verify_sampled(ccn, 300, seed=1).passed


def test_multiplayer_restricted_exhaustive(ccn):
    # truthful families only; the acceptance run adds single-bit flips
    assert ccn.verify_exhaustive(free_bits=()).passed
    assert verify_potential_game(ccn, "sampled", samples=50).passed


def test_truthful_end_is_an_equilibrium(ccn, line):
    assert best_deviation(ccn, ccn.end_profile(line)) is None


def test_lying_about_a_relevant_bit_costs(ccn, line):
    p = ccn.end_profile(line)
    a = p[0]
    lie = SideProfile(a.counts, (1 - a.r1[0],) + a.r1[1:], a.r2)
    assert ccn.payoff((lie, p[1]), "A") < ccn.payoff(p, "A")


@pytest.mark.parametrize("m", [2, 4])
def test_vectorised_ne_matches_scalar(split, m):
    g = build_cc_multiplayer_game(split, m)
    key = lambda ps: sorted((p[0].counts, p[1].counts) for p in ps)  # noqa: E731
    assert key(g.pure_ne()) == key(g.pure_ne_scalar())


@settings(max_examples=15)
@given(st.integers(0, 10**6))
def test_point_grid_rows_match_payoff(seed):
    g = build_cc_multiplayer_game(split_instance(synthetic_line(2, ["+1"]), 0), 4)
    grid = _grid(g)
    rng = make_rng(seed, 3)
    i = int(rng.integers(grid.N))
    side = "AB"[int(rng.integers(2))]
    claims = list(grid.neighbours(i)) + [i]
    c = claims[int(rng.integers(len(claims)))]
    row = grid.utility_row(side, i, c)
    own = g.truthful(side, grid.counts[i])
    own = SideProfile(grid.counts[c], own.r1, own.r2)
    for k in rng.integers(0, grid.N, size=10):
        opp = g.truthful("B" if side == "A" else "A", grid.counts[int(k)])
        prof = (own, opp) if side == "A" else (opp, own)
        assert row[int(k)] == g.payoff(prof, side)


_GRIDS = {}


def _grid(g):
    key = (g.m, g.n)
    if key not in _GRIDS:
        _GRIDS[key] = PointGrid(g)
    return _GRIDS[key]


def test_binary_subgames_are_potential(ccn):
    from potlab.games.verify import verify_table

    base = ccn.truthful_profile((0, 0), (0, 0))
    for free in ([("x", 0)], [("x", 0), ("r1", 0)], [("x", 0), ("x", 1), ("r2", 3)]):
        assert verify_table(ccn.binary_subgame(base, free, free)).passed


def test_block_tables_match_payoff(cc2):
    rng = make_rng(4, 0)
    acts = {s: [cc2.random_profile(rng)[0 if s == "A" else 1] for _ in range(12)] for s in "AB"}
    UA, UB = cc2.block_tables(acts["A"], acts["B"])
    for i, a in enumerate(acts["A"]):
        for j, b in enumerate(acts["B"]):
            assert UA[i, j] == cc2.payoff((a, b), "A") and UB[i, j] == cc2.payoff((a, b), "B")


def test_two_player_sampled_cycles(cc2):
    assert verify_sampled(cc2, 300, seed=2).passed


def test_two_player_truthful_end_is_a_best_response(cc2, line):
    p = cc2.end_profile(line)
    for side, other in (("A", p[1]), ("B", p[0])):
        (x, _), u = cc2.best_response(side, other)
        assert x == line.end and u == cc2.payoff(p, side)


def test_two_player_untruthful_report_loses(cc2, line):
    (a, ra), (b, rb) = cc2.end_profile(line)
    bad = (1 - ra[0],) + ra[1:]
    assert cc2.payoff(((a, bad), (b, rb)), "A") < cc2.payoff(((a, ra), (b, rb)), "A")


def test_restricted_table_is_structured(cc2):
    from potlab.games.verify import verify_structured

    t = cc2.restricted_table(cc2.small_actions("A", 8), cc2.small_actions("B", 8))
    assert verify_structured(t).passed


def test_best_response_protocol_reaches_the_end(cc2, split, line):
    proto = best_response_protocol(cc2)
    res = run_protocol(proto, split)
    assert res.status == "done"
    (a, _), (b, _) = res.output
    assert a == b == line.end


def test_protocol_messages_roundtrip(cc2):
    proto = best_response_protocol(cc2)
    rng = make_rng(9, 0)
    for side in "AB":
        x, r = cc2.random_profile(rng)[0 if side == "A" else 1]
        assert proto.decode(side, proto.encode(side, True, (x, r))) == (True, (x, r))


def test_sizes(ccn, cc2):
    assert ccn.size() == 3**4 * 2 ** (2 * ccn.len_a + 2 * ccn.len_b)
    assert cc2.size() == 900**2 * 2**cc2.len_a * 3**cc2.len_b
    assert len(list(itertools.islice(ccn.deviations(ccn.end_profile(synthetic_line(2, ["+1"]))), 5))) == 5
    assert np.all(np.array([p.n_actions for p in ccn.players]) == 2)
