import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from potlab.games.base import Player, TableGame, bimatrix
from potlab.games.congestion import (
    CongestionGame, check_reduction, decompose, rosenthal_potential, to_congestion_2p, to_congestion_np,
)


def structured_bimatrix(vA, vB, vC):
    vA, vB, vC = np.array(vA, dtype=object), np.array(vB, dtype=object), np.array(vC, dtype=object)
    return bimatrix(vC + vA[:, None], vC + vB[None, :])


@settings(max_examples=25)
@given(st.integers(1, 5).flatmap(lambda n: st.tuples(
    st.lists(st.integers(-9, 9), min_size=n, max_size=n),
    st.lists(st.integers(-9, 9), min_size=n, max_size=n),
    st.lists(st.integers(-9, 9), min_size=n * n, max_size=n * n))))
def test_two_player_reduction(data):
    vA, vB, vC = data
    n = len(vA)
    g = structured_bimatrix(vA, vB, np.array(vC).reshape(n, n))
    cg = to_congestion_2p(g)
    rep = check_reduction(g, cg, n * n + 2 * n)
    assert rep.passed


def test_decompose_roundtrip():
    g = structured_bimatrix([1, 2], [3, 4, 5], [[1, 0, 2], [7, 1, 1]])
    vA, vB, vC = decompose(g.tables["row"], g.tables["col"])
    assert (vC + vA[:, None] == g.tables["row"]).all() and (vC + vB[None, :] == g.tables["col"]).all()


def test_unstructured_game_is_refused():
    with pytest.raises(ValueError):
        to_congestion_2p(bimatrix([[1, -1], [-1, 1]], [[-1, 1], [1, -1]]))


def _random_binary_game(k, rng):
    shape = (2,) * (2 * k)
    vC = rng.integers(-5, 6, size=shape).astype(object)
    vA = rng.integers(-5, 6, size=(2,) * k).astype(object)
    vB = rng.integers(-5, 6, size=(2,) * k).astype(object)
    UA = vC + vA.reshape(vA.shape + (1,) * k)
    UB = vC + vB.reshape((1,) * k + vB.shape)
    players = [Player(f"a{i}", "A", 2) for i in range(k)] + [Player(f"b{i}", "B", 2) for i in range(k)]
    return TableGame(players, {"A": UA, "B": UB})


@pytest.mark.parametrize("k", [1, 2, 3])
def test_multiplayer_reduction(k):
    g = _random_binary_game(k, np.random.default_rng(k))
    cg = to_congestion_np(g)
    rep = check_reduction(g, cg, 4**k + 2 ** (k + 1))
    assert rep.passed and rep.profiles == 4**k


def test_rosenthal_single_facility():
    cg = CongestionGame(["f"], {"f": [0, -1, -3]}, [[frozenset(), frozenset({"f"})]] * 2)
    assert rosenthal_potential(cg, (1, 1)) == -4
    assert cg.utilities((1, 1)) == [-3, -3]
    with pytest.raises(KeyError):
        cg.cost("f", 3)


def test_facility_budget():
    from potlab.games.base import BudgetExceeded

    g = _random_binary_game(2, np.random.default_rng(0))
    with pytest.raises(BudgetExceeded):
        to_congestion_np(g, max_facilities=10)
