from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from potlab.eol import pipeline, synthetic_line
from potlab.games.base import BudgetExceeded, bimatrix
from potlab.games.replication import build_replication_game
from potlab.solvers import (
    best_response_dynamics, is_pure_ne, mixed_deviation_check, point_mass, pure_ne_enumerate, rescan_pure_ne,
    support_enum_2p,
)

COORD = bimatrix([[1, 0], [0, 1]], [[1, 0], [0, 1]])
PENNIES = bimatrix([[1, -1], [-1, 1]], [[-1, 1], [1, -1]])


def test_coordination_pure_ne():
    assert sorted(pure_ne_enumerate(COORD)) == [(0, 0), (1, 1)]
    assert is_pure_ne(COORD, (0, 1)).gain == 1


def test_pennies_support_enum():
    h = Fraction(1, 2)
    assert support_enum_2p(PENNIES) == [([h, h], [h, h])]


def test_coordination_support_enum():
    found = support_enum_2p(COORD)
    h = Fraction(1, 2)
    assert ([1, 0], [1, 0]) in found and ([0, 1], [0, 1]) in found and ([h, h], [h, h]) in found
    assert len(found) == 3


def test_support_enum_results_are_equilibria():
    rng = np.random.default_rng(5)
    for _ in range(10):
        g = bimatrix(rng.integers(-5, 6, size=(3, 3)).tolist(), rng.integers(-5, 6, size=(3, 3)).tolist())
        for P, Q in support_enum_2p(g, 3):
            assert mixed_deviation_check(g, [P, Q]) is None


def test_point_mass_on_ne_passes():
    assert mixed_deviation_check(COORD, point_mass(COORD, (1, 1))) is None
    assert mixed_deviation_check(COORD, point_mass(COORD, (0, 1))) is not None


def test_mixed_rejects_bad_distributions():
    with pytest.raises(ValueError):
        mixed_deviation_check(COORD, [[Fraction(1, 2), Fraction(1, 3)], [1, 0]])


@given(st.lists(st.integers(-4, 4), min_size=9, max_size=9), st.lists(st.integers(-4, 4), min_size=9, max_size=9))
def test_enumeration_matches_rescan(a, b):
    g = bimatrix(np.array(a).reshape(3, 3).tolist(), np.array(b).reshape(3, 3).tolist())
    assert rescan_pure_ne(g, pure_ne_enumerate(g))


def test_dynamics_at_equilibrium_takes_no_steps():
    g = build_replication_game(synthetic_line(2, ["+1"]), 4)
    tr = best_response_dynamics(g, g.end_profile())
    assert tr.status == "converged" and tr.steps == 0


def test_dynamics_increase_potential_and_reach_the_end():
    g = build_replication_game(pipeline(1, 0), 8)
    tr = best_response_dynamics(g, (0,) * 3)
    assert tr.status == "converged" and tr.profiles[-1] == g.end_profile()
    assert all(b > a for a, b in zip(tr.potentials, tr.potentials[1:]))


def test_dynamics_step_limit():
    g = build_replication_game(pipeline(1, 0), 8)
    tr = best_response_dynamics(g, (0,) * 3, max_steps=1)
    assert tr.status == "max-steps" and tr.final_gain > 0


def test_enumeration_budget():
    g = build_replication_game(pipeline(1, 0), 8)
    with pytest.raises(BudgetExceeded):
        pure_ne_enumerate(g, budget=10)
