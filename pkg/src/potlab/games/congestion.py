"""Congestion games from structured two-sided games.

A structured game has u_A = v_C + v_A(a) and u_B = v_C + v_B(b). The reductions
place v_A, v_B on private facilities and v_C on shared (a, b) facilities whose
cost is nonzero only at full congestion.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from potlab.games.base import BudgetExceeded, TableGame
from potlab.games.verify import team_tables_2d, verify_structured_tables


@dataclass
class CongestionGame:
    """``costs[j][l]`` is c_j(l) for l = 0..len-1; ``strategies[i]`` lists player i's facility sets."""

    facilities: list
    costs: dict
    strategies: list
    player_names: list = field(default_factory=list)

    def cost(self, j, load):
        c = self.costs[j]
        if load >= len(c):
            raise KeyError(f"no cost for facility {j} at load {load}")
        return c[load]

    def loads(self, profile) -> dict:
        g: dict = {}
        for i, s in enumerate(profile):
            for j in self.strategies[i][s]:
                g[j] = g.get(j, 0) + 1
        return g

    def utility(self, profile, i):
        g = self.loads(profile)
        return sum(self.cost(j, g[j]) for j in self.strategies[i][profile[i]])

    def utilities(self, profile):
        g = self.loads(profile)
        return [sum(self.cost(j, g[j]) for j in self.strategies[i][profile[i]]) for i in range(len(self.strategies))]

    def profiles(self):
        return itertools.product(*(range(len(s)) for s in self.strategies))

    def to_json(self):
        return {
            "facilities": [str(f) for f in self.facilities],
            "costs": {str(j): [str(c) for c in v] for j, v in self.costs.items()},
            "strategies": [[sorted(str(j) for j in s) for s in S] for S in self.strategies],
        }


def rosenthal_potential(cg: CongestionGame, profile):
    """sum over facilities of c_j(1) + ... + c_j(g_j)."""
    g = cg.loads(profile)
    return sum(sum(cg.costs[j][l] for l in range(1, k + 1)) for j, k in g.items())


def decompose(UA: np.ndarray, UB: np.ndarray):
    """(v_A, v_B, v_C) with UA = v_C + v_A[:, None], UB = v_C + v_B[None, :]; raises if not structured."""
    s = verify_structured_tables(UA, UB)
    if not s.passed:
        raise ValueError(f"game is not structured; witness {s.witness}")
    return s.v_A, s.v_B, s.v_C


def to_congestion_2p(game: TableGame) -> CongestionGame:
    """N x M structured game -> facilities A, B, A x B; F_a = {a} + {(a, b) : b}."""
    if len(game.players) != 2:
        raise ValueError("need a two-player game")
    UA, UB = game.tables[game.players[0].team], game.tables[game.players[1].team]
    vA, vB, vC = decompose(UA, UB)
    N, M = UA.shape
    A = [("a", i) for i in range(N)]
    B = [("b", j) for j in range(M)]
    AB = [("ab", i, j) for i in range(N) for j in range(M)]
    costs = {}
    for i in range(N):
        costs[("a", i)] = [0, vA[i]]
    for j in range(M):
        costs[("b", j)] = [0, vB[j]]
    for i in range(N):
        for j in range(M):
            costs[("ab", i, j)] = [0, 0, vC[i, j]]
    sa = [frozenset([("a", i)] + [("ab", i, j) for j in range(M)]) for i in range(N)]
    sb = [frozenset([("b", j)] + [("ab", i, j) for i in range(N)]) for j in range(M)]
    return CongestionGame(A + B + AB, costs, [sa, sb], [p.name for p in game.players])


def to_congestion_np(game: TableGame, max_facilities: int = 1 << 14) -> CongestionGame:
    """2k binary players (k of team A first, then k of team B) -> facilities over {0,1}^k."""
    ia = [i for i, p in enumerate(game.players) if p.team == "A"]
    ib = [i for i, p in enumerate(game.players) if p.team == "B"]
    k = len(ia)
    if len(ib) != k or any(p.n_actions != 2 for p in game.players):
        raise ValueError("need k binary players per side")
    n_fac = 4**k + 2 ** (k + 1)
    if n_fac > max_facilities:
        raise BudgetExceeded(f"{n_fac} facilities exceed the budget {max_facilities}")
    UA, UB = team_tables_2d(game)
    vA, vB, vC = decompose(UA, UB)
    cube = list(itertools.product((0, 1), repeat=k))
    idx = {a: n for n, a in enumerate(cube)}  # row-major, matches the table flattening
    costs = {}
    for a in cube:
        costs[("a", a)] = [0] * k + [vA[idx[a]]]
        costs[("b", a)] = [0] * k + [vB[idx[a]]]
    for a in cube:
        for b in cube:
            costs[("ab", a, b)] = [0] * (2 * k) + [vC[idx[a], idx[b]]]
    strategies = []
    for i in range(k):
        strategies.append(
            [
                frozenset([("a", a) for a in cube if a[i] == x] + [("ab", a, b) for a in cube if a[i] == x for b in cube])
                for x in (0, 1)
            ]
        )
    for i in range(k):
        strategies.append(
            [
                frozenset([("b", b) for b in cube if b[i] == x] + [("ab", a, b) for b in cube if b[i] == x for a in cube])
                for x in (0, 1)
            ]
        )
    facilities = [("a", a) for a in cube] + [("b", b) for b in cube] + [("ab", a, b) for a in cube for b in cube]
    return CongestionGame(facilities, costs, strategies, [p.name for p in game.players])


@dataclass
class ReductionCheck:
    facilities: int
    expected_facilities: int
    profiles: int
    utility_mismatches: int
    rosenthal_mismatches: int
    first_mismatch: object = None

    @property
    def passed(self) -> bool:
        return self.facilities == self.expected_facilities and not self.utility_mismatches and not self.rosenthal_mismatches

    def to_json(self):
        return {**{k: (str(v) if k == "first_mismatch" and v is not None else v) for k, v in self.__dict__.items()},
                "passed": self.passed}


def check_reduction(game: TableGame, cg: CongestionGame, expected_facilities: int) -> ReductionCheck:
    """Utilities equal the source game on every profile; Rosenthal differences equal utility differences."""
    teams = [p.team for p in game.players]
    bad_u = bad_r = 0
    first = None
    n = 0
    pot = {}
    for prof in cg.profiles():
        n += 1
        u = cg.utilities(prof)
        src = [game.payoff(prof, t) for t in teams]
        if u != src:
            bad_u += 1
            first = first or ("utility", prof)
        pot[prof] = rosenthal_potential(cg, prof)
    for prof in pot:
        u = cg.utilities(prof)
        for i, S in enumerate(cg.strategies):
            for s in range(len(S)):
                if s == prof[i]:
                    continue
                q = prof[:i] + (s,) + prof[i + 1 :]
                if cg.utility(q, i) - u[i] != pot[q] - pot[prof]:
                    bad_r += 1
                    first = first or ("rosenthal", prof, q)
    return ReductionCheck(len(cg.facilities), expected_facilities, n, bad_u, bad_r, first)
