"""Exact checks that a game is a potential game, and that a two-sided game is structured."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from potlab.games.base import BudgetExceeded, GameSpec, TableGame
from potlab.rng import make_rng


@dataclass
class EdgeWitness:
    """A unilateral move whose utility change disagrees with the potential built so far."""

    profile: object
    target: object
    mover: str
    utility_change: object
    potential_change: object

    def to_json(self):
        return {k: str(v) for k, v in self.__dict__.items()}


@dataclass
class PotentialCheck:
    passed: bool
    mode: str
    profiles: int = 0
    edges: int = 0
    witness: EdgeWitness | None = None
    potential: object = field(default=None, repr=False)

    def to_json(self):
        return {
            "passed": self.passed,
            "mode": self.mode,
            "profiles": self.profiles,
            "edges": self.edges,
            "witness": None if self.witness is None else self.witness.to_json(),
        }


def table_potential(game: TableGame) -> np.ndarray:
    """Integrate utility differences along the axes, player by player, from action 0."""
    shape = game.shape
    k = len(shape)
    P = np.zeros(shape, dtype=object if any(t.dtype == object for t in game.tables.values()) else np.int64)
    for i, p in enumerate(game.players):
        U = game.tables[p.team]
        idx = tuple(slice(None) if j <= i else 0 for j in range(k))
        base = tuple(slice(None) if j < i else 0 for j in range(k))
        step = U[idx] - np.expand_dims(U[base], axis=i)
        P = P + step.reshape(step.shape + (1,) * (k - 1 - i))
    return P


def verify_table(game: TableGame) -> PotentialCheck:
    P = table_potential(game)
    edges = 0
    for i, p in enumerate(game.players):
        W = game.tables[p.team] - P
        ref = np.take(W, [0], axis=i)
        bad = W != ref
        edges += game.size() * (p.n_actions - 1)
        if bad.any():
            prof = tuple(int(v) for v in np.argwhere(bad)[0])
            base = list(prof)
            base[i] = 0
            base = tuple(base)
            U = game.tables[p.team]
            w = EdgeWitness(base, prof, p.name, U[prof] - U[base], P[prof] - P[base])
            return PotentialCheck(False, "exhaustive-table", game.size(), edges, w)
    return PotentialCheck(True, "exhaustive-table", game.size(), edges, None, P)


def verify_graph(game: GameSpec, budget: int = 10**6, start=None) -> PotentialCheck:
    """Spanning-tree integration over the (compressed) profile graph; every edge is validated."""
    if game.size() > budget:
        raise BudgetExceeded(f"{game.size()} profiles exceed the budget {budget}")
    P: dict = {}
    edges = 0
    for root in ([start] if start is not None else []) + list(game.profiles()):
        if root in P:
            continue
        P[root] = 0
        queue = deque([root])
        while queue:
            p = queue.popleft()
            for mv in game.deviations(p):
                du = game.payoff(mv.target, mv.team) - game.payoff(p, mv.team)
                edges += 1
                q = mv.target
                if q not in P:
                    P[q] = P[p] + du
                    queue.append(q)
                elif P[q] - P[p] != du:
                    return PotentialCheck(False, "exhaustive-graph", len(P), edges, EdgeWitness(p, q, mv.mover, du, P[q] - P[p]))
    return PotentialCheck(True, "exhaustive-graph", len(P), edges, None, P)


def four_cycle_defect(payoff: Callable, p, move_i, move_j, team_i: str, team_j: str):
    """Monderer-Shapley cycle sum for two commuting moves by different players; 0 in a potential game."""
    pi = move_i(p)
    pij = move_j(pi)
    pj = move_j(p)
    return (
        payoff(pi, team_i) - payoff(p, team_i)
        + payoff(pij, team_j) - payoff(pi, team_j)
        + payoff(pj, team_i) - payoff(pij, team_i)
        + payoff(p, team_j) - payoff(pj, team_j)
    )


def verify_sampled(game: GameSpec, samples: int = 1000, seed: int = 0) -> PotentialCheck:
    """Random 4-cycles; the game must provide ``random_profile(rng)`` and ``random_moves(profile, rng)``."""
    rng = make_rng(seed, stream=21)
    for s in range(samples):
        p = game.random_profile(rng)
        (mi, ti, li), (mj, tj, lj) = game.random_moves(p, rng)
        defect = four_cycle_defect(game.payoff, p, mi, mj, ti, tj)
        if defect != 0:
            return PotentialCheck(False, "sampled-4-cycles", s + 1, 4 * (s + 1), EdgeWitness(p, (li, lj), f"{li}|{lj}", defect, 0))
    return PotentialCheck(True, "sampled-4-cycles", samples, 4 * samples)


def verify_potential_game(game: GameSpec, mode: str = "exhaustive", budget: int = 10**6, samples: int = 1000,
                          seed: int = 0) -> PotentialCheck:
    if mode == "sampled":
        return verify_sampled(game, samples, seed)
    if hasattr(game, "verify_exhaustive"):
        return game.verify_exhaustive(budget=budget)
    if isinstance(game, TableGame):
        if game.size() > budget:
            raise BudgetExceeded(f"{game.size()} profiles exceed the budget {budget}")
        return verify_table(game)
    return verify_graph(game, budget)


# --- structured two-sided games ----------------------------------------------


@dataclass
class StructuredCheck:
    passed: bool
    pairs: int
    witness: tuple | None = None
    v_A: object = field(default=None, repr=False)
    v_B: object = field(default=None, repr=False)
    v_C: object = field(default=None, repr=False)

    def to_json(self):
        return {"passed": self.passed, "pairs": self.pairs, "witness": None if self.witness is None else [str(w) for w in self.witness]}


def verify_structured_tables(UA: np.ndarray, UB: np.ndarray, keep: bool = True) -> StructuredCheck:
    """U_A - U_B must split as v_A(a) - v_B(b); tables are indexed [a, b]."""
    D = UA - UB
    vA = D[:, 0]
    vB = D[0, 0] - D[0, :]
    bad = D != (vA[:, None] - vB[None, :])
    if bad.any():
        a, b = (int(v) for v in np.argwhere(bad)[0])
        return StructuredCheck(False, D.size, (a, b, D[a, b] - D[a, 0] - D[0, b] + D[0, 0]))
    vC = UA - vA[:, None]
    return StructuredCheck(True, D.size, None, vA, vB, vC if keep else None)


def verify_structured_chunks(a_count: int, b_count: int, block: Callable, chunk: int = 256) -> StructuredCheck:
    """Streaming version: ``block(a0, a1)`` returns (UA, UB) rows for actions a0..a1-1 against all b."""
    UA0, UB0 = block(0, 1)
    D0 = (UA0 - UB0)[0]
    for a0 in range(0, a_count, chunk):
        a1 = min(a_count, a0 + chunk)
        UA, UB = block(a0, a1)
        D = UA - UB
        X = D - D[:, [0]] - D0[None, :] + D0[0]
        bad = X != 0
        if bad.any():
            i, b = (int(v) for v in np.argwhere(bad)[0])
            return StructuredCheck(False, a1 * b_count, (a0 + i, b, X[i, b]))
    return StructuredCheck(True, a_count * b_count)


def team_tables_2d(game: TableGame, side_a: str = "A", side_b: str = "B") -> tuple[np.ndarray, np.ndarray]:
    """Flatten a two-team table game into [joint A action, joint B action] matrices."""
    ia = [i for i, p in enumerate(game.players) if p.team == side_a]
    ib = [i for i, p in enumerate(game.players) if p.team == side_b]
    if ia + ib != list(range(len(game.players))):
        raise ValueError("players must be ordered: all of team A, then all of team B")
    na = int(np.prod([game.shape[i] for i in ia]))
    nb = int(np.prod([game.shape[i] for i in ib]))
    return game.tables[side_a].reshape(na, nb), game.tables[side_b].reshape(na, nb)


def verify_structured(game, split=None, **kw) -> StructuredCheck:
    """Structured decomposition check; cc games supply their own exact sweep."""
    if hasattr(game, "verify_structured"):
        return game.verify_structured(**kw)
    if isinstance(game, TableGame):
        UA, UB = team_tables_2d(game)
        return verify_structured_tables(UA, UB)
    raise TypeError(f"cannot check structure of {type(game).__name__}")


def add_cross_term(game: TableGame, team: str, where: Sequence[int], delta) -> TableGame:
    """Negative control: perturb one team's table at one profile."""
    tables = {t: v.copy() for t, v in game.tables.items()}
    tables[team][tuple(where)] += delta
    return TableGame(game.players, tables, name=game.name + "+perturbed", scale=game.scale, meta=game.meta)
