"""Finite games with exact utilities.

Every game here is a team game: a player's utility is the utility of its
team, and singleton teams cover ordinary games. A profile is any hashable
value; ``deviations`` lists the unilateral moves out of it, which is where
count compression lives (one move per (team, current action) class instead of
one per player).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Iterator

import numpy as np


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class Player:
    name: str
    team: str
    n_actions: int


@dataclass(frozen=True)
class Move:
    """A unilateral deviation: ``mover`` (a player or player class) of ``team`` goes to ``target``."""

    team: str
    mover: str
    target: Hashable


class GameSpec:
    """Base class: subclasses provide ``profiles``, ``deviations`` and ``payoff``."""

    name = "game"
    players: tuple[Player, ...] = ()
    scale: int = 1  # utilities are multiplied by this to stay integral
    meta: dict

    @property
    def teams(self) -> tuple[str, ...]:
        seen = []
        for p in self.players:
            if p.team not in seen:
                seen.append(p.team)
        return tuple(seen)

    def size(self) -> int:
        raise NotImplementedError

    def profiles(self) -> Iterator[Hashable]:
        raise NotImplementedError

    def deviations(self, profile) -> Iterator[Move]:
        raise NotImplementedError

    def payoff(self, profile, team: str):
        raise NotImplementedError

    def utility_vector(self, profile) -> dict[str, object]:
        return {t: self.payoff(profile, t) for t in self.teams}


class TableGame(GameSpec):
    """Explicit utility tables indexed by per-player action indices.

    ``tables[team]`` has shape ``(n_actions of player 0, ..., player k-1)``.
    Tables may be int64 or object (Python int / Fraction) arrays.
    """

    def __init__(self, players, tables: dict, name: str = "table", scale: int = 1, meta: dict | None = None,
                 labels: list | None = None):
        self.players = tuple(players)
        self.tables = tables
        self.name = name
        self.scale = scale
        self.meta = dict(meta or {})
        self.labels = labels
        shape = tuple(p.n_actions for p in self.players)
        for team, t in tables.items():
            if t.shape != shape:
                raise ValueError(f"table for {team} has shape {t.shape}, expected {shape}")
        if set(tables) != set(self.teams):
            raise ValueError("need exactly one table per team")

    @property
    def shape(self):
        return tuple(p.n_actions for p in self.players)

    def size(self) -> int:
        return int(np.prod(self.shape, dtype=object))

    def profiles(self):
        return itertools.product(*(range(n) for n in self.shape))

    def deviations(self, profile):
        for i, p in enumerate(self.players):
            for a in range(p.n_actions):
                if a != profile[i]:
                    q = list(profile)
                    q[i] = a
                    yield Move(p.team, p.name, tuple(q))

    def payoff(self, profile, team):
        v = self.tables[team][tuple(profile)]
        return v.item() if isinstance(v, np.generic) else v


class OracleGame(GameSpec):
    """Explicit per-player action lists with a payoff callable; for small games."""

    def __init__(self, players, payoff: Callable, name="oracle", scale=1, meta=None):
        self.players = tuple(players)
        self._payoff = payoff
        self.name, self.scale, self.meta = name, scale, dict(meta or {})

    def size(self):
        out = 1
        for p in self.players:
            out *= p.n_actions
        return out

    def profiles(self):
        return itertools.product(*(range(p.n_actions) for p in self.players))

    def deviations(self, profile):
        for i, p in enumerate(self.players):
            for a in range(p.n_actions):
                if a != profile[i]:
                    q = list(profile)
                    q[i] = a
                    yield Move(p.team, p.name, tuple(q))

    def payoff(self, profile, team):
        return self._payoff(tuple(profile), team)

    def to_table(self, dtype=object) -> TableGame:
        shape = tuple(p.n_actions for p in self.players)
        tables = {t: np.empty(shape, dtype=dtype) for t in self.teams}
        for prof in self.profiles():
            for t in self.teams:
                tables[t][prof] = self.payoff(prof, t)
        return TableGame(self.players, tables, self.name, self.scale, self.meta)


def bimatrix(A, B, name="bimatrix") -> TableGame:
    """Two-player game from payoff matrices (rows: player 0)."""
    A = np.array(A, dtype=object)
    B = np.array(B, dtype=object)
    players = (Player("row", "row", A.shape[0]), Player("col", "col", A.shape[1]))
    return TableGame(players, {"row": A, "col": B}, name=name)


@dataclass(frozen=True)
class CountTeam:
    """``size`` identical binary players whose actions are (low, high)."""

    name: str
    side: str  # the utility class the team belongs to
    size: int
    low: int = 0
    high: int = 29


def count_moves(counts: tuple[int, ...], teams: Iterable[CountTeam]) -> Iterator[tuple[int, str, int]]:
    """(team position, mover label, new count) for every class of unilateral move."""
    for i, (k, team) in enumerate(zip(counts, teams)):
        if k > 0:
            yield i, f"{team.name}:{team.high}->{team.low}", k - 1
        if k < team.size:
            yield i, f"{team.name}:{team.low}->{team.high}", k + 1


def averages(counts, teams) -> tuple[Fraction, ...]:
    return tuple(Fraction(k * t.high + (t.size - k) * t.low, t.size) for k, t in zip(counts, teams))


@dataclass
class Memo:
    """Small dict memo with hit counters, used to cache payoffs during sweeps."""

    fn: Callable
    store: dict = field(default_factory=dict)

    def __call__(self, *key):
        v = self.store.get(key)
        if v is None:
            v = self.store[key] = self.fn(*key)
        return v
