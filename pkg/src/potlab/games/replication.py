"""Replication: each grid coordinate is the average of m binary players."""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np

from potlab.eol import SIDE, EmbeddedLine
from potlab.games.base import BudgetExceeded, CountTeam, GameSpec, Move, Player, averages, count_moves
from potlab.potential import multilinear, phi_cached

DEFAULT_M = 8  # smallest m with 29/m <= 4


class ReplicationGame(GameSpec):
    """d teams of m players with actions {0, 29}; identical utility -phi_bar(a_hat).

    Profiles are count vectors: ``counts[i]`` players of team i play 29.
    """

    name = "replication"

    def __init__(self, line: EmbeddedLine, m: int = DEFAULT_M):
        if m < 1:
            raise ValueError("m must be >= 1")
        self.line, self.m = line, m
        self.count_teams = tuple(CountTeam(f"x{i + 1}", "all", m, 0, SIDE) for i in range(line.d))
        self.players = tuple(Player(f"x{i + 1}.{j + 1}", "all", 2) for i in range(line.d) for j in range(m))
        self.scale = 1
        self.meta = {"d": line.d, "m": m, "compression": "count vectors per team"}
        self._phi = phi_cached(line)
        self._memo: dict = {}

    def size(self) -> int:
        return (self.m + 1) ** self.line.d

    def profiles(self):
        return itertools.product(range(self.m + 1), repeat=self.line.d)

    def deviations(self, counts):
        for i, label, k in count_moves(counts, self.count_teams):
            c = list(counts)
            c[i] = k
            yield Move("all", label, tuple(c))

    def point(self, counts) -> tuple[Fraction, ...]:
        return averages(counts, self.count_teams)

    def potential_value(self, counts) -> Fraction:
        v = self._memo.get(counts)
        if v is None:
            v = self._memo[counts] = -multilinear(self._phi, self.point(counts))
        return v

    def payoff(self, counts, team="all"):
        return self.potential_value(tuple(counts))

    def counts_of_point(self, x) -> tuple[int, ...]:
        out = []
        for v in x:
            k = Fraction(v) * self.m / SIDE
            if k.denominator != 1:
                raise ValueError(f"{x} is not reachable with m={self.m}")
            out.append(int(k))
        return tuple(out)

    def end_profile(self) -> tuple[int, ...]:
        return self.counts_of_point(self.line.end)

    def player_payoff(self, actions) -> Fraction:
        """Utility at an explicit per-player action vector (0/29 per player, team-major)."""
        m = self.m
        counts = tuple(sum(1 for a in actions[i * m : (i + 1) * m] if a == SIDE) for i in range(self.line.d))
        return self.payoff(counts)

    def table(self) -> np.ndarray:
        """Utility over count vectors, shape (m+1,)*d, exact."""
        T = np.empty((self.m + 1,) * self.line.d, dtype=object)
        for c in self.profiles():
            T[c] = self.payoff(c)
        return T

    def mixed_deviation(self, mixed):
        """Exact check of every pure deviation against a product mixture.

        ``mixed[k]`` is (P[0], P[29]) for player k, team-major. Team counts are
        Poisson-binomial, so cost is (m+1)^d per player rather than 2^(dm).
        """
        from potlab.solvers import DeviationWitness

        d, m = self.line.d, self.m
        if len(mixed) != d * m:
            raise ValueError(f"need {d * m} distributions, got {len(mixed)}")
        probs = []
        for k, dist in enumerate(mixed):
            q = [Fraction(v) for v in dist]
            if len(q) != 2 or sum(q) != 1 or min(q) < 0:
                raise ValueError(f"distribution of {self.players[k].name} is not a probability vector")
            probs.append(q[1])
        T = self.table()
        team = [_poisson_binomial(probs[i * m : (i + 1) * m]) for i in range(d)]
        for k, pl in enumerate(self.players):
            i = k // m
            rest = _poisson_binomial(probs[i * m : k] + probs[k + 1 : (i + 1) * m])
            E = []
            for x in (0, 1):
                own = [Fraction(0)] * (m + 1)
                for c, w in enumerate(rest):
                    own[c + x] += w
                E.append(_expect(T, [own if j == i else team[j] for j in range(d)]))
            current = (1 - probs[k]) * E[0] + probs[k] * E[1]
            best = 0 if E[0] >= E[1] else 1
            if E[best] > current:
                return DeviationWitness(pl.name, ("mixed", 1 - best), best, E[best] - current)
        return None


def _poisson_binomial(ps) -> list[Fraction]:
    dist = [Fraction(1)]
    for p in ps:
        nxt = [Fraction(0)] * (len(dist) + 1)
        for c, w in enumerate(dist):
            nxt[c] += w * (1 - p)
            nxt[c + 1] += w * p
        dist = nxt
    return dist


def _expect(T: np.ndarray, dists) -> Fraction:
    out = T
    for dist in dists:
        out = np.tensordot(out, np.array(dist, dtype=object), axes=([0], [0]))
    return Fraction(out.item() if isinstance(out, np.ndarray) else out)


def build_replication_game(line: EmbeddedLine, m: int = DEFAULT_M, budget: int = 10**7) -> ReplicationGame:
    g = ReplicationGame(line, m)
    if g.size() > budget:
        raise BudgetExceeded(f"{g.size()} count vectors exceed the budget {budget}")
    return g
