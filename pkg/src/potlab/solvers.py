"""Pure equilibria, best-response dynamics and small mixed checks, all in exact arithmetic.

Tie-breaking is always: lowest player (deviation order of the game), then
lowest action index.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from potlab.games.base import BudgetExceeded, GameSpec, TableGame


@dataclass(frozen=True)
class DeviationWitness:
    player: str
    profile: object
    target: object
    gain: object

    def to_json(self):
        return {"player": self.player, "from": str(self.profile), "to": str(self.target), "gain": str(self.gain)}


def best_deviation(game: GameSpec, profile) -> DeviationWitness | None:
    """The strictly improving deviation with maximal gain, or None at a pure NE."""
    best = None
    base: dict = {}
    for mv in game.deviations(profile):
        if mv.team not in base:
            base[mv.team] = game.payoff(profile, mv.team)
        gain = game.payoff(mv.target, mv.team) - base[mv.team]
        if gain > 0 and (best is None or gain > best.gain):
            best = DeviationWitness(mv.mover, profile, mv.target, gain)
    return best


def is_pure_ne(game: GameSpec, profile) -> DeviationWitness | None:
    """None if ``profile`` is a pure NE, else the best improving deviation."""
    return best_deviation(game, tuple(profile) if not isinstance(profile, tuple) else profile)


def _table_ne_mask(game: TableGame) -> np.ndarray:
    ok = np.ones(game.shape, dtype=bool)
    for i, p in enumerate(game.players):
        U = game.tables[p.team]
        ok &= U == U.max(axis=i, keepdims=True)
    return ok


def pure_ne_enumerate(game: GameSpec, budget: int = 10**6) -> list:
    """Every pure NE of the (compressed) profile space."""
    if hasattr(game, "pure_ne"):
        return game.pure_ne(budget=budget)
    if game.size() > budget:
        raise BudgetExceeded(f"{game.size()} profiles exceed the budget {budget}")
    if isinstance(game, TableGame):
        return [tuple(int(v) for v in idx) for idx in np.argwhere(_table_ne_mask(game))]
    return [p for p in game.profiles() if is_pure_ne(game, p) is None]


def rescan_pure_ne(game: GameSpec, found: list, budget: int = 10**6) -> bool:
    """Independent per-profile re-scan; True iff ``found`` is exactly the set of pure NE."""
    if game.size() > budget:
        raise BudgetExceeded(f"{game.size()} profiles exceed the budget {budget}")
    scan = [p for p in game.profiles() if is_pure_ne(game, p) is None]
    return sorted(map(tuple, scan)) == sorted(map(tuple, found))


# --- best-response dynamics ----------------------------------------------------


@dataclass
class Trajectory:
    status: str  # "converged" | "max-steps"
    profiles: list
    potentials: list
    movers: list = field(default_factory=list)
    final_gain: object = 0

    @property
    def steps(self) -> int:
        return len(self.profiles) - 1

    def to_json(self):
        return {
            "status": self.status,
            "steps": self.steps,
            "profiles": [str(p) for p in self.profiles],
            "potentials": [str(v) for v in self.potentials],
            "movers": self.movers,
            "final_gain": str(self.final_gain),
        }


def best_response_dynamics(game: GameSpec, start, max_steps: int = 10**4, potential=None) -> Trajectory:
    """Maximal-gain deviations until no player can improve.

    ``potential(profile)`` defaults to ``game.potential_value``; it must increase
    strictly at every step, which is asserted.
    """
    pot = potential or getattr(game, "potential_value", None)
    p = tuple(start)
    profiles, pots, movers = [p], [pot(p) if pot else None], []
    for _ in range(max_steps):
        w = best_deviation(game, p)
        if w is None:
            return Trajectory("converged", profiles, pots, movers, 0)
        p = w.target
        profiles.append(p)
        movers.append(w.player)
        if pot:
            v = pot(p)
            if not v > pots[-1]:
                raise AssertionError(f"potential did not increase at step {len(movers)}: {pots[-1]} -> {v}")
            pots.append(v)
    w = best_deviation(game, p)
    return Trajectory("converged" if w is None else "max-steps", profiles, pots, movers, 0 if w is None else w.gain)


# --- mixed profiles ---------------------------------------------------------------


def _contract_except(U: np.ndarray, mixed, keep: int) -> np.ndarray:
    """Expected table over every axis except ``keep``."""
    out = U
    axis = 0
    for j, dist in enumerate(mixed):
        if j == keep:
            axis += 1
            continue
        out = np.tensordot(out, np.array(dist, dtype=object), axes=([axis], [0]))
    return out


def mixed_deviation_check(game: GameSpec, mixed, budget: int = 2 * 10**6) -> DeviationWitness | None:
    """Exact expected-utility check of every unilateral pure deviation.

    ``mixed`` is one distribution per player (sequence of Fractions over its actions).
    Games may provide their own ``mixed_deviation`` (count-compressed games do).
    """
    if hasattr(game, "mixed_deviation"):
        return game.mixed_deviation(mixed)
    if not isinstance(game, TableGame):
        raise TypeError("mixed checks need a table game or a game-specific implementation")
    if game.size() > budget:
        raise BudgetExceeded(f"{game.size()} profiles exceed the budget {budget}")
    for i, p in enumerate(game.players):
        dist = [Fraction(v) for v in mixed[i]]
        if sum(dist) != 1 or min(dist) < 0:
            raise ValueError(f"distribution of {p.name} is not a probability vector")
        E = _contract_except(game.tables[p.team], mixed, i)
        current = sum(q * e for q, e in zip(dist, E))
        k = int(np.argmax([e for e in E]))
        if E[k] > current:
            frm = max(range(len(dist)), key=lambda a: (dist[a], -a))
            return DeviationWitness(p.name, ("mixed", frm), k, E[k] - current)
    return None


def point_mass(game: GameSpec, profile) -> list:
    return [[Fraction(int(a == profile[i])) for a in range(p.n_actions)] for i, p in enumerate(game.players)]


# --- support enumeration -------------------------------------------------------------


def _solve(rows: list[list[Fraction]], rhs: list[Fraction]):
    """Unique solution of a square-or-tall exact linear system, else None."""
    n = len(rows[0])
    M = [list(r) + [b] for r, b in zip(rows, rhs)]
    piv_row = 0
    pivots = []
    for col in range(n):
        sel = next((r for r in range(piv_row, len(M)) if M[r][col] != 0), None)
        if sel is None:
            return None
        M[piv_row], M[sel] = M[sel], M[piv_row]
        pv = M[piv_row][col]
        M[piv_row] = [v / pv for v in M[piv_row]]
        for r in range(len(M)):
            if r != piv_row and M[r][col] != 0:
                f = M[r][col]
                M[r] = [a - f * b for a, b in zip(M[r], M[piv_row])]
        pivots.append(col)
        piv_row += 1
    if any(M[r][n] != 0 for r in range(piv_row, len(M))):
        return None
    return [M[i][n] for i in range(n)]


def _indifference(A, S_own, S_other):
    """Opponent mixture over S_other making every row of S_own equally good: (q, value)."""
    k = len(S_other)
    rows = [[Fraction(A[i][j]) for j in S_other] + [Fraction(-1)] for i in S_own]
    rows.append([Fraction(1)] * k + [Fraction(0)])
    sol = _solve(rows, [Fraction(0)] * len(S_own) + [Fraction(1)])
    if sol is None:
        return None
    return sol[:k], sol[k]


def support_enum_2p(game: TableGame, max_support: int = 2, budget: int = 10**6) -> list:
    """All mixed NE whose supports have sizes at most ``max_support`` and are determined uniquely.

    Each result is (p, q) with exact Fraction vectors. Support pairs whose
    indifference systems are degenerate are skipped (equal-size supports cover
    nondegenerate games).
    """
    if len(game.players) != 2:
        raise ValueError("support enumeration needs a two-player game")
    if not 1 <= max_support <= 3:
        raise ValueError("max_support must be in 1..3")
    A = game.tables[game.players[0].team]
    B = game.tables[game.players[1].team]
    n1, n2 = A.shape
    Bt = B.T
    pairs = sum(
        _comb(n1, k1) * _comb(n2, k2) for k1 in range(1, max_support + 1) for k2 in range(1, max_support + 1) if k1 == k2
    )
    if pairs > budget:
        raise BudgetExceeded(f"{pairs} support pairs exceed the budget {budget}")
    found = []
    for k in range(1, max_support + 1):
        for S1 in itertools.combinations(range(n1), k):
            for S2 in itertools.combinations(range(n2), k):
                r = _indifference(A, S1, S2)
                c = _indifference(Bt, S2, S1)
                if r is None or c is None:
                    continue
                (q, v), (p, w) = r, c
                if min(q) <= 0 or min(p) <= 0:
                    continue
                P = [Fraction(0)] * n1
                Q = [Fraction(0)] * n2
                for i, x in zip(S1, p):
                    P[i] = x
                for j, x in zip(S2, q):
                    Q[j] = x
                if any(sum(Fraction(A[i][j]) * Q[j] for j in range(n2)) > v for i in range(n1)):
                    continue
                if any(sum(Fraction(B[i][j]) * P[i] for i in range(n1)) > w for j in range(n2)):
                    continue
                if (P, Q) not in found:
                    found.append((P, Q))
    return found


def _comb(n, k):
    from math import comb

    return comb(n, k)
