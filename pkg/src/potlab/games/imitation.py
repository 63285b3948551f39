"""High-degree imitation: two teams pick grid points and pay (a_i - b_i)^(2n)."""

from __future__ import annotations

import numpy as np

from potlab.eol import SIDE, EmbeddedLine
from potlab.games.base import BudgetExceeded, Player, TableGame
from potlab.potential import phi, phi_grid


def imitation_loss(a, b, n: int) -> int:
    return sum((int(x) - int(y)) ** (2 * n) for x, y in zip(a, b))


def imitation_utilities(line: EmbeddedLine, a, b, n: int) -> tuple[int, int]:
    """(u_A, u_B) at points a, b."""
    im = imitation_loss(a, b, n)
    return -im - 2 * phi(a, line), -im - 2 * phi(b, line)


def build_imitation_game(line: EmbeddedLine, degree_half: int, budget: int = 2 * 10**6) -> TableGame:
    """2d players, one per coordinate of a (team A) and of b (team B), 30 actions each.

    Tables are object arrays of Python ints: powers reach 29^(2n).
    """
    if degree_half < 1:
        raise ValueError("n must be >= 1")
    d, n = line.d, degree_half
    size = (SIDE + 1) ** (2 * d)
    if size > budget:
        raise BudgetExceeded(f"{size} profiles exceed the table budget {budget}")
    g = phi_grid(line).astype(object)
    pw = np.array([k ** (2 * n) for k in range(SIDE + 1)], dtype=object)
    ax = np.arange(SIDE + 1)
    im = np.zeros((SIDE + 1,) * (2 * d), dtype=object)
    term = pw[np.abs(ax[:, None] - ax[None, :])]
    for i in range(d):
        shape = [1] * (2 * d)
        shape[i] = shape[d + i] = SIDE + 1
        im = im + term.reshape(shape)
    phi_a = g.reshape(g.shape + (1,) * d)
    phi_b = g.reshape((1,) * d + g.shape)
    uA = -im - 2 * phi_a
    uB = -im - 2 * phi_b
    players = [Player(f"A{i + 1}", "A", SIDE + 1) for i in range(d)] + [Player(f"B{i + 1}", "B", SIDE + 1) for i in range(d)]
    meta = {"d": d, "n": n, "potential": "-sum (a_i-b_i)^(2n) - 2 phi(a) - 2 phi(b)"}
    game = TableGame(players, {"A": uA, "B": uB}, name="imitation", meta=meta)
    game.line = line
    return game


def imitation_potential_table(game: TableGame) -> np.ndarray:
    d = game.meta["d"]
    g = phi_grid(game.line).astype(object)
    return game.tables["A"] - 2 * g.reshape((1,) * d + g.shape)


def end_profile(line: EmbeddedLine) -> tuple[int, ...]:
    return tuple(line.end) + tuple(line.end)
