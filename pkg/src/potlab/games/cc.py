"""Communication games: each side chooses a point and reports its local information.

Alice's utilities are built from an AliceView only and Bob's from a BobView only;
the report-based potential reads reports, never private inputs.

Weights use an exponent ``n``. By default it is the least n for which truthful
reporting provably dominates at pure profiles (see ``certificate``),
which is what makes pure-NE enumeration over truthful reports exact.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from potlab.eol import SIDE
from potlab.games.base import BudgetExceeded, CountTeam, GameSpec, Move, Player, TableGame, averages, count_moves
from potlab.games.reports import (
    Public,
    alice_report_len,
    alice_truth,
    bob_report_len,
    bob_truth_binary,
    bob_truth_ternary,
    combine,
    hamming,
    relevance_classify,
    report_phi,
    two_player_reference,
)
from potlab.games.verify import PotentialCheck, StructuredCheck, EdgeWitness, verify_structured_tables
from potlab.harness import Halt, Protocol, Send, SplitInstance, Transcript, bits_of, int_of
from potlab.localinfo import InconsistentInfo, InsufficientInfo

SIDES = ("A", "B")


def ceiling_of(split: SplitInstance) -> int:
    """Upper bound on phi for the public (T, d): same closed form as the line ceiling."""
    from potlab.potential import SEMI_FAR_BASE, STEP

    return STEP * (2 * split.T + 3) + SIDE * split.d + SEMI_FAR_BASE


def min_certified_n(kind: str, ceiling: int) -> int:
    n = 1
    while not certified(kind, n, ceiling):
        n += 1
    return n


def certified(kind: str, n: int, ceiling: int) -> bool:
    """Truthful reports strictly dominate: the report weight beats any potential swing."""
    if kind == "multiplayer":
        return 3**n > 2 * ceiling
    return 5**n > 2 ** (n + 2) * ceiling


@dataclass(frozen=True)
class Certificate:
    kind: str
    n: int
    ceiling: int
    report_weight: int
    potential_swing: int

    @property
    def holds(self) -> bool:
        return self.report_weight > self.potential_swing

    def to_json(self):
        return {k: getattr(self, k) for k in ("kind", "n", "ceiling", "report_weight", "potential_swing")} | {
            "holds": self.holds
        }


# --- multiplayer ------------------------------------------------------------------


@dataclass(frozen=True)
class SideProfile:
    counts: tuple[int, ...]
    r1: tuple[int, ...]
    r2: tuple[int, ...]

    def report(self, team: int):
        return self.r1 if team == 1 else self.r2


class _Side:
    """One side's private utility terms, built from that side's view only."""

    def __init__(self, name, view, truth, d):
        self.name, self.view, self._truth, self.d = name, view, truth, d
        self._cache = {}

    def truth(self, ref):
        t = self._cache.get(ref)
        if t is None:
            t = self._cache[ref] = self._truth(self.view, ref)
        return t


class CCMultiplayerGame(GameSpec):
    """Two sides; each has d point teams of m binary players and two reporter teams.

    A profile is ``(SideProfile A, SideProfile B)``. Every player of a side
    shares that side's utility. Utilities are multiplied by ``scale = 2^n m^d``
    so every value is an integer.
    """

    name = "cc-multiplayer"

    def __init__(self, split: SplitInstance, m: int = 2, n: int | None = None):
        if m < 1:
            raise ValueError("m must be >= 1")
        d = split.d
        self.d, self.m = d, m
        self.pub = Public(split.kind, split.T, d, split.width)
        self.ceiling = ceiling_of(split)
        self.n = n if n is not None else min_certified_n("multiplayer", self.ceiling)
        self.scale = 2**self.n * m**d
        self.w_im = 4**self.n * m**d
        self.w_rr = 6**self.n * m**d
        self.w_po = 2**self.n * m**d
        self.w_ir = m**d
        self.len_a = alice_report_len(split.width, d)
        self.len_b = bob_report_len(split.width, d, binary=True)
        self.sides = {
            "A": _Side("A", split.alice_view(), alice_truth, d),
            "B": _Side("B", split.bob_view(), bob_truth_binary, d),
        }
        self.count_teams = {
            s: tuple(CountTeam(f"{s}.x{i + 1}", s, m, 0, SIDE) for i in range(d)) for s in SIDES
        }
        players = []
        for s, L in (("A", self.len_a), ("B", self.len_b)):
            players += [Player(f"{s}.x{i + 1}.{j + 1}", s, 2) for i in range(d) for j in range(m)]
            players += [Player(f"{s}.r{t}.{k}", s, 2) for t in (1, 2) for k in range(L)]
        self.players = tuple(players)
        self.meta = {
            "d": d, "m": m, "n": self.n, "scale": self.scale, "kind": split.kind, "T": split.T,
            "weights_scaled": {"im": self.w_im * 2**self.n, "rr": self.w_rr, "po": self.w_po, "ir": self.w_ir},
            "compression": "count vectors for point teams; report bits explicit",
        }
        self._know: dict = {}

    # -- evaluation --

    def point(self, side, sp: SideProfile):
        return averages(sp.counts, self.count_teams[side])

    def knowledge(self, rel_a, ra, rel_b, rb):
        key = (ra, rel_a, rb, rel_b)
        k = self._know.get(key)
        if k is None:
            try:
                k = combine(self.pub, ra, rb, binary=True)
            except InconsistentInfo:
                k = False
            self._know[key] = k
        return k

    def _relevant(self, side, sp, rel):
        if rel.relevant is None:
            return None
        return (sp.report(rel.relevant), rel.ref(rel.relevant))

    def potential_term(self, profile) -> Fraction:
        """The identical term -(phi_r(a_hat) + phi_r(b_bar)), unscaled."""
        pa, pb = profile
        xa, xb = self.point("A", pa), self.point("B", pb)
        ra, rb = relevance_classify(xa), relevance_classify(xb)
        ka = self._relevant("A", pa, ra)
        kb = self._relevant("B", pb, rb)
        if ka is None or kb is None:
            know = self.knowledge(None, None, None, None)
        else:
            know = self.knowledge(ka[1], ka, kb[1], kb)
        if know is False:
            return Fraction(0)
        return -(self._phi_r(know, xa) + self._phi_r(know, xb))

    @staticmethod
    def _phi_r(know, x):
        memo = know.__dict__.setdefault("_phi_memo", {})
        v = memo.get(x)
        if v is None:
            v = memo[x] = report_phi(know, x)
        return v

    def imitation_term(self, profile) -> Fraction:
        xa, xb = self.point("A", profile[0]), self.point("B", profile[1])
        return -sum((abs(a - b) for a, b in zip(xa, xb) if abs(a - b) > 1), Fraction(0))

    def report_costs(self, side, sp: SideProfile) -> tuple[int, int]:
        """(relevant, irrelevant) Hamming distances from the truthful reports at this side's point."""
        rel = relevance_classify(self.point(side, sp))
        S = self.sides[side]
        rr = ir = 0
        for t in (1, 2):
            h = hamming(sp.report(t), S.truth(rel.ref(t)))
            if rel.relevant == t:
                rr += h
            else:
                ir += h
        return rr, ir

    def payoff(self, profile, team):
        sp = profile[0] if team == "A" else profile[1]
        rr, ir = self.report_costs(team, sp)
        v = (
            self.w_im * 2**self.n * self.imitation_term(profile)
            + self.w_po * self.potential_term(profile)
            - self.w_rr * rr
            - self.w_ir * ir
        )
        if v.denominator != 1:
            raise AssertionError("scaled utility is not an integer")
        return int(v)

    # -- profile graph --

    def size(self) -> int:
        return (self.m + 1) ** (2 * self.d) * 2 ** (2 * self.len_a + 2 * self.len_b)

    def truthful(self, side, counts) -> SideProfile:
        sp = SideProfile(tuple(counts), (), ())
        rel = relevance_classify(self.point(side, sp))
        S = self.sides[side]
        return SideProfile(tuple(counts), S.truth(rel.ref1), S.truth(rel.ref2))

    def truthful_profile(self, ca, cb):
        return (self.truthful("A", ca), self.truthful("B", cb))

    def end_profile(self, line):
        c = tuple(self.m if v else 0 for v in line.end)
        return self.truthful_profile(c, c)

    def deviations(self, profile, reports: bool = True):
        for si, s in enumerate(SIDES):
            sp = profile[si]
            for i, label, k in count_moves(sp.counts, self.count_teams[s]):
                c = list(sp.counts)
                c[i] = k
                yield Move(s, label, _replace(profile, si, SideProfile(tuple(c), sp.r1, sp.r2)))
            if not reports:
                continue
            for t in (1, 2):
                r = sp.report(t)
                for k in range(len(r)):
                    nr = r[:k] + (1 - r[k],) + r[k + 1 :]
                    nsp = SideProfile(sp.counts, nr, sp.r2) if t == 1 else SideProfile(sp.counts, sp.r1, nr)
                    yield Move(s, f"{s}.r{t}.{k}", _replace(profile, si, nsp))

    def certificate(self) -> Certificate:
        # relevant bit: weight 6^n m^d; potential term swing: w_po * 2 * ceiling
        return Certificate("multiplayer", self.n, self.ceiling, self.w_rr, self.w_po * 2 * self.ceiling)

    def pure_ne_scalar(self, budget: int = 10**6):
        """Pure NE by direct payoff evaluation; reference implementation for ``pure_ne``."""
        self._require_certificate()
        counts = list(itertools.product(range(self.m + 1), repeat=self.d))
        if len(counts) ** 2 > budget:
            raise BudgetExceeded(f"{len(counts) ** 2} count profiles exceed the budget {budget}")
        from potlab.solvers import best_deviation

        out = []
        for ca in counts:
            for cb in counts:
                p = self.truthful_profile(ca, cb)
                if _improves(self, p, self.deviations(p, reports=False)):
                    continue
                if best_deviation(self, p) is None:
                    out.append(p)
        return out

    def _require_certificate(self):
        cert = self.certificate()
        if not cert.holds:
            raise ValueError(f"truthful certificate fails at n={self.n}; pass a larger n")

    def pure_ne(self, budget: int = 2 * 10**7):
        """Pure NE, exact; reports restricted to truthful ones by the certificate.

        Point moves are screened in int64 over all count profiles; survivors are
        re-checked with exact payoffs against every deviation, report bits included.
        """
        self._require_certificate()
        grid = PointGrid(self)
        if grid.N**2 > budget:
            raise BudgetExceeded(f"{grid.N ** 2} count profiles exceed the budget {budget}")
        from potlab.solvers import best_deviation

        stuck_a = ~grid.improvable("A")
        stuck_b = ~grid.improvable("B").T
        out = []
        for ia, ib in np.argwhere(stuck_a & stuck_b):
            p = self.truthful_profile(grid.counts[ia], grid.counts[ib])
            if best_deviation(self, p) is None:
                out.append(p)
        return out

    # -- verification --

    def family(self, side, free_bits=(0,)) -> list:
        """Restricted report family per reporter team: zeros, truthful at every corner, and single flips."""
        S = self.sides[side]
        L = self.len_a if side == "A" else self.len_b
        reps = [tuple([0] * L)]
        for v in itertools.product((0, SIDE), repeat=self.d):
            t = S.truth(v)
            reps.append(t)
            for k in free_bits:
                reps.append(t[:k] + (1 - t[k],) + t[k + 1 :])
        return list(dict.fromkeys(reps))

    def side_actions(self, side, free_bits=(0,)):
        fam = self.family(side, free_bits)
        counts = itertools.product(range(self.m + 1), repeat=self.d)
        return [SideProfile(c, r1, r2) for c in counts for r1 in fam for r2 in fam]

    def verify_structured(self, free_bits=(0,), **_) -> StructuredCheck:
        """U_A - U_B must split into an A-part minus a B-part over the restricted family."""
        UA, UB = self.tables(free_bits)
        return verify_structured_tables(UA, UB, keep=False)

    def tables(self, free_bits=(0,)):
        A = self.side_actions("A", free_bits)
        B = self.side_actions("B", free_bits)
        UA = np.empty((len(A), len(B)), dtype=object)
        UB = np.empty((len(A), len(B)), dtype=object)
        for i, pa in enumerate(A):
            for j, pb in enumerate(B):
                UA[i, j] = self.payoff((pa, pb), "A")
                UB[i, j] = self.payoff((pa, pb), "B")
        return UA, UB

    def verify_exhaustive(self, budget: int = 10**6, free_bits=(0,)) -> PotentialCheck:
        """Exhaustive over point counts x restricted reports; a two-team game is potential iff structured."""
        na = len(self.side_actions("A", free_bits))
        if na * na > budget:
            raise BudgetExceeded(f"{na * na} restricted profiles exceed the budget {budget}")
        s = self.verify_structured(free_bits)
        w = None if s.passed else EdgeWitness(s.witness[:2], None, "4-cycle", s.witness[2], 0)
        return PotentialCheck(s.passed, "exhaustive-restricted-reports", s.pairs, 4 * s.pairs, w)

    def binary_subgame(self, base, free_a, free_b) -> TableGame:
        """Fix every player but ``free_a`` / ``free_b``; each free player is ("x", i) or ("r1"|"r2", k).

        ("x", i): one extra player of point team i, action 1 plays 29 (counted on top of ``base``);
        ("rt", k): bit k of report t, action = bit value.
        """
        def apply(sp, free, acts):
            c, r1, r2 = list(sp.counts), list(sp.r1), list(sp.r2)
            for (kind, j), v in zip(free, acts):
                if kind == "x":
                    c[j] += v
                else:
                    (r1 if kind == "r1" else r2)[j] = v
            if any(k > self.m for k in c):
                raise ValueError("free point players exceed the team size")
            return SideProfile(tuple(c), tuple(r1), tuple(r2))

        players = [Player(f"A.{k}{j}", "A", 2) for k, j in free_a] + [Player(f"B.{k}{j}", "B", 2) for k, j in free_b]
        shape = (2,) * len(players)
        tables = {t: np.empty(shape, dtype=object) for t in SIDES}
        ka = len(free_a)
        for acts in itertools.product((0, 1), repeat=len(players)):
            p = (apply(base[0], free_a, acts[:ka]), apply(base[1], free_b, acts[ka:]))
            for t in SIDES:
                tables[t][acts] = self.payoff(p, t)
        return TableGame(players, tables, name="cc-multiplayer-subgame", scale=self.scale, meta=dict(self.meta))

    def random_profile(self, rng):
        def side(s, L):
            c = tuple(int(v) for v in rng.integers(0, self.m + 1, size=self.d))
            r1 = tuple(int(v) for v in rng.integers(0, 2, size=L))
            r2 = tuple(int(v) for v in rng.integers(0, 2, size=L))
            return SideProfile(c, r1, r2)

        p = (side("A", self.len_a), side("B", self.len_b))
        if rng.random() < 0.5:  # half the samples start from truthful reports
            p = self.truthful_profile(p[0].counts, p[1].counts)
        return p

    def random_moves(self, p, rng):
        ma = list(self.deviations(p))
        mv = [m for m in ma if m.team == "A"], [m for m in ma if m.team == "B"]
        x = mv[0][int(rng.integers(len(mv[0])))]
        y = mv[1][int(rng.integers(len(mv[1])))]
        return (_mover(x, 0), "A", x.mover), (_mover(y, 1), "B", y.mover)


def _replace(profile, i, sp):
    return (sp, profile[1]) if i == 0 else (profile[0], sp)


def _mover(move, side):
    new = move.target[side]

    def f(p):
        return _replace(p, side, new)

    return f


def _improves(game, p, moves) -> bool:
    base = {}
    for mv in moves:
        if mv.team not in base:
            base[mv.team] = game.payoff(p, mv.team)
        if game.payoff(mv.target, mv.team) > base[mv.team]:
            return True
    return False


class PointGrid:
    """Int64 tables over count profiles with truthful reports, for screening point moves.

    Every value is the game's scaled payoff; ``utility`` is cross-checked
    against ``CCMultiplayerGame.payoff`` in the tests.
    """

    def __init__(self, game: CCMultiplayerGame):
        self.g = game
        d, m, n = game.d, game.m, game.n
        self.counts = list(itertools.product(range(m + 1), repeat=d))
        self.N = len(self.counts)
        self.index = {c: i for i, c in enumerate(self.counts)}
        self.corners = list(itertools.product((0, SIDE), repeat=d))
        cidx = {c: i for i, c in enumerate(self.corners)}
        rel = [relevance_classify(game.point("A", SideProfile(c, (), ()))) for c in self.counts]
        self.rel = np.array([r.relevant or 0 for r in rel])
        self.ref = {1: np.array([cidx[r.ref1] for r in rel]), 2: np.array([cidx[r.ref2] for r in rel])}
        self.H = {}
        for s in SIDES:
            T = [game.sides[s].truth(c) for c in self.corners]
            self.H[s] = np.array([[hamming(x, y) for y in T] for x in T], dtype=np.int64)
        md = m**d
        self.w_im, self.w_po, self.w_rr, self.w_ir = 8**n, 2**n, 6**n * md, md
        # per coordinate: m^d * |a_i - b_i| when it exceeds 1, in units of counts
        k = np.arange(m + 1)
        dk = np.abs(k[:, None] - k[None, :])
        self.im1 = np.where(dk * SIDE > m, dk * SIDE * m ** (d - 1), 0).astype(np.int64)
        self.C = np.array(self.counts, dtype=np.int64)
        self._rows: dict = {}
        self._check_range()

    def _check_range(self):
        g = self.g
        top = (self.w_im * SIDE * g.d * g.m**g.d + self.w_po * 2 * g.ceiling * g.m**g.d
               + self.w_rr * 2 * max(g.len_a, g.len_b))
        if top >= 2**62:
            raise OverflowError("scaled utilities do not fit in int64; use pure_ne_scalar")

    def imitation(self, i: int) -> np.ndarray:
        """m^d * imitation distance between point i and every point."""
        return sum(self.im1[self.C[i, j], self.C[:, j]] for j in range(self.g.d))

    def phi_row(self, key) -> np.ndarray:
        """m^d * phi_r at every point for a knowledge key (a_stale, a_claim, b_stale, b_claim) or None."""
        row = self._rows.get(key)
        if row is None:
            g = self.g
            if key is None:
                know = g.knowledge(None, None, None, None)
            else:
                aS, aC, bS, bC = key
                ka = (g.sides["A"].truth(self.corners[aS]), self.corners[aC])
                kb = (g.sides["B"].truth(self.corners[bS]), self.corners[bC])
                know = g.knowledge(ka[1], ka, kb[1], kb)
            md = g.m**g.d
            row = np.zeros(self.N, dtype=np.int64)
            if know is not False:
                for i, c in enumerate(self.counts):
                    v = g._phi_r(know, g.point("A", SideProfile(c, (), ()))) * md
                    row[i] = int(v)
            self._rows[key] = row
        return row

    def _own_key(self, stale: int, claim: int):
        t = self.rel[claim]
        if t == 0:
            return None
        return int(self.ref[t][stale]), int(self.ref[t][claim])

    def utility_row(self, side: str, stale: int, claim: int) -> np.ndarray:
        """Side's payoff with its reports truthful at ``stale`` and its point at ``claim``, against every truthful opponent point."""
        H = self.H[side]
        t = self.rel[claim]
        hs = [int(H[self.ref[u][stale], self.ref[u][claim]]) for u in (1, 2)]
        rr = hs[t - 1] if t else 0
        ir = sum(hs) - rr
        own = self._own_key(stale, claim)
        orel = self.rel
        pot = np.zeros(self.N, dtype=np.int64)
        for u in (0, 1, 2):
            mask = orel == u
            if not mask.any():
                continue
            if own is None or u == 0:
                groups = [(mask, None)]
            else:
                groups = []
                for c in range(len(self.corners)):
                    mk = mask & (self.ref[u] == c)
                    if mk.any():
                        other = (c, c)
                        key = own + other if side == "A" else other + own
                        groups.append((mk, key))
            for mk, key in groups:
                row = self.phi_row(key)
                pot[mk] = row[claim] + row[mk]
        return -self.w_im * self.imitation(claim) - self.w_po * pot - self.w_rr * rr - self.w_ir * ir

    def neighbours(self, i: int):
        c = self.counts[i]
        for j in range(self.g.d):
            for step in (-1, 1):
                k = c[j] + step
                if 0 <= k <= self.g.m:
                    yield self.index[c[:j] + (k,) + c[j + 1 :]]

    def improvable(self, side: str) -> np.ndarray:
        """[own point, opponent point] -> some point move of ``side`` strictly improves."""
        out = np.zeros((self.N, self.N), dtype=bool)
        for i in range(self.N):
            base = self.utility_row(side, i, i)
            for j in self.neighbours(i):
                out[i] |= self.utility_row(side, i, j) > base
        return out


def build_cc_multiplayer_game(split: SplitInstance, m: int = 2, n: int | None = None) -> CCMultiplayerGame:
    return CCMultiplayerGame(split, m, n)


# --- two-player ------------------------------------------------------------------


class TwoPlayerShared:
    """The identical term of the two-player game; reads reports and public parameters only."""

    def __init__(self, pub: Public, n: int):
        self.pub, self.n = pub, n
        self._know: dict = {}
        self._phi: dict = {}

    def knowledge(self, ra, ref_a, rb, ref_b):
        key = (ra, ref_a, rb, ref_b)
        k = self._know.get(key)
        if k is None:
            try:
                k = combine(self.pub, (ra, ref_a), (rb, ref_b), binary=False)
            except InconsistentInfo:
                k = False
            self._know[key] = k
        return k

    def phi_r(self, know, x) -> int:
        if know is False:
            return 0
        key = (id(know), x)
        v = self._phi.get(key)
        if v is None:
            try:
                v = know.phi(x)
            except InsufficientInfo:
                v = 0
            self._phi[key] = v
        return v

    def imitation(self, a, b) -> int:
        return sum((x - y) ** (2 * self.n) for x, y in zip(a, b))

    def common(self, a, ra, b, rb) -> int:
        k = self.knowledge(ra, two_player_reference(a), rb, two_player_reference(b))
        return -(2**self.n) * self.imitation(a, b) - 2 ** (self.n + 1) * (self.phi_r(k, a) + self.phi_r(k, b))


class TwoPlayerHalf:
    """One side's utility: the shared term plus its truthful-report bonus, from its own view."""

    def __init__(self, shared: TwoPlayerShared, side: str, view):
        self.shared, self.side = shared, side
        self._side = _Side(side, view, alice_truth if side == "A" else bob_truth_ternary, shared.pub.d)

    def truth(self, x):
        return self._side.truth(two_player_reference(x))

    def utility(self, profile) -> int:
        (a, ra), (b, rb) = profile
        x, r = (a, ra) if self.side == "A" else (b, rb)
        bonus = 5**self.shared.n if r == self.truth(x) else 0
        return self.shared.common(a, ra, b, rb) + bonus

    def best_response(self, other, points):
        """Best (point, truthful report) against ``other``; lowest point index wins ties."""
        best = None
        for x in points:
            own = (x, self.truth(x))
            prof = (own, other) if self.side == "A" else (other, own)
            u = self.utility(prof)
            if best is None or u > best[0]:
                best = (u, own)
        return best[1], best[0]


class CCTwoPlayerGame(GameSpec):
    """Alice picks (a, r^A), Bob picks (b, r^B); a, b integer grid points.

    Scaled by 2^n: u_A = -2^n sum (a_i - b_i)^(2n) + 5^n [r^A = T_A(a)] - 2^(n+1)(phi_r(a) + phi_r(b)).
    A profile is ``((a, rA), (b, rB))``.
    """

    name = "cc-two-player"

    def __init__(self, split: SplitInstance, n: int | None = None):
        d = split.d
        self.d = d
        self.pub = Public(split.kind, split.T, d, split.width)
        self.ceiling = ceiling_of(split)
        self.n = n if n is not None else min_certified_n("two-player", self.ceiling)
        self.scale = 2**self.n
        self.len_a = alice_report_len(split.width, d)
        self.len_b = bob_report_len(split.width, d, binary=False)
        self.shared = TwoPlayerShared(self.pub, self.n)
        self.halves = {
            "A": TwoPlayerHalf(self.shared, "A", split.alice_view()),
            "B": TwoPlayerHalf(self.shared, "B", split.bob_view()),
        }
        self.players = (Player("alice", "A", None), Player("bob", "B", None))
        self.points = list(itertools.product(range(SIDE + 1), repeat=d))
        self.meta = {"d": d, "n": self.n, "scale": self.scale, "kind": split.kind, "T": split.T}

    def truth(self, side, x):
        return self.halves[side].truth(x)

    def knowledge(self, ra, ref_a, rb, ref_b):
        return self.shared.knowledge(ra, ref_a, rb, ref_b)

    def phi_r(self, know, x) -> int:
        return self.shared.phi_r(know, x)

    def common(self, a, ra, b, rb) -> int:
        return self.shared.common(a, ra, b, rb)

    def payoff(self, profile, team):
        return self.halves[team].utility(profile)

    def size(self):
        return len(self.points) ** 2 * 2**self.len_a * 3**self.len_b

    def deviations(self, profile):
        raise NotImplementedError("the report space is too large to list; use pure_ne or the restricted checks")

    def certificate(self) -> Certificate:
        return Certificate("two-player", self.n, self.ceiling, 5**self.n, 2 ** (self.n + 2) * self.ceiling)

    def truthful_profile(self, a, b):
        a, b = tuple(a), tuple(b)
        return ((a, self.truth("A", a)), (b, self.truth("B", b)))

    def end_profile(self, line):
        return self.truthful_profile(line.end, line.end)

    def _imitation_table(self):
        if getattr(self, "_imit", None) is None:
            P = np.array(self.points, dtype=np.int64)
            diff = np.abs(P[:, None, :] - P[None, :, :])
            powers = np.array([k ** (2 * self.n) for k in range(SIDE + 1)], dtype=object)
            self._imit = powers[diff].sum(axis=2)
        return self._imit

    def block_tables(self, acts_a, acts_b):
        """U_A, U_B over acts_a x acts_b, vectorised over (report, reference) classes.

        Matches ``payoff`` entry by entry (checked in the tests).
        """
        index = {x: i for i, x in enumerate(self.points)}

        def classes(acts, side):
            cls, ids, pts, bonus = {}, [], [], []
            for x, r in acts:
                key = (r, two_player_reference(x))
                ids.append(cls.setdefault(key, len(cls)))
                pts.append(index[tuple(x)])
                bonus.append(5**self.n if r == self.truth(side, x) else 0)
            return list(cls), np.array(ids), np.array(pts), np.array(bonus, dtype=object)

        ca, ia, pa, ba = classes(acts_a, "A")
        cb, ib, pb, bb = classes(acts_b, "B")
        need_a = {}
        for c, p in zip(ia, pa):
            need_a.setdefault(int(c), set()).add(int(p))
        need_b = {}
        for c, p in zip(ib, pb):
            need_b.setdefault(int(c), set()).add(int(p))
        Phi = np.zeros((len(ca), len(cb), len(self.points)), dtype=np.int64)
        for i, (ra, fa) in enumerate(ca):
            for j, (rb, fb) in enumerate(cb):
                k = self.knowledge(ra, fa, rb, fb)
                for p in need_a.get(i, ()) | need_b.get(j, ()):
                    Phi[i, j, p] = self.phi_r(k, self.points[p])
        pot = Phi[ia[:, None], ib[None, :], pa[:, None]] + Phi[ia[:, None], ib[None, :], pb[None, :]]
        common = -(2**self.n) * self._imitation_table()[pa[:, None], pb[None, :]] - 2 ** (self.n + 1) * pot.astype(object)
        return common + ba[:, None], common + bb[None, :]

    def truthful_tables(self):
        """U_A[a', b] and U_B[a, b'] with truthful reports on both sides."""
        acts_a = [(x, self.truth("A", x)) for x in self.points]
        acts_b = [(x, self.truth("B", x)) for x in self.points]
        return self.block_tables(acts_a, acts_b)

    def pure_ne(self, budget: int = 10**6):
        cert = self.certificate()
        if not cert.holds:
            raise ValueError(f"truthful certificate fails at n={self.n}; pass a larger n")
        if len(self.points) ** 2 > budget:
            raise BudgetExceeded(f"{len(self.points) ** 2} truthful profiles exceed the budget {budget}")
        UA, UB = self.truthful_tables()
        ok = (UA == UA.max(axis=0, keepdims=True)) & (UB == UB.max(axis=1, keepdims=True))
        return [self.truthful_profile(self.points[i], self.points[j]) for i, j in np.argwhere(ok)]

    def best_response(self, side, other):
        return self.halves[side].best_response(other, self.points)

    def restricted_table(self, acts_a, acts_b) -> TableGame:
        """Two-player table game over the given (point, report) actions of each side."""
        players = (Player("alice", "A", len(acts_a)), Player("bob", "B", len(acts_b)))
        tables = {t: np.empty((len(acts_a), len(acts_b)), dtype=object) for t in SIDES}
        for i, pa in enumerate(acts_a):
            for j, pb in enumerate(acts_b):
                for t in SIDES:
                    tables[t][i, j] = self.payoff((pa, pb), t)
        labels = [[str(a[0]) for a in acts_a], [str(b[0]) for b in acts_b]]
        return TableGame(players, tables, name="cc-two-player-restricted", scale=self.scale, meta=dict(self.meta),
                         labels=labels)

    def small_actions(self, side, N: int) -> list:
        """N actions: the first grid points in lexicographic order, each with its truthful and its all-zero report."""
        L = self.len_a if side == "A" else self.len_b
        out = []
        for x in self.points:
            for r in (self.truth(side, x), tuple([0] * L)):
                if len(out) < N:
                    out.append((x, r))
        return out

    def family(self, side) -> list:
        L = self.len_a if side == "A" else self.len_b
        reps = [tuple([0] * L)] + [self.truth(side, v) for v in itertools.product((0, SIDE), repeat=self.d)]
        return list(dict.fromkeys(reps))

    def verify_structured(self, chunk: int = 256, **_) -> StructuredCheck:
        """Separability of U_A - U_B over points x {zeros, truthful at each corner}, streamed in row chunks."""
        from potlab.games.verify import verify_structured_chunks

        A = [(x, r) for x in self.points for r in self.family("A")]
        B = [(x, r) for x in self.points for r in self.family("B")]

        def block(i0, i1):
            return self.block_tables(A[i0:i1], B)

        return verify_structured_chunks(len(A), len(B), block, chunk)

    def verify_exhaustive(self, budget: int = 10**8, chunk: int = 256) -> PotentialCheck:
        n = (len(self.points) * len(self.family("A"))) * (len(self.points) * len(self.family("B")))
        if n > budget:
            raise BudgetExceeded(f"{n} restricted profiles exceed the budget {budget}")
        s = self.verify_structured(chunk)
        w = None if s.passed else EdgeWitness(s.witness[:2], None, "4-cycle", s.witness[2], 0)
        return PotentialCheck(s.passed, "exhaustive-restricted-reports", s.pairs, 4 * s.pairs, w)

    def random_profile(self, rng):
        i, j = (int(v) for v in rng.integers(0, len(self.points), size=2))
        ra = tuple(int(v) for v in rng.integers(0, 2, size=self.len_a))
        rb = tuple(int(v) for v in rng.integers(0, 3, size=self.len_b))
        if rng.random() < 0.5:
            return self.truthful_profile(self.points[i], self.points[j])
        return ((self.points[i], ra), (self.points[j], rb))

    def random_moves(self, p, rng):
        def move(side):
            i = int(rng.integers(0, len(self.points)))
            x = self.points[i]
            if rng.random() < 0.5:
                r = self.truth(side, x)
            else:
                L = self.len_a if side == "A" else self.len_b
                r = tuple(int(v) for v in rng.integers(0, 2 if side == "A" else 3, size=L))
            k = 0 if side == "A" else 1
            return (lambda q: _replace(q, k, (x, r))), side, f"{side}->{x}"

        return move("A"), move("B")


def build_cc_twoplayer_game(split: SplitInstance, n: int | None = None) -> CCTwoPlayerGame:
    return CCTwoPlayerGame(split, n)


# --- best-response dynamics as a two-party protocol --------------------------------


class BestResponseProtocol(Protocol):
    """Alternating best responses in the two-player game; each side uses only its own view.

    A message is a moved flag, the sender's point (5 bits per coordinate) and
    its report (Alice: 1 bit per entry, Bob: 2 bits per index). Bob opens with
    his starting action; a side halts once neither side moved in two consecutive turns.
    """

    first = "bob"
    COORD_BITS = 5

    def __init__(self, pub: Public, n: int, start=None, max_rounds: int = 10**4):
        self.pub, self.n = pub, n
        self.start = tuple(start) if start is not None else (0,) * pub.d
        self.max_rounds = max_rounds
        self.points = list(itertools.product(range(SIDE + 1), repeat=pub.d))
        self.len_a = alice_report_len(pub.width, pub.d)
        self.len_b = bob_report_len(pub.width, pub.d, binary=False)
        self._halves: dict = {}
        self._shared = TwoPlayerShared(pub, n)

    def _half(self, side, view):
        h = self._halves.get(side)
        if h is None:
            h = self._halves[side] = TwoPlayerHalf(self._shared, side, view)
        return h

    def encode(self, side, moved, action) -> tuple[int, ...]:
        x, r = action
        out = [int(moved)]
        for c in x:
            out.extend(bits_of(c, self.COORD_BITS))
        if side == "A":
            out.extend(r)
        else:
            for j in r:
                out.extend(bits_of(j, 2))
        return tuple(out)

    def decode(self, side, bits):
        d, k = self.pub.d, self.COORD_BITS
        x = tuple(int_of(bits[1 + i * k : 1 + (i + 1) * k]) for i in range(d))
        rest = bits[1 + d * k :]
        r = tuple(rest) if side == "A" else tuple(int_of(rest[2 * i : 2 * i + 2]) for i in range(len(rest) // 2))
        return bool(bits[0]), (x, r)

    def _step(self, side, view, tr: Transcript):
        me, other = ("alice", "bob") if side == "A" else ("bob", "alice")
        oside = "B" if side == "A" else "A"
        half = self._half(side, view)
        mine = [b for s, b in tr.messages if s == me]
        theirs = [b for s, b in tr.messages if s == other]
        if not theirs:  # opening move
            return Send(self.encode(side, True, (self.start, half.truth(self.start))))
        their_moved, their_action = self.decode(oside, theirs[-1])
        current = self.decode(side, mine[-1])[1] if mine else (self.start, half.truth(self.start))
        prof = lambda own: (own, their_action) if side == "A" else (their_action, own)
        best, u_best = half.best_response(their_action, self.points)
        moved = u_best > half.utility(prof(current))
        if not moved and not their_moved and mine:
            return Halt(prof(current))
        if len(tr.messages) >= 2 * self.max_rounds:
            return Halt(None)
        return Send(self.encode(side, moved, best if moved else current))

    def alice(self, view, tr):
        return self._step("A", view, tr)

    def bob(self, view, tr):
        return self._step("B", view, tr)


def best_response_protocol(game: CCTwoPlayerGame, start=None) -> BestResponseProtocol:
    return BestResponseProtocol(game.pub, game.n, start)
