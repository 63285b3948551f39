"""Reports of local information, relevance regions and the report-based potential.

Report layouts (slot 0 is the reference corner, slot i+1 its neighbour along
axis i, answer bits in codec order within a slot):

* array side (Alice): ``3 * width`` bits per slot, cell c of bit k at ``3k + c``;
* index side, binary (Bob, multiplayer): 2 bits per answer bit, value 3 invalid;
* index side, ternary (Bob, two-player): one entry in {0, 1, 2} per answer bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from potlab.eol import SIDE
from potlab.localinfo import InconsistentInfo, InsufficientInfo, LineKnowledge, decoder, neighbours
from potlab.potential import multilinear, rounding

VERTEX_CLOSE = 13  # d_inf radius around corners and edges for the multiplayer reporters
R1_SWITCH = Fraction(15)  # team 1 refers to v on (13, 15], to v + 29 e_i beyond
R2_SWITCH = Fraction(14)  # team 2 refers to v on (13, 14], to v + 29 e_i beyond
RELEVANCE_SWITCH = Fraction(29, 2)  # report 1 relevant iff x_i <= 29/2
TWO_PLAYER_CLOSE = 12


@dataclass(frozen=True)
class Relevance:
    region: str  # "vertex" | "edge" | "initial-edge" | "far"
    relevant: int | None  # 1, 2 or None
    ref1: tuple[int, ...]
    ref2: tuple[int, ...]
    axis: int | None = None

    def ref(self, team: int) -> tuple[int, ...]:
        return self.ref1 if team == 1 else self.ref2


def relevance_classify(x) -> Relevance:
    """Regions, reference corners of both reporter teams, and which report is used at x."""
    x = tuple(Fraction(v) for v in x)
    d = len(x)
    mid = [i for i, v in enumerate(x) if VERTEX_CLOSE < v < SIDE - VERTEX_CLOSE]
    if not mid:
        v = tuple(0 if c <= VERTEX_CLOSE else SIDE for c in x)
        return Relevance("vertex", 1, v, v)
    if len(mid) >= 2:
        r = rounding(x)
        return Relevance("far", None, r, r)
    i = mid[0]
    lo = tuple(0 if (j == i or c <= VERTEX_CLOSE) else SIDE for j, c in enumerate(x))
    hi = tuple(SIDE if j == i else c for j, c in enumerate(lo))
    ref1 = lo if x[i] <= R1_SWITCH else hi
    ref2 = lo if x[i] <= R2_SWITCH else hi
    if i == d - 1 and not any(lo[:-1]):
        return Relevance("initial-edge", None, ref1, ref2, i)
    return Relevance("edge", 1 if x[i] <= RELEVANCE_SWITCH else 2, ref1, ref2, i)


def two_player_reference(x) -> tuple[int, ...]:
    """Reference corner for the two-player reports: the 12-close corner, else the low end of the 12-close edge."""
    x = tuple(int(v) for v in x)
    mid = [i for i, v in enumerate(x) if TWO_PLAYER_CLOSE < v < SIDE - TWO_PLAYER_CLOSE]
    if len(mid) >= 2:
        return rounding(x)
    return tuple(0 if (j in mid or c <= TWO_PLAYER_CLOSE) else SIDE for j, c in enumerate(x))


def slots(ref) -> list[tuple[int, ...]]:
    return [tuple(ref)] + neighbours(ref)


# --- truthful reports ------------------------------------------------------------


def alice_truth(view, ref) -> tuple[int, ...]:
    out = []
    for c in slots(ref):
        for arr in view.arrays(c):
            out.extend(arr)
    return tuple(out)


def bob_truth_binary(view, ref) -> tuple[int, ...]:
    out = []
    for c in slots(ref):
        for j in view.indices(c):
            out.extend(((j >> 1) & 1, j & 1))
    return tuple(out)


def bob_truth_ternary(view, ref) -> tuple[int, ...]:
    out = []
    for c in slots(ref):
        out.extend(view.indices(c))
    return tuple(out)


def alice_report_len(width: int, d: int) -> int:
    return 3 * width * (d + 1)


def bob_report_len(width: int, d: int, binary: bool = True) -> int:
    return (2 if binary else 1) * width * (d + 1)


def hamming(r, s) -> int:
    return sum(1 for a, b in zip(r, s) if a != b)


# --- combining reports -----------------------------------------------------------


@dataclass(frozen=True)
class Public:
    """Public parameters every party knows."""

    kind: str
    T: int
    d: int
    width: int


def _bob_index(report, pos: int, binary: bool) -> int:
    if binary:
        return 2 * report[2 * pos] + report[2 * pos + 1]
    return report[pos]


def combine(pub: Public, alice, bob, binary: bool = True) -> LineKnowledge:
    """Decode the overlapping corners of a (report, ref) pair from each side.

    ``alice`` / ``bob`` may be None (no relevant report); then nothing overlaps.
    Raises InconsistentInfo on contradictory or malformed overlap.
    """
    infos = []
    if alice is not None and bob is not None:
        ra, ref_a = alice
        rb, ref_b = bob
        sa = {c: i for i, c in enumerate(slots(ref_a))}
        codec = decoder(pub.kind, pub.T, pub.d)
        w = pub.width
        for j, c in enumerate(slots(ref_b)):
            i = sa.get(c)
            if i is None:
                continue
            bits = []
            for k in range(w):
                idx = _bob_index(rb, j * w + k, binary)
                if idx > 2:
                    raise InconsistentInfo("index code 3 is not an index")
                bits.append(ra[(i * w + k) * 3 + idx])
            infos.append(codec.decode(c, bits))
    return LineKnowledge(pub.d, pub.T, infos)


def knowledge_phi(know: LineKnowledge):
    memo = {}

    def f(p):
        v = memo.get(p)
        if v is None:
            v = memo[p] = know.phi(p)
        return v

    return f


def report_phi(know: LineKnowledge | None, x) -> Fraction:
    """Multilinear value at x from the known corners, or 0 if any needed value is undetermined."""
    if know is None:
        return Fraction(0)
    try:
        return multilinear(knowledge_phi(know), x)
    except InsufficientInfo:
        return Fraction(0)


def report_based_potential(pub: Public, alice, bob, points, binary: bool = True) -> tuple[Fraction, ...]:
    """phi_{r^A, r^B} at each of ``points``; all 0 if the overlap is inconsistent."""
    try:
        know = combine(pub, alice, bob, binary)
    except InconsistentInfo:
        return tuple(Fraction(0) for _ in points)
    return tuple(report_phi(know, x) for x in points)
