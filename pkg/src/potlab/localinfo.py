"""Local information about the line at grid corners, and evaluating phi from it.

A corner's answer is a short bit string. For lines that come from the pyramid
it is exactly the (t, s, p) query triple of the Gray-decoded pyramid vertex; the
index and neighbours are recovered by metering. Synthetic lines have no
pyramid behind them, so their answers spell out the index and the two
directions explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from potlab.eol import SIDE, EmbeddedLine, PyramidLine, PyramidVertex, coord_bits, decode_vertex, encode_vertex, line_query
from potlab.potential import RegionTag, classify_distances, dinf_box, phi_formula, phi_points, rounding
from potlab.rng import make_rng


class InconsistentInfo(ValueError):
    """Local information that no line through the reference corner could produce."""


class InsufficientInfo(LookupError):
    """The known corners do not determine phi at the requested point."""


@dataclass(frozen=True)
class CornerInfo:
    corner: tuple[int, ...]
    on_line: bool
    index: int | None = None
    succ: tuple[int, ...] | None = None
    pred: tuple[int, ...] | None = None


def flip(corner, axis: int) -> tuple[int, ...]:
    c = list(corner)
    c[axis] = SIDE - c[axis]
    return tuple(c)


def neighbours(corner) -> list[tuple[int, ...]]:
    return [flip(corner, i) for i in range(len(corner))]


def origin_of(d: int) -> tuple[int, ...]:
    return (0,) * (d - 1) + (SIDE,)


class PyramidCodec:
    """(t, s, p) triples of the pyramid vertex a corner encodes."""

    kind = "pyramid"
    width = 3

    def __init__(self, T: int, d: int, pyramid: PyramidLine | None = None):
        self.T, self.d = T, d
        self.b = coord_bits(T)
        if d != 2 * self.b + 1:
            raise ValueError(f"pyramid lines with T={T} live in d={2 * self.b + 1}")
        self.pyramid = pyramid

    def vertex(self, corner) -> PyramidVertex | None:
        if corner[-1] != 0:
            return None
        v = decode_vertex([c // SIDE for c in corner[:-1]], self.b)
        return v if v.x + v.y <= self.T else None

    def corner(self, v: PyramidVertex) -> tuple[int, ...]:
        return tuple(SIDE * bit for bit in encode_vertex(v, self.b)) + (0,)

    def answer(self, corner, query=None) -> tuple[int, ...]:
        """Answer bits at ``corner``; ``query`` (a vertex oracle) defaults to the stored line."""
        v = self.vertex(corner)
        if v is None:
            return (0, 0, 0)
        if query is None:
            return line_query(self.pyramid, v).bits()
        return query(v).bits()

    def decode(self, corner, bits) -> CornerInfo:
        corner = tuple(corner)
        t, s, p = (int(b) for b in bits)
        if any(b not in (0, 1) for b in (t, s, p)):
            raise InconsistentInfo("answer bits must be 0/1")
        if corner == origin_of(self.d):
            if (t, s, p) != (0, 0, 0):
                raise InconsistentInfo("the origin is not a pyramid vertex")
            return CornerInfo(corner, True, -1, (0,) * self.d, None)
        v = self.vertex(corner)
        if v is None or not t:
            if (t, s, p) != (0, 0, 0):
                raise InconsistentInfo(f"non-canonical off-line answer at {corner}")
            return CornerInfo(corner, False)
        idx = v.x + v.y
        if idx == self.T:
            if s:
                raise InconsistentInfo("end of line cannot have a successor")
            succ = None
        else:
            succ = self.corner(PyramidVertex(v.x + 1, v.y) if s else PyramidVertex(v.x, v.y + 1))
        if idx == 0:
            if p:
                raise InconsistentInfo("(0,0) has no left neighbour")
            pred = origin_of(self.d)
        elif p:
            if v.x == 0:
                raise InconsistentInfo("predecessor outside the pyramid")
            pred = self.corner(PyramidVertex(v.x - 1, v.y))
        else:
            if v.y == 0:
                raise InconsistentInfo("predecessor outside the pyramid")
            pred = self.corner(PyramidVertex(v.x, v.y - 1))
        return CornerInfo(corner, True, idx, succ, pred)


class SyntheticCodec:
    """on-bit | index+1 | successor code | predecessor code, little-endian fields.

    Direction codes: 0 = none, 2*i+1 = +e_i, 2*i+2 = -e_i (i zero-based).
    """

    kind = "synthetic"

    def __init__(self, T: int, d: int, line: EmbeddedLine | None = None):
        self.line = line
        self.T, self.d = T, d
        self.ib = max(1, (self.T + 1).bit_length())
        self.db = (2 * self.d).bit_length()
        self.width = 1 + self.ib + 2 * self.db

    @staticmethod
    def _bits(v: int, k: int) -> tuple[int, ...]:
        return tuple((v >> j) & 1 for j in range(k))

    @staticmethod
    def _int(bits) -> int:
        return sum(int(b) << j for j, b in enumerate(bits))

    def _code(self, a, b) -> int:
        if b is None:
            return 0
        for i, (x, y) in enumerate(zip(a, b)):
            if x != y:
                return 2 * i + 1 if y > x else 2 * i + 2
        raise AssertionError

    def answer(self, corner, query=None) -> tuple[int, ...]:
        if query is not None:
            return tuple(query(tuple(corner)))
        line = self.line
        k = line.index_of_corner(corner)
        if k is None:
            return (0,) * self.width
        succ = line.corner(k + 1) if k < line.T else None
        pred = line.corner(k - 1) if k >= 0 else None
        return (
            (1,)
            + self._bits(k + 1, self.ib)
            + self._bits(self._code(corner, succ), self.db)
            + self._bits(self._code(corner, pred), self.db)
        )

    def _apply(self, corner, code):
        if code == 0:
            return None
        i, up = (code - 1) // 2, code % 2 == 1
        if i >= self.d or corner[i] != (0 if up else SIDE):
            raise InconsistentInfo(f"direction code {code} leaves the corner set")
        return flip(corner, i)

    def decode(self, corner, bits) -> CornerInfo:
        corner = tuple(corner)
        bits = tuple(int(b) for b in bits)
        if len(bits) != self.width or any(b not in (0, 1) for b in bits):
            raise InconsistentInfo("malformed answer")
        if not bits[0]:
            if any(bits):
                raise InconsistentInfo("non-canonical off-line answer")
            if corner == origin_of(self.d):
                raise InconsistentInfo("the origin is always on the line")
            return CornerInfo(corner, False)
        idx = self._int(bits[1 : 1 + self.ib]) - 1
        sc = self._int(bits[1 + self.ib : 1 + self.ib + self.db])
        pc = self._int(bits[1 + self.ib + self.db :])
        if not -1 <= idx <= self.T:
            raise InconsistentInfo("index out of range")
        succ, pred = self._apply(corner, sc), self._apply(corner, pc)
        if (idx == self.T) != (succ is None) or (idx == -1) != (pred is None):
            raise InconsistentInfo("successor/predecessor presence contradicts the index")
        if (idx == -1) != (corner == origin_of(self.d)) or (idx == 0) != (corner == (0,) * self.d):
            raise InconsistentInfo("the initial edge is fixed")
        return CornerInfo(corner, True, idx, succ, pred)


def codec_for(line: EmbeddedLine):
    key = "codec"
    if key not in line._cache:
        if line.pyramid is not None:
            line._cache[key] = PyramidCodec(line.T, line.d, line.pyramid)
        else:
            line._cache[key] = SyntheticCodec(line.T, line.d, line)
    return line._cache[key]


def decoder(kind: str, T: int, d: int):
    """A codec that can decode answers knowing only the public parameters."""
    if kind == "pyramid":
        return PyramidCodec(T, d)
    if kind == "synthetic":
        return SyntheticCodec(T, d)
    raise ValueError(f"unknown codec kind {kind!r}")


@dataclass(frozen=True)
class LocalInfo:
    """Answers at a reference corner followed by its d neighbours (axis order)."""

    reference: tuple[int, ...]
    answers: tuple[tuple[int, ...], ...]
    kind: str
    T: int

    def vertices(self) -> list[tuple[int, ...]]:
        return [self.reference] + neighbours(self.reference)


def local_info(line: EmbeddedLine, corner) -> LocalInfo:
    corner = tuple(corner)
    if any(c not in (0, SIDE) for c in corner) or len(corner) != line.d:
        raise ValueError(f"{corner} is not a corner")
    codec = codec_for(line)
    return LocalInfo(corner, tuple(codec.answer(v) for v in [corner] + neighbours(corner)), codec.kind, line.T)


class LineKnowledge:
    """What is known about the line: public facts plus decoded corner answers.

    Public: d, T, the origin l'(-1), l'(0) = 0 and the initial edge E(0).
    """

    def __init__(self, d: int, T: int, infos=()):
        self.d, self.T = d, T
        self.origin = origin_of(d)
        self.start = (0,) * d
        self.infos: dict[tuple[int, ...], CornerInfo] = {}
        self.add(CornerInfo(self.origin, True, -1, self.start, None))
        for info in infos:
            self.add(info)
        self.check()

    def add(self, info: CornerInfo) -> None:
        old = self.infos.get(info.corner)
        if old is not None and old != info:
            raise InconsistentInfo(f"conflicting answers at {info.corner}")
        self.infos[info.corner] = info

    def check(self) -> None:
        by_index = {}
        for c, info in self.infos.items():
            if not info.on_line:
                continue
            if info.index in by_index and by_index[info.index] != c:
                raise InconsistentInfo(f"two corners claim index {info.index}")
            by_index[info.index] = c
            for other, rel, delta in ((info.succ, "pred", 1), (info.pred, "succ", -1)):
                if other is None or other not in self.infos:
                    continue
                o = self.infos[other]
                if not o.on_line or o.index != info.index + delta or getattr(o, rel) != c:
                    raise InconsistentInfo(f"{c} and {other} disagree about their edge")
        s = self.infos.get(self.start)
        if s is not None and (not s.on_line or s.index != 0 or s.pred != self.origin):
            raise InconsistentInfo("l'(0) must be the second corner of the line")

    def edge(self, u, w):
        """None if unknown, else the segment index of edge {u, w} or -1 if it is not a segment."""
        for a, b in ((u, w), (w, u)):
            info = self.infos.get(a)
            if info is None:
                continue
            if not info.on_line:
                return -1
            if info.succ == b:
                return info.index + 1
            if info.pred == b:
                return info.index
            return -1
        return None

    def corner(self, k: int) -> tuple[int, ...]:
        for c, info in self.infos.items():
            if info.on_line and info.index == k:
                return c
        raise InsufficientInfo(f"l'({k}) is not known")

    def phi(self, x) -> int:
        """phi(x) using only segments incident to the rounding of x.

        Any segment within d_inf 12 of an integer point is incident to its
        rounding, so knowing those edges determines the region and index.
        """
        x = tuple(int(v) for v in x)
        r = rounding(x)
        segs = {}
        for i in range(self.d):
            w = flip(r, i)
            lo = tuple(min(a, b) for a, b in zip(r, w))
            hi = tuple(max(a, b) for a, b in zip(r, w))
            dist = dinf_box(x, lo, hi)
            if dist > 12:
                continue
            t = self.edge(r, w)
            if t is None:
                raise InsufficientInfo(f"edge {r}-{w} is unknown")
            if t >= 0:
                segs[t] = (dist, r, w)
        if not segs:
            tag = RegionTag("far")
            return phi_formula(tag, x, self.T, lambda k: self.origin)
        ts = sorted(segs)
        # classify_distances wants a dense list; pad unknown-but-irrelevant segments as far away
        dense = [segs[t][0] if t in segs else 99 for t in range(ts[-1] + 1)]
        tag = classify_distances(dense)
        ends = {}
        for t, (_, a, b) in segs.items():
            ia, ib = self.infos.get(a), self.infos.get(b)
            for c, info in ((a, ia), (b, ib)):
                if info is not None and info.on_line:
                    ends[info.index] = c
            # the unknown end of a known segment sits one index away from the known one
            known = ia if ia is not None and ia.on_line else ib
            other = b if known is ia else a
            ends.setdefault(t if known.index == t - 1 else t - 1, other)
        ends[-1] = self.origin

        def corner(k):
            if k in ends:
                return ends[k]
            return self.corner(k)

        return phi_formula(tag, x, self.T, corner)


def knowledge_from(codec, T: int, d: int, pairs) -> LineKnowledge:
    """Decode (corner, answer-bits) pairs into a consistency-checked LineKnowledge."""
    return LineKnowledge(d, T, [codec.decode(c, bits) for c, bits in pairs])


def phi_local(x, info: LocalInfo) -> int:
    """phi(x) from the local information at rounding(x) and nothing else."""
    d = len(info.reference)
    if rounding(x) != info.reference:
        raise InconsistentInfo("local information must be taken at rounding(x)")
    if len(info.answers) != d + 1:
        raise InconsistentInfo("need answers for the reference corner and all d neighbours")
    return _knowledge_of(info).phi(x)


@lru_cache(maxsize=4096)
def _knowledge_of(info: LocalInfo) -> LineKnowledge:
    d = len(info.reference)
    return knowledge_from(decoder(info.kind, info.T, d), info.T, d, zip(info.vertices(), info.answers))


@dataclass
class LocalityReport:
    mode: str
    points: int
    mismatches: int
    first_mismatch: tuple | None = None  # (x, phi, phi_local)

    @property
    def ok(self) -> bool:
        return self.mismatches == 0

    def to_json(self) -> dict:
        fm = self.first_mismatch
        return {"mode": self.mode, "points": self.points, "mismatches": self.mismatches,
                "first_mismatch": None if fm is None else [list(fm[0]), fm[1], fm[2]], "ok": self.ok}


def verify_locality(line: EmbeddedLine, mode: str = "exhaustive", count: int = 10**6, seed: int = 0) -> LocalityReport:
    """phi_local(x, local_info(line, rounding(x))) against phi, on every grid point or a uniform sample."""
    d = line.d
    if mode == "exhaustive":
        if d > 3:
            raise ValueError("exhaustive sweep is limited to d <= 3")
        P = np.indices((SIDE + 1,) * d).reshape(d, -1).T
    elif mode == "sampled":
        P = make_rng(seed, 2).integers(0, SIDE + 1, size=(count, d))
    else:
        raise ValueError(f"unknown mode {mode!r}")
    ref = phi_points(P, line)
    infos = {}
    bad, first = 0, None
    for x, want in zip(map(tuple, P.tolist()), ref.tolist()):
        r = rounding(x)
        info = infos.get(r)
        if info is None:
            info = infos[r] = local_info(line, r)
        got = phi_local(x, info)
        if got != want:
            bad += 1
            first = first or (x, want, got)
    return LocalityReport(mode, len(P), bad, first)
