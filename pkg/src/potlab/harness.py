"""Query and communication cost accounting.

The two-party input is the index gadget: for every answer bit Alice holds a
3-bit array and Bob holds an index into it. For pyramid lines the bits are the
(t, s, p) triples of the pyramid vertices; for synthetic lines they are the
synthetic codec bits of every grid corner. Corners that encode no pyramid
vertex have publicly known answers (all zero) and carry no split.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

from potlab.eol import (
    DomainError,
    EmbeddedLine,
    PyramidLine,
    PyramidVertex,
    VertexAnswer,
    as_embedded,
    coord_bits,
    line_query,
)
from potlab.localinfo import LocalInfo, codec_for, neighbours, phi_local
from potlab.potential import rounding
from potlab.rng import make_rng

INDEX_BITS = 2  # one index in [3] as two bits


@dataclass(frozen=True)
class SplitInstance:
    """Per key and per answer bit: Alice's 3-cell array and Bob's index into it.

    Keys are pyramid vertices as (x, y) for pyramid lines and grid corners for
    synthetic lines. ``arrays[key][k]`` is a 3-tuple, ``indices[key][k]`` in 0..2.
    """

    kind: str
    T: int
    d: int
    width: int
    keys: tuple
    arrays: dict = field(compare=False)
    indices: dict = field(compare=False)

    def bit(self, key, k: int) -> int:
        return self.arrays[key][k][self.indices[key][k]]

    def decode(self, key) -> tuple[int, ...]:
        return tuple(self.bit(key, k) for k in range(self.width))

    @property
    def n_bits(self) -> int:
        return self.width * len(self.keys)

    def key_of_corner(self, corner):
        """Split key for a grid corner, or None if its answer is public."""
        corner = tuple(corner)
        if self.kind == "synthetic":
            return corner
        codec = _pyramid_codec(self.T, self.d)
        v = codec.vertex(corner)
        return None if v is None else (v.x, v.y)

    def alice_view(self) -> "AliceView":
        return AliceView(self)

    def bob_view(self) -> "BobView":
        return BobView(self)


def _pyramid_codec(T, d):
    from potlab.localinfo import PyramidCodec

    return PyramidCodec(T, d)


class AliceView:
    """Alice's half of a split: arrays only."""

    def __init__(self, split: SplitInstance):
        self.kind, self.T, self.d, self.width = split.kind, split.T, split.d, split.width
        self._key = split.key_of_corner
        self._arrays = split.arrays

    def arrays(self, corner) -> tuple[tuple[int, int, int], ...]:
        key = self._key(corner)
        if key is None:
            return ((0, 0, 0),) * self.width
        return self._arrays[key]

    def arrays_at(self, key):
        return self._arrays[key]


class BobView:
    """Bob's half of a split: indices only."""

    def __init__(self, split: SplitInstance):
        self.kind, self.T, self.d, self.width = split.kind, split.T, split.d, split.width
        self._key = split.key_of_corner
        self._indices = split.indices

    def indices(self, corner) -> tuple[int, ...]:
        key = self._key(corner)
        if key is None:
            return (0,) * self.width
        return self._indices[key]

    def indices_at(self, key):
        return self._indices[key]


def split_instance(line: PyramidLine | EmbeddedLine, seed: int) -> SplitInstance:
    emb = as_embedded(line)
    codec = codec_for(emb)
    if emb.pyramid is not None:
        pyr = emb.pyramid
        keys = tuple((v.x, v.y) for v in pyr.pyramid_vertices())
        answer = {k: line_query(pyr, PyramidVertex(*k)).bits() for k in keys}
    else:
        import itertools

        keys = tuple(itertools.product((0, 29), repeat=emb.d))
        answer = {k: codec.answer(k) for k in keys}
    rng = make_rng(seed, stream=11)
    arrays, indices = {}, {}
    for key in keys:
        arr, idx = [], []
        for b in answer[key]:
            j = int(rng.integers(0, 3))
            cells = [int(c) for c in rng.integers(0, 2, size=3)]
            cells[j] = int(b)
            arr.append(tuple(cells))
            idx.append(j)
        arrays[key], indices[key] = tuple(arr), tuple(idx)
    return SplitInstance(codec.kind, emb.T, emb.d, codec.width, keys, arrays, indices)


# --- query oracle -------------------------------------------------------------


class CountedOracle:
    """Vertex oracle for a line that counts every query it answers."""

    def __init__(self, line: PyramidLine | EmbeddedLine):
        self.emb = as_embedded(line)
        self.pyramid = self.emb.pyramid
        self.count = 0

    def reset(self) -> None:
        self.count = 0

    def query(self, v: PyramidVertex) -> VertexAnswer:
        if self.pyramid is None:
            raise DomainError("synthetic lines have no pyramid vertices; use corner()")
        self.count += 1
        return line_query(self.pyramid, v)

    def corner(self, c) -> tuple[int, ...]:
        """Answer bits at a grid corner; only corners carrying private bits cost a query."""
        codec = codec_for(self.emb)
        if self.pyramid is not None:
            return codec.answer(c, query=self.query)
        self.count += 1
        return codec.answer(c)


def follow_line_solver(oracle: CountedOracle, T: int) -> tuple[PyramidVertex, int]:
    """Walk from (0,0) along successor bits; exactly one query per line vertex."""
    start = oracle.count
    v = PyramidVertex(0, 0)
    ans = oracle.query(v)
    if not ans.t:
        raise DomainError("(0,0) must be on the line")
    while v.x + v.y < T:
        v = PyramidVertex(v.x + 1, v.y) if ans.s else PyramidVertex(v.x, v.y + 1)
        ans = oracle.query(v)
        if not ans.t:
            raise DomainError(f"successor {v} is off the line")
    return v, oracle.count - start


def phi_query_cost(x, oracle: CountedOracle) -> tuple[int, int]:
    """phi(x) through local information gathered from the oracle, and the queries spent."""
    start = oracle.count
    emb = oracle.emb
    r = rounding(x)
    codec = codec_for(emb)
    answers = tuple(oracle.corner(c) for c in [r] + neighbours(r))
    value = phi_local(x, LocalInfo(r, answers, codec.kind, emb.T))
    return value, oracle.count - start


# --- two-party protocols ------------------------------------------------------


@dataclass(frozen=True)
class Send:
    bits: tuple[int, ...]


@dataclass(frozen=True)
class Halt:
    output: object


@dataclass
class Transcript:
    messages: list = field(default_factory=list)

    def append(self, sender: str, bits) -> None:
        self.messages.append((sender, tuple(int(b) for b in bits)))

    @property
    def bits(self) -> int:
        return sum(len(b) for _, b in self.messages)

    def to_jsonl(self) -> str:
        lines, total = [], 0
        for sender, bits in self.messages:
            total += len(bits)
            lines.append(json.dumps({"sender": sender, "nbits": len(bits), "hex": bits_to_hex(bits), "cumulative": total}))
        return "\n".join(lines) + ("\n" if lines else "")


def bits_to_hex(bits) -> str:
    if not bits:
        return ""
    v = 0
    for b in bits:
        v = (v << 1) | int(b)
    return format(v, "0{}x".format((len(bits) + 3) // 4))


def bits_of(v: int, k: int) -> tuple[int, ...]:
    return tuple((v >> (k - 1 - j)) & 1 for j in range(k))


def int_of(bits) -> int:
    v = 0
    for b in bits:
        v = (v << 1) | int(b)
    return v


@dataclass
class ProtocolResult:
    status: str  # "done" | "aborted"
    output: object
    transcript: Transcript


class Protocol:
    """Two deterministic next-message functions; ``first`` speaks first."""

    first = "bob"

    def alice(self, view: AliceView, transcript: Transcript):
        raise NotImplementedError

    def bob(self, view: BobView, transcript: Transcript):
        raise NotImplementedError


def run_protocol(protocol: Protocol, split: SplitInstance, budget: int = 10**7) -> ProtocolResult:
    views = {"alice": split.alice_view(), "bob": split.bob_view()}
    turn = protocol.first
    tr = Transcript()
    while True:
        step = getattr(protocol, turn)(views[turn], tr)
        if isinstance(step, Halt):
            return ProtocolResult("done", step.output, tr)
        tr.append(turn, step.bits)
        if tr.bits > budget:
            return ProtocolResult("aborted", None, tr)
        turn = "alice" if turn == "bob" else "bob"


class NaiveProtocol(Protocol):
    """Bob sends every index; Alice decodes the whole line and sends its end.

    For pyramid lines the end is sent as (x, y) with coord_bits(T) bits each;
    for synthetic lines as the d corner bits.
    """

    first = "bob"

    def __init__(self, split: SplitInstance):
        # public layout: key order and widths only
        self.keys, self.width, self.kind, self.T, self.d = split.keys, split.width, split.kind, split.T, split.d

    def answer_bits(self) -> int:
        return 2 * coord_bits(self.T) if self.kind == "pyramid" else self.d

    def closed_form_bits(self) -> int:
        return INDEX_BITS * self.width * len(self.keys) + self.answer_bits()

    def bob(self, view: BobView, tr: Transcript):
        if not tr.messages:
            out = []
            for key in self.keys:
                for j in view.indices_at(key):
                    out.extend(bits_of(j, INDEX_BITS))
            return Send(tuple(out))
        return Halt(self._decode_end(tr.messages[-1][1]))

    def _decode_end(self, bits):
        if self.kind == "pyramid":
            b = coord_bits(self.T)
            return PyramidVertex(int_of(bits[:b]), int_of(bits[b:]))
        return tuple(29 * int(x) for x in bits)

    def alice(self, view: AliceView, tr: Transcript):
        msg = tr.messages[-1][1]
        pos, answers = 0, {}
        for key in self.keys:
            arrs = view.arrays_at(key)
            ans = []
            for k in range(self.width):
                j = int_of(msg[pos : pos + INDEX_BITS])
                pos += INDEX_BITS
                ans.append(arrs[k][j])
            answers[key] = tuple(ans)
        if self.kind == "pyramid":
            v = PyramidVertex(0, 0)
            while v.x + v.y < self.T:
                s = answers[(v.x, v.y)][1]
                v = PyramidVertex(v.x + 1, v.y) if s else PyramidVertex(v.x, v.y + 1)
            b = coord_bits(self.T)
            return Send(bits_of(v.x, b) + bits_of(v.y, b))
        from potlab.localinfo import SyntheticCodec

        codec = SyntheticCodec(self.T, self.d)
        end = next(k for k, a in answers.items() if a[0] and codec.decode(k, a).index == self.T)
        return Send(tuple(1 if c else 0 for c in end))


def naive_protocol(split: SplitInstance) -> NaiveProtocol:
    return NaiveProtocol(split)


def run_counted(fn: Callable, *args):
    """Run ``fn`` twice and confirm identical results; returns the first."""
    a, b = fn(*args), fn(*args)
    if a != b:
        raise AssertionError("non-deterministic cost accounting")
    return a
