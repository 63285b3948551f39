"""End-of-line instances on the pyramid graph and their hypercube / grid embeddings."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from potlab.rng import make_rng

SIDE = 29  # grid is [0, 29]^d; corners are {0, 29}^d


class InvalidLineError(ValueError):
    pass


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class PyramidVertex:
    x: int
    y: int

    def __iter__(self):
        return iter((self.x, self.y))


@dataclass(frozen=True)
class VertexAnswer:
    t: int
    s: int
    p: int

    def bits(self) -> tuple[int, int, int]:
        return (self.t, self.s, self.p)


@dataclass(frozen=True)
class PyramidLine:
    T: int
    vertices: tuple[PyramidVertex, ...]

    def __post_init__(self):
        if self.T < 1 or len(self.vertices) != self.T + 1:
            raise InvalidLineError("a line of length T has T+1 vertices")
        if self.vertices[0] != PyramidVertex(0, 0):
            raise InvalidLineError("line must start at (0,0)")
        for t, (u, v) in enumerate(zip(self.vertices, self.vertices[1:])):
            step = (v.x - u.x, v.y - u.y)
            if step not in ((1, 0), (0, 1)):
                raise InvalidLineError(f"step {t} is {step}, not +e1/+e2")

    @property
    def steps(self) -> tuple[str, ...]:
        return tuple("+1" if v.x > u.x else "+2" for u, v in zip(self.vertices, self.vertices[1:]))

    @classmethod
    def from_steps(cls, steps) -> "PyramidLine":
        x = y = 0
        verts = [PyramidVertex(0, 0)]
        for s in steps:
            if s in ("+1", 1, "1"):
                x += 1
            elif s in ("+2", 2, "2"):
                y += 1
            else:
                raise InvalidLineError(f"bad pyramid step {s!r}")
            verts.append(PyramidVertex(x, y))
        return cls(len(verts) - 1, tuple(verts))

    def position(self, v: PyramidVertex) -> int | None:
        t = meter_index(v)
        if t <= self.T and self.vertices[t] == v:
            return t
        return None

    def in_pyramid(self, v: PyramidVertex) -> bool:
        return v.x >= 0 and v.y >= 0 and v.x + v.y <= self.T

    def pyramid_vertices(self):
        for x in range(self.T + 1):
            for y in range(self.T + 1 - x):
                yield PyramidVertex(x, y)


def meter_index(v: PyramidVertex) -> int:
    return v.x + v.y


def random_line(T: int, seed: int) -> PyramidLine:
    if T < 1:
        raise ValueError("T must be >= 1")
    rng = make_rng(seed)
    steps = ["+1" if b else "+2" for b in rng.integers(0, 2, size=T)]
    return PyramidLine.from_steps(steps)


def line_query(line: PyramidLine, v: PyramidVertex) -> VertexAnswer:
    """The (on-line, successor is +e1, predecessor is -e1) triple at ``v``."""
    if not line.in_pyramid(v):
        raise DomainError(f"{v} is outside Pyr({line.T})")
    if line.position(v) is None:
        return VertexAnswer(0, 0, 0)
    right = PyramidVertex(v.x + 1, v.y)
    left = PyramidVertex(v.x - 1, v.y)
    s = int(line.in_pyramid(right) and line.position(right) is not None)
    p = int(v.x >= 1 and line.position(left) is not None)
    return VertexAnswer(1, s, p)


# --- Gray code embedding -------------------------------------------------------


def gray(x: int) -> int:
    return x ^ (x >> 1)


def gray_inverse(g: int) -> int:
    x = 0
    while g:
        x ^= g
        g >>= 1
    return x


def coord_bits(T: int) -> int:
    return max(1, T.bit_length())


def encode_vertex(v: PyramidVertex, b: int) -> tuple[int, ...]:
    gx, gy = gray(v.x), gray(v.y)
    return tuple((gx >> k) & 1 for k in range(b)) + tuple((gy >> k) & 1 for k in range(b))


def decode_vertex(bits, b: int) -> PyramidVertex:
    gx = sum(int(bit) << k for k, bit in enumerate(bits[:b]))
    gy = sum(int(bit) << k for k, bit in enumerate(bits[b : 2 * b]))
    return PyramidVertex(gray_inverse(gx), gray_inverse(gy))


@dataclass(frozen=True)
class HypercubeLine:
    n: int
    points: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if not self.points or any(self.points[0]):
            raise InvalidLineError("hypercube line must start at the all-zero point")
        for u, v in zip(self.points, self.points[1:]):
            if sum(a != b for a, b in zip(u, v)) != 1:
                raise InvalidLineError("consecutive hypercube points must differ in one bit")


def gray_embed(line: PyramidLine) -> HypercubeLine:
    b = coord_bits(line.T)
    return HypercubeLine(2 * b, tuple(encode_vertex(v, b) for v in line.vertices))


# --- grid embedding -----------------------------------------------------------


def _signed(axis: int, sign: int) -> str:
    return f"{'+' if sign > 0 else '-'}{axis + 1}"


def parse_direction(token) -> tuple[int, int]:
    """'+3' -> (axis 2, +1); axes are 1-based in tokens, 0-based internally."""
    token = str(token).strip()
    if not token or token[0] not in "+-":
        raise InvalidLineError(f"bad direction token {token!r}")
    return int(token[1:]) - 1, (1 if token[0] == "+" else -1)


@dataclass(frozen=True)
class EmbeddedLine:
    """The embedded line L' in [0,29]^d.

    ``corners[k]`` is l'(k-1), so ``corners[0]`` is the origin (0,...,0,29) and
    ``corners[1]`` is l'(0) = 0_d. Segment E(t) runs from l'(t-1) to l'(t) and
    E(0) is the initial edge along -e_d.
    """

    d: int
    corners: tuple[tuple[int, ...], ...]
    pyramid: PyramidLine | None = None
    _cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        d = self.d
        if d < 2:
            raise InvalidLineError("d must be >= 2")
        origin = (0,) * (d - 1) + (SIDE,)
        if len(self.corners) < 2 or self.corners[0] != origin or self.corners[1] != (0,) * d:
            raise InvalidLineError("line must start with the initial edge (0,..,29) -> 0")
        seen = set()
        for c in self.corners:
            if len(c) != d or any(v not in (0, SIDE) for v in c):
                raise InvalidLineError(f"{c} is not a corner of the grid")
            if c in seen:
                raise InvalidLineError(f"corner {c} visited twice")
            seen.add(c)
        for u, v in zip(self.corners, self.corners[1:]):
            if sum(a != b for a, b in zip(u, v)) != 1:
                raise InvalidLineError("consecutive corners must differ in one coordinate")

    @property
    def T(self) -> int:
        return len(self.corners) - 2

    def corner(self, t: int) -> tuple[int, ...]:
        """l'(t) for t in [-1, T]."""
        if not -1 <= t <= self.T:
            raise IndexError(t)
        return self.corners[t + 1]

    @property
    def origin(self) -> tuple[int, ...]:
        return self.corners[0]

    @property
    def end(self) -> tuple[int, ...]:
        return self.corners[-1]

    def direction(self, t: int) -> tuple[int, int]:
        """(axis, sign) of segment E(t)."""
        u, v = self.corner(t - 1), self.corner(t)
        for i, (a, b) in enumerate(zip(u, v)):
            if a != b:
                return i, (1 if b > a else -1)
        raise AssertionError

    def segment(self, t: int) -> list[tuple[int, ...]]:
        """The 30 grid points of E(t), from l'(t-1) to l'(t)."""
        u = self.corner(t - 1)
        i, sgn = self.direction(t)
        pts = []
        for k in range(SIDE + 1):
            p = list(u)
            p[i] = u[i] + sgn * k
            pts.append(tuple(p))
        return pts

    def segment_boxes(self) -> np.ndarray:
        """Array (T+1, 2, d): per segment the lower and upper corner of its bounding box."""
        key = "boxes"
        if key not in self._cache:
            c = np.array(self.corners, dtype=np.int64)
            lo = np.minimum(c[:-1], c[1:])
            hi = np.maximum(c[:-1], c[1:])
            self._cache[key] = np.stack([lo, hi], axis=1)
        return self._cache[key]

    def index_of_corner(self, c) -> int | None:
        idx = self._cache.get("cindex")
        if idx is None:
            idx = {corner: k - 1 for k, corner in enumerate(self.corners)}
            self._cache["cindex"] = idx
        return idx.get(tuple(c))

    @property
    def moves(self) -> tuple[str, ...]:
        out = []
        for t in range(1, self.T + 1):
            out.append(_signed(*self.direction(t)))
        return tuple(out)


def grid_embed(hline: HypercubeLine, pyramid: PyramidLine | None = None) -> EmbeddedLine:
    n = hline.n
    corners = [(0,) * n + (SIDE,)]
    corners += [tuple(SIDE * b for b in p) + (0,) for p in hline.points]
    return EmbeddedLine(n + 1, tuple(corners), pyramid)


def embed_pyramid(line: PyramidLine) -> EmbeddedLine:
    return grid_embed(gray_embed(line), line)


def synthetic_line(d: int, moves) -> EmbeddedLine:
    if d < 2:
        raise InvalidLineError("d must be >= 2")
    cur = [0] * d
    corners = [(0,) * (d - 1) + (SIDE,), tuple(cur)]
    for tok in moves:
        i, sgn = tok if isinstance(tok, tuple) else parse_direction(tok)
        if not 0 <= i < d:
            raise InvalidLineError(f"axis {i + 1} out of range for d={d}")
        target = cur[i] + sgn * SIDE
        if target not in (0, SIDE):
            raise InvalidLineError(f"move {_signed(i, sgn)} leaves the corner set at {tuple(cur)}")
        cur[i] = target
        corners.append(tuple(cur))
    return EmbeddedLine(d, tuple(corners))


def pipeline(T: int, seed: int) -> EmbeddedLine:
    return embed_pyramid(random_line(T, seed))


# --- line files ---------------------------------------------------------------


def line_to_json(line: PyramidLine | EmbeddedLine, seed: int | None = None) -> dict:
    if isinstance(line, EmbeddedLine) and line.pyramid is not None:
        line = line.pyramid
    if isinstance(line, PyramidLine):
        doc = {"kind": "pyramid", "T": line.T, "moves": list(line.steps)}
    else:
        doc = {"kind": "synthetic", "d": line.d, "moves": list(line.moves)}
    if seed is not None:
        doc["seed"] = seed
    return doc


def line_from_json(doc: dict) -> PyramidLine | EmbeddedLine:
    kind = doc.get("kind")
    if kind == "pyramid":
        line = PyramidLine.from_steps(doc["moves"])
        if "T" in doc and doc["T"] != line.T:
            raise InvalidLineError("T does not match the number of moves")
        return line
    if kind == "synthetic":
        return synthetic_line(int(doc["d"]), doc["moves"])
    raise InvalidLineError(f"unknown line kind {kind!r}")


def write_line(path, line, seed: int | None = None) -> None:
    Path(path).write_text(json.dumps(line_to_json(line, seed), indent=2) + "\n")


def read_line(path) -> PyramidLine | EmbeddedLine:
    return line_from_json(json.loads(Path(path).read_text()))


def as_embedded(line: PyramidLine | EmbeddedLine) -> EmbeddedLine:
    return embed_pyramid(line) if isinstance(line, PyramidLine) else line
