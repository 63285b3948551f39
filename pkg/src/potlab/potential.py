"""The grid potential attached to an embedded line, and its multilinear extension.

Two independent evaluation routes exist on purpose: ``phi`` scans every segment
of the line, while ``phi_local`` (see :mod:`potlab.localinfo`) only sees the
local information at the rounding of the point.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from potlab.eol import SIDE, EmbeddedLine

STEP = 88  # cost of one line step
SEMI_FAR_BASE = 58

ON_LINE, CLOSE, SEMI_CLOSE, SEMI_FAR, FAR = "on-line", "close", "semi-close", "semi-far", "far"
REGIONS = (ON_LINE, CLOSE, SEMI_CLOSE, SEMI_FAR, FAR)


@dataclass(frozen=True)
class RegionTag:
    kind: str
    t: int | None = None

    def __str__(self):
        return self.kind if self.t is None else f"{self.kind}({self.t})"


def d1(x, y) -> int:
    return sum(abs(a - b) for a, b in zip(x, y))


def dinf_box(x, lo, hi):
    return max(max(l - a, a - h, 0) for a, l, h in zip(x, lo, hi))


def segment_distances(x, line: EmbeddedLine) -> list[int]:
    boxes = line.segment_boxes()
    return [dinf_box(x, boxes[t, 0], boxes[t, 1]) for t in range(line.T + 1)]


def classify_distances(dists) -> RegionTag:
    """Region and edge-index from the list of d_inf distances to E(0..T)."""
    dmin = min(dists)
    if dmin == 0:
        return RegionTag(ON_LINE, max(t for t, v in enumerate(dists) if v == 0))
    if dmin <= 4:
        return RegionTag(CLOSE, max(t for t, v in enumerate(dists) if v <= 4))
    if dmin <= 12:
        t = min(t for t, v in enumerate(dists) if v <= 12)
        return RegionTag(SEMI_CLOSE if dists[t] <= 8 else SEMI_FAR, t)
    return RegionTag(FAR)


def classify(x, line: EmbeddedLine) -> RegionTag:
    return classify_distances(segment_distances(x, line))


def phi_formula(tag: RegionTag, x, T: int, corner) -> int:
    """Potential value for region ``tag``; ``corner(k)`` must return l'(k) for the k used."""
    t = tag.t
    if tag.kind == ON_LINE:
        return STEP * (T - t) + d1(x, corner(t))
    if tag.kind == CLOSE:
        return STEP * (t + T + 1) + d1(x, corner(t - 1))
    if tag.kind == SEMI_CLOSE:
        return STEP * (t + T + 2) + d1(x, corner(t - 1))
    if tag.kind == SEMI_FAR:
        return STEP * (t + T + 2) + d1(x, corner(t - 1)) + (SEMI_FAR_BASE - 2 * x[-1])
    return STEP * (T + 1) + d1(x, corner(-1))


def phi(x, line: EmbeddedLine) -> int:
    x = tuple(int(v) for v in x)
    if len(x) != line.d or any(not 0 <= v <= SIDE for v in x):
        raise ValueError(f"{x} is not a point of the grid")
    return phi_formula(classify(x, line), x, line.T, line.corner)


def phi_ceiling(line: EmbeddedLine) -> int:
    return STEP * (2 * line.T + 3) + SIDE * line.d + SEMI_FAR_BASE


def rounding(x) -> tuple[int, ...]:
    return tuple(SIDE if v >= 15 else 0 for v in x)


# --- vectorised evaluation ----------------------------------------------------


def phi_points(points: np.ndarray, line: EmbeddedLine) -> np.ndarray:
    """phi for each row of an integer array of shape (K, d)."""
    P = np.asarray(points, dtype=np.int64)
    boxes = line.segment_boxes()
    S = boxes.shape[0]
    dist = np.empty((S, P.shape[0]), dtype=np.int64)
    for t in range(S):
        lo, hi = boxes[t, 0], boxes[t, 1]
        dist[t] = np.maximum(np.maximum(lo - P, P - hi), 0).max(axis=1)
    tidx = np.arange(S)[:, None]
    dmin = dist.min(axis=0)
    on_t = np.where(dist == 0, tidx, -1).max(axis=0)
    close_t = np.where(dist <= 4, tidx, -1).max(axis=0)
    semi_t = np.where(dist <= 12, tidx, S).min(axis=0)
    cols = np.arange(P.shape[0])
    band = dist[np.minimum(semi_t, S - 1), cols]

    C = np.array(line.corners, dtype=np.int64)  # C[k] = l'(k-1)
    T = line.T

    def dist_to(k):  # d1(x, l'(k)) for an array of k
        return np.abs(P - C[k + 1]).sum(axis=1)

    out = STEP * (T + 1) + np.abs(P - C[0]).sum(axis=1)  # far
    on = dmin == 0
    close = (dmin >= 1) & (dmin <= 4)
    semi = (dmin >= 5) & (dmin <= 12)
    ot = np.where(on, on_t, 0)
    ct = np.where(close, close_t, 0)
    st = np.where(semi, semi_t, 0)
    out = np.where(on, STEP * (T - ot) + dist_to(ot), out)
    out = np.where(close, STEP * (ct + T + 1) + dist_to(ct - 1), out)
    semi_val = STEP * (st + T + 2) + dist_to(st - 1)
    semi_val = np.where(band >= 9, semi_val + SEMI_FAR_BASE - 2 * P[:, -1], semi_val)
    out = np.where(semi, semi_val, out)
    return out


def region_codes(points: np.ndarray, line: EmbeddedLine) -> tuple[np.ndarray, np.ndarray]:
    """(region index into REGIONS, number of segments within distance 12) per point."""
    P = np.asarray(points, dtype=np.int64)
    boxes = line.segment_boxes()
    dist = np.stack(
        [np.maximum(np.maximum(boxes[t, 0] - P, P - boxes[t, 1]), 0).max(axis=1) for t in range(boxes.shape[0])]
    )
    dmin = dist.min(axis=0)
    tidx = np.arange(dist.shape[0])[:, None]
    semi_t = np.where(dist <= 12, tidx, dist.shape[0] - 1).min(axis=0)
    band = dist[semi_t, np.arange(P.shape[0])]
    code = np.full(P.shape[0], 4)
    code[dmin <= 12] = np.where(band[dmin <= 12] >= 9, 3, 2)
    code[dmin <= 4] = 1
    code[dmin == 0] = 0
    return code, (dist <= 12).sum(axis=0)


def phi_grid(line: EmbeddedLine, max_d: int = 5) -> np.ndarray:
    """phi on the full grid as an int32 array of shape (30,)*d, cached on the line."""
    if "phi_grid" in line._cache:
        return line._cache["phi_grid"]
    d = line.d
    if d > max_d:
        raise ValueError(f"full-grid tabulation needs d <= {max_d}")
    out = np.empty((SIDE + 1,) * d, dtype=np.int32)
    sub = np.indices((SIDE + 1,) * (d - 1), dtype=np.int64).reshape(d - 1, -1).T
    for a in range(SIDE + 1):
        P = np.hstack([np.full((sub.shape[0], 1), a, dtype=np.int64), sub])
        out[a] = phi_points(P, line).reshape((SIDE + 1,) * (d - 1))
    line._cache["phi_grid"] = out
    return out


def phi_cached(line: EmbeddedLine):
    """Return a memoised integer-point evaluator for ``line``."""
    cache = line._cache.setdefault("phi_memo", {})
    table = line._cache.get("phi_grid")

    def f(x):
        x = tuple(int(v) for v in x)
        if table is not None:
            return int(table[x])
        v = cache.get(x)
        if v is None:
            v = cache[x] = phi(x, line)
        return v

    return f


# --- multilinear extension ----------------------------------------------------


def split_cell(x) -> tuple[tuple[int, ...], tuple[Fraction, ...]]:
    """x = c + y with c integer, 0 <= y < 1; at the top face c = 29 keeps y = 0."""
    xs = tuple(Fraction(v) for v in x)
    c = tuple(math.floor(v) for v in xs)
    y = tuple(v - k for v, k in zip(xs, c))
    return c, y


def multilinear(f, x) -> Fraction:
    """E f(c + s) with s_i ~ Bernoulli(y_i) independently, for x = c + y."""
    c, y = split_cell(x)
    frac = [i for i, v in enumerate(y) if v]
    total = Fraction(0)
    for bits in itertools.product((0, 1), repeat=len(frac)):
        w = Fraction(1)
        p = list(c)
        for i, b in zip(frac, bits):
            w *= y[i] if b else 1 - y[i]
            p[i] += b
        total += w * f(tuple(p))
    return total


def multilinear_phi(x, line: EmbeddedLine) -> Fraction:
    return multilinear(phi_cached(line), x)
