"""Small cubes, feasible and dominating directions, and the sweep that checks
every small cube except the end-of-line singleton has a dominating direction."""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from potlab.eol import SIDE, EmbeddedLine, _signed
from potlab.potential import REGIONS, multilinear_phi, phi_cached, phi_grid, phi_points, region_codes
from potlab.rng import make_rng

MAX_GAP = 4
CASES = ("A", "B", "C")


@dataclass(frozen=True)
class SmallCube:
    lo: tuple[int, ...]
    hi: tuple[int, ...]

    def __post_init__(self):
        if len(self.lo) != len(self.hi):
            raise ValueError("corner dimensions differ")
        for a, b in zip(self.lo, self.hi):
            if not (0 <= a <= b <= SIDE and b - a <= MAX_GAP):
                raise ValueError(f"not a small cube: {self.lo}..{self.hi}")

    @property
    def d(self) -> int:
        return len(self.lo)

    def points(self):
        return itertools.product(*(range(a, b + 1) for a, b in zip(self.lo, self.hi)))

    def contains(self, x) -> bool:
        return all(a <= v <= b for v, a, b in zip(x, self.lo, self.hi))


def direction_token(direction) -> str:
    return _signed(*direction)


def feasible_directions(cube: SmallCube, d: int | None = None) -> set[tuple[int, int]]:
    d = cube.d if d is None else d
    out = set()
    for i in range(d):
        if cube.lo[i] <= SIDE - 1:
            out.add((i, 1))
        if cube.hi[i] >= 1:
            out.add((i, -1))
    return out


@dataclass
class DirectionReport:
    all_dominating: list[tuple[int, int]]
    feasible: set[tuple[int, int]]
    witnesses: dict[tuple[int, int], tuple[int, ...]] = field(default_factory=dict)

    @property
    def dominating(self) -> tuple[int, int] | None:
        return self.all_dominating[0] if self.all_dominating else None


def dominating_directions(cube: SmallCube, line: EmbeddedLine) -> DirectionReport:
    f = phi_cached(line)
    feas = feasible_directions(cube)
    dom, wit = [], {}
    for i, s in sorted(feas):
        bad = None
        for x in cube.points():
            y = list(x)
            y[i] += s
            if not 0 <= y[i] <= SIDE:
                continue
            if not f(x) > f(tuple(y)):
                bad = x
                break
        if bad is None:
            dom.append((i, s))
        else:
            wit[(i, s)] = bad
    return DirectionReport(dom, feas, wit)


# --- box-sum machinery --------------------------------------------------------


def _prefix(arr: np.ndarray) -> np.ndarray:
    """Zero-padded inclusive prefix sums, so S[a] = sum of arr over y < a."""
    S = np.zeros(tuple(n + 1 for n in arr.shape), dtype=np.int32)
    S[tuple(slice(1, None) for _ in arr.shape)] = arr
    for ax in range(arr.ndim):
        np.cumsum(S, axis=ax, out=S)
    return S


def _box_sums(S: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    d = lo.shape[1]
    total = np.zeros(lo.shape[0], dtype=np.int64)
    for eps in itertools.product((0, 1), repeat=d):
        idx = tuple(np.where(e, hi[:, k] + 1, lo[:, k]) for k, e in enumerate(eps))
        sign = (-1) ** (d - sum(eps))
        total += sign * S[idx].astype(np.int64)
    return total


def _violation_grid(g: np.ndarray, axis: int, sign: int) -> np.ndarray:
    """1 where stepping along (axis, sign) stays in the grid but phi does not drop."""
    V = np.zeros(g.shape, dtype=np.int8)
    n = g.shape[axis]
    src = [slice(None)] * g.ndim
    dst = [slice(None)] * g.ndim
    if sign > 0:
        src[axis], dst[axis] = slice(0, n - 1), slice(1, n)
    else:
        src[axis], dst[axis] = slice(1, n), slice(0, n - 1)
    V[tuple(src)] = g[tuple(src)] <= g[tuple(dst)]
    return V


def interval_table() -> np.ndarray:
    """The 140 admissible per-coordinate intervals [l, l+len], len 0..4, in lexicographic order."""
    rows = [(l, l + ln) for l in range(SIDE + 1) for ln in range(MAX_GAP + 1) if l + ln <= SIDE]
    return np.array(rows, dtype=np.int64)


@dataclass
class DomDirReport:
    d: int
    mode: str
    cubes: int = 0
    violations: list = field(default_factory=list)
    exceptions: list = field(default_factory=list)
    case_counts: dict = field(default_factory=lambda: {c: 0 for c in CASES})
    direction_hist: dict = field(default_factory=lambda: {c: {} for c in CASES})
    region_points: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations

    def merge(self, other: "DomDirReport") -> "DomDirReport":
        out = DomDirReport(self.d, self.mode, self.cubes + other.cubes)
        out.violations = self.violations + other.violations
        out.exceptions = self.exceptions + other.exceptions
        for c in CASES:
            out.case_counts[c] = self.case_counts[c] + other.case_counts[c]
            h = dict(self.direction_hist[c])
            for k, v in other.direction_hist[c].items():
                h[k] = h.get(k, 0) + v
            out.direction_hist[c] = dict(sorted(h.items()))
        out.region_points = self.region_points or other.region_points
        return out

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "mode": self.mode,
            "cubes": self.cubes,
            "violations": len(self.violations),
            "violation_list": self.violations[:50],
            "exceptions": len(self.exceptions),
            "exception_list": self.exceptions[:50],
            "case_counts": self.case_counts,
            "direction_hist": self.direction_hist,
            "region_points": self.region_points,
            "ok": self.ok,
        }


class _Tables:
    """Prefix-sum tables over the full grid for one line."""

    def __init__(self, line: EmbeddedLine):
        self.line = line
        g = phi_grid(line)
        self.d = line.d
        self.dirs = [(i, s) for i in range(self.d) for s in (1, -1)]
        self.viol = [_prefix(_violation_grid(g, i, s)) for i, s in self.dirs]
        far = np.empty(g.shape, dtype=np.int8)
        multi = np.empty(g.shape, dtype=np.int8)
        counts = np.zeros(len(REGIONS), dtype=np.int64)
        # one slab per leading coordinate keeps the segment-distance matrix small
        sub = np.indices(g.shape[1:], dtype=np.int64).reshape(self.d - 1, -1).T
        for a in range(g.shape[0]):
            pts = np.hstack([np.full((sub.shape[0], 1), a, dtype=np.int64), sub])
            code, near = region_codes(pts, line)
            counts += np.bincount(code, minlength=len(REGIONS))
            far[a] = (code == 4).reshape(g.shape[1:])
            multi[a] = (near >= 2).reshape(g.shape[1:])
        self.region_points = {REGIONS[k]: int(counts[k]) for k in range(len(REGIONS))}
        self.far = _prefix(far)
        self.multi = _prefix(multi)


def _evaluate(tables: _Tables, lo: np.ndarray, hi: np.ndarray, mode: str) -> DomDirReport:
    line = tables.line
    rep = DomDirReport(line.d, mode, cubes=lo.shape[0])
    dom = np.zeros((lo.shape[0], len(tables.dirs)), dtype=bool)
    for k, (i, s) in enumerate(tables.dirs):
        feasible = lo[:, i] <= SIDE - 1 if s > 0 else hi[:, i] >= 1
        dom[:, k] = feasible & (_box_sums(tables.viol[k], lo, hi) == 0)
    vol = np.prod(hi - lo + 1, axis=1)
    far = _box_sums(tables.far, lo, hi) > 0
    multi_all = _box_sums(tables.multi, lo, hi) == vol
    case = np.where(far, 2, np.where(multi_all, 0, 1))
    for c in range(3):
        sel = case == c
        rep.case_counts[CASES[c]] = int(sel.sum())
        hist = {}
        for k, dr in enumerate(tables.dirs):
            cnt = int(dom[sel, k].sum())
            if cnt:
                hist[_signed(*dr)] = cnt
        rep.direction_hist[CASES[c]] = dict(sorted(hist.items()))
    end = np.array(line.end)
    for r in np.nonzero(~dom.any(axis=1))[0]:
        cube = {"lo": [int(v) for v in lo[r]], "hi": [int(v) for v in hi[r]]}
        if np.array_equal(lo[r], end) and np.array_equal(hi[r], end):
            rep.exceptions.append(cube)
        else:
            if len(rep.violations) < 50:
                dr = dominating_directions(SmallCube(tuple(cube["lo"]), tuple(cube["hi"])), line)
                cube["witnesses"] = {_signed(*k): list(v) for k, v in dr.witnesses.items()}
            rep.violations.append(cube)
    return rep


def _cube_chunks(d: int, chunk: int):
    iv = interval_table()
    n = iv.shape[0]
    total = n**d
    for start in range(0, total, chunk):
        ids = np.arange(start, min(total, start + chunk), dtype=np.int64)
        digits = []
        rest = ids
        for _ in range(d):
            digits.append(rest % n)
            rest = rest // n
        digits = digits[::-1]  # most significant coordinate first: lexicographic order
        lo = np.stack([iv[dg, 0] for dg in digits], axis=1)
        hi = np.stack([iv[dg, 1] for dg in digits], axis=1)
        yield lo, hi


def sample_cubes(line: EmbeddedLine, count: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Half the cubes anchored within distance 13 of the line, half uniform."""
    rng = make_rng(seed, stream=7)
    d = line.d
    near = count // 2
    lens = rng.integers(0, MAX_GAP + 1, size=(count, d))
    boxes = line.segment_boxes()
    seg = rng.integers(0, boxes.shape[0], size=near)
    anchor = boxes[seg, 0] + rng.integers(0, SIDE + 1, size=(near, d)) * (boxes[seg, 1] - boxes[seg, 0] > 0)
    anchor = anchor + rng.integers(-13, 14, size=(near, d))
    shift = rng.integers(0, MAX_GAP + 1, size=(near, d)) % (lens[:near] + 1)
    lo_near = np.clip(anchor - shift, 0, SIDE - lens[:near])
    lo_unif = rng.integers(0, SIDE + 1, size=(count - near, d)) % (SIDE + 1 - lens[near:])
    lo = np.vstack([lo_near, lo_unif]).astype(np.int64)
    return lo, lo + lens


def _evaluate_direct(line: EmbeddedLine, lo: np.ndarray, hi: np.ndarray, mode: str) -> DomDirReport:
    """Slow path for dimensions too large to tabulate: phi on each cube's 1-neighbourhood."""
    rep = DomDirReport(line.d, mode, cubes=lo.shape[0])
    end = tuple(line.end)
    for r in range(lo.shape[0]):
        cube = SmallCube(tuple(int(v) for v in lo[r]), tuple(int(v) for v in hi[r]))
        elo = np.maximum(lo[r] - 1, 0)
        ehi = np.minimum(hi[r] + 1, SIDE)
        pts = np.array(list(itertools.product(*(range(a, b + 1) for a, b in zip(elo, ehi)))))
        vals = dict(zip(map(tuple, pts.tolist()), phi_points(pts, line).tolist()))
        found = None
        for i, s in sorted(feasible_directions(cube)):
            ok = True
            for x in cube.points():
                y = list(x)
                y[i] += s
                if 0 <= y[i] <= SIDE and not vals[x] > vals[tuple(y)]:
                    ok = False
                    break
            if ok:
                found = (i, s)
                break
        key = "C"  # case detail is only tracked on the tabulated path
        rep.case_counts[key] += 1
        if found is None:
            c = {"lo": list(cube.lo), "hi": list(cube.hi)}
            (rep.exceptions if cube.lo == cube.hi == end else rep.violations).append(c)
        else:
            tok = _signed(*found)
            rep.direction_hist[key][tok] = rep.direction_hist[key].get(tok, 0) + 1
    rep.case_counts = {"unclassified": rep.cubes}
    rep.direction_hist = {"unclassified": rep.direction_hist["C"]}
    return rep


def verify_domdir(
    line: EmbeddedLine,
    mode: str = "exhaustive",
    count: int = 100_000,
    seed: int = 0,
    chunk: int = 200_000,
    threads: int = 1,
) -> DomDirReport:
    """Check every (or a sample of) small cube(s) for a dominating direction.

    The only cube allowed to lack one is the singleton at the end of the line;
    anything else is reported in ``violations`` with per-direction witnesses.
    """
    if mode == "exhaustive":
        if line.d > 3:
            raise ValueError("exhaustive sweep is limited to d <= 3")
        tables = _Tables(line)
        parts = _cube_chunks(line.d, chunk)
    elif mode == "sampled":
        lo, hi = sample_cubes(line, count, seed)
        if line.d <= 5:
            tables = _Tables(line)
            parts = ((lo[i : i + chunk], hi[i : i + chunk]) for i in range(0, count, chunk))
        else:
            rep = _evaluate_direct(line, lo, hi, mode)
            rep.region_points = {}
            return rep
    else:
        raise ValueError(f"unknown mode {mode!r}")

    run = lambda part: _evaluate(tables, part[0], part[1], mode)  # noqa: E731
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            reports = list(ex.map(run, parts))
    else:
        reports = [run(p) for p in parts]
    rep = reports[0]
    for r in reports[1:]:
        rep = rep.merge(r)
    rep.region_points = tables.region_points
    return rep


def cube_around(x, d: int) -> SmallCube:
    """The integer cube spanned by B(x, 0.2), collapsed on the grid faces."""
    lo, hi = [], []
    for v in x:
        v = Fraction(v)
        if v in (0, SIDE):
            lo.append(int(v))
            hi.append(int(v))
        else:
            lo.append(max(int(np.floor(float(v - Fraction(1, 5)))), 0))
            hi.append(min(int(np.ceil(float(v + Fraction(1, 5)))), SIDE))
    return SmallCube(tuple(lo), tuple(hi))


def axis_difference(line: EmbeddedLine, x, direction) -> Fraction:
    """phi-bar at the cell face behind x minus at the face ahead, along ``direction``.

    For x inside a cube with that dominating direction, this is at least 1.
    """
    i, s = direction
    c = int(np.floor(float(x[i])))
    if Fraction(x[i]) == SIDE:
        c = SIDE - 1
    behind, ahead = (c, c + 1) if s > 0 else (c + 1, c)
    xb = list(x)
    xa = list(x)
    xb[i], xa[i] = behind, ahead
    return multilinear_phi(xb, line) - multilinear_phi(xa, line)
