"""High-degree imitation: exact checks of the best-three-integers lemma and its proof chain.

``lemma_hd_verify`` works with raw 2n-th powers only. ``appendix_a_audit``
additionally encloses the 2n-th roots z_k = y_k^(1/2n) in rational intervals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm

SUPPORT = 30  # integers 0..29
PREC_BITS = 64


def as_beta(beta) -> tuple[Fraction, ...]:
    b = tuple(Fraction(v) for v in beta)
    if len(b) != SUPPORT or min(b) < 0 or sum(b) != 1:
        raise ValueError("beta must be 30 nonnegative rationals summing to 1")
    return b


def scaled_losses(beta, n: int) -> tuple[list[int], int]:
    """(Q * E_{b ~ beta} (a - b)^(2n) for a = 0..29, Q) with Q the common denominator of beta."""
    beta = as_beta(beta)
    Q = lcm(*(v.denominator for v in beta))
    p = [(k, v.numerator * (Q // v.denominator)) for k, v in enumerate(beta) if v]
    pw = [k ** (2 * n) for k in range(SUPPORT)]
    return [sum(w * pw[abs(a - k)] for k, w in p) for a in range(SUPPORT)], Q


def expected_losses(beta, n: int) -> list[Fraction]:
    """E_{b ~ beta} (a - b)^(2n) for a = 0..29, exact."""
    L, Q = scaled_losses(beta, n)
    return [Fraction(v, Q) for v in L]


@dataclass
class HdReport:
    n: int
    passed: bool
    v_star: Fraction
    argmin: int
    segment: tuple[int, int] | None
    margin: Fraction | None  # min over outside a of loss(a) - v* - 3^n
    losses: list = field(default_factory=list, repr=False)  # scaled by the common denominator

    def to_json(self):
        return {
            "n": self.n,
            "passed": self.passed,
            "v_star": str(self.v_star),
            "argmin": self.argmin,
            "segment": self.segment,
            "margin": None if self.margin is None else str(self.margin),
        }


def lemma_hd_verify(beta, n: int) -> HdReport:
    """Some [c, c+2] has every outside integer at least v* + 3^n above the minimum."""
    if n < 1:
        raise ValueError("n must be >= 1")
    L, Q = scaled_losses(beta, n)
    v = min(L)
    arg = L.index(v)
    gap = Q * 3**n
    best = None
    for c in range(SUPPORT - 2):
        m = min(L[a] for a in range(SUPPORT) if not c <= a <= c + 2) - v - gap
        if best is None or m > best[1]:
            best = (c, m)
    c, m = best
    ok = m >= 0
    return HdReport(n, ok, Fraction(v, Q), arg, (c, c + 2) if ok else None, Fraction(m, Q), L)


# --- proof audit ---------------------------------------------------------------


def iroot(x: int, k: int) -> int:
    """floor(x^(1/k)) for x >= 0."""
    if x < 2:
        return x
    r = 1 << ((x.bit_length() + k - 1) // k)
    while True:
        s = ((k - 1) * r + x // r ** (k - 1)) // k
        if s >= r:
            break
        r = s
    while r**k > x:
        r -= 1
    while (r + 1) ** k <= x:
        r += 1
    return r


def root_enclosure(y: Fraction, k: int, bits: int = PREC_BITS) -> tuple[Fraction, Fraction]:
    """[lo, hi] containing y^(1/k), with hi - lo <= 2^-bits."""
    if y == 0:
        return Fraction(0), Fraction(0)
    scale = 1 << bits
    lo = iroot(y.numerator * scale**k // y.denominator, k)
    exact = Fraction(lo, scale) ** k == y
    return Fraction(lo, scale), Fraction(lo + (0 if exact else 1), scale)


def chain_lhs(n: int) -> Fraction:
    return Fraction(9, 5) ** (2 * n) - 30 * (Fraction(9, 5) - Fraction(1, 30)) ** (2 * n)


@dataclass
class PowerChain:
    n: int
    first: bool  # 1.8^2n - 30 (1.8 - 1/30)^2n > 3.24^n - 30 * 3.13^n
    second: bool  # 3.24^n - 30 * 3.13^n > 3^n
    direct: bool  # 1.8^2n - 30 (1.8 - 1/30)^2n > 3^n

    @property
    def holds(self) -> bool:
        return self.first and self.second and self.direct

    def to_json(self):
        return {"n": self.n, "first": self.first, "second": self.second, "direct": self.direct, "holds": self.holds}


def power_chain(n: int) -> PowerChain:
    mid = Fraction(324, 100) ** n - 30 * Fraction(313, 100) ** n
    lhs = chain_lhs(n)
    return PowerChain(n, lhs > mid, mid > 3**n, lhs > 3**n)


def minimal_chain_n(limit: int = 2000, confirm: int = 200, which: str = "chain") -> int:
    """Least n where the chain (or only its two ends, ``which="direct"``) holds, and keeps holding for ``confirm`` more n."""

    def ok(k):
        c = power_chain(k)
        return c.holds if which == "chain" else c.direct

    for n in range(1, limit):
        if ok(n) and all(ok(k) for k in range(n + 1, n + confirm)):
            return n
    raise RuntimeError(f"no valid n below {limit}")


@dataclass
class AuditReport:
    n: int
    bits: int
    m: tuple[int, int, int]
    contiguous: bool
    floor_ok: bool  # f(a) >= 1.8 off {m1, m2, m3}
    gap_ok: bool  # f(a) >= f(m1) + 1/30 off {m1, m2, m3}
    loss_lower: bool  # loss(a) >= f(a)^2n
    loss_upper: bool  # loss(m1) <= 30 f(m1)^2n
    x_star: float
    chain: PowerChain
    minimal_n: int

    @property
    def passed(self) -> bool:
        return self.contiguous and self.floor_ok and self.gap_ok and self.loss_lower and self.loss_upper

    def to_json(self):
        d = {k: v for k, v in self.__dict__.items() if k != "chain"}
        d["m"] = list(self.m)
        d["chain"] = self.chain.to_json()
        d["passed"] = self.passed
        return d


class Undecided(ArithmeticError):
    pass


def _f_bounds(z, x):
    lo = max(zl * abs(x - k) for k, (zl, _) in enumerate(z))
    hi = max(zh * abs(x - k) for k, (_, zh) in enumerate(z))
    return lo, hi


def _audit_at(beta, n: int, bits: int, minimal_n: int) -> AuditReport:
    z = [root_enclosure(y, 2 * n, bits) for y in beta]
    fb = [_f_bounds(z, x) for x in range(SUPPORT)]
    order = sorted(range(SUPPORT), key=lambda a: (fb[a][0] + fb[a][1], a))
    m = tuple(order[:3])
    # ranking must be certain wherever it matters: m3 against the best outsider
    if fb[order[2]][1] > fb[order[3]][0] and fb[order[2]][0] != fb[order[3]][0]:
        raise Undecided("m3 and m4 overlap")
    contiguous = max(m) - min(m) == 2
    rest = [a for a in range(SUPPORT) if a not in m]
    floor = Fraction(9, 5)
    gap_to = fb[m[0]][1] + Fraction(1, 30)
    lo_rest = min(fb[a][0] for a in rest)
    hi_rest = min(fb[a][1] for a in rest)
    if lo_rest < floor <= hi_rest or lo_rest < gap_to <= hi_rest:
        raise Undecided("enclosure straddles a threshold")
    floor_ok = lo_rest >= floor
    gap_ok = lo_rest >= gap_to
    # f(a)^2n = max_k y_k (a-k)^2n exactly
    f2n = [max(y * (a - k) ** (2 * n) for k, y in enumerate(beta)) for a in range(SUPPORT)]
    L = expected_losses(beta, n)
    loss_lower = all(L[a] >= f2n[a] for a in range(SUPPORT))
    loss_upper = L[m[0]] <= 30 * f2n[m[0]]
    # x*: f is convex; ternary search on the enclosure midpoint
    lo, hi = 0.0, float(SUPPORT - 1)
    zm = [float((a + b) / 2) for a, b in z]
    for _ in range(200):
        x1, x2 = lo + (hi - lo) / 3, hi - (hi - lo) / 3
        if max(v * abs(x1 - k) for k, v in enumerate(zm)) <= max(v * abs(x2 - k) for k, v in enumerate(zm)):
            hi = x2
        else:
            lo = x1
    return AuditReport(n, bits, m, contiguous, floor_ok, gap_ok, loss_lower, loss_upper, (lo + hi) / 2,
                       power_chain(n), minimal_n)


def appendix_a_audit(beta, n: int, bits: int = PREC_BITS, max_bits: int = 4096, minimal_n: int | None = None) -> AuditReport:
    """Floor and gap of f off the best three integers with certified enclosures, exact loss bounds, and the exact power chain at n."""
    beta = as_beta(beta)
    mn = minimal_n if minimal_n is not None else minimal_chain_n()
    while True:
        try:
            return _audit_at(beta, n, bits, mn)
        except Undecided:
            if bits >= max_bits:
                raise
            bits *= 2


# --- distributions ------------------------------------------------------------


def point_mass(k: int) -> tuple[Fraction, ...]:
    return tuple(Fraction(int(i == k)) for i in range(SUPPORT))


def uniform() -> tuple[Fraction, ...]:
    return tuple(Fraction(1, SUPPORT) for _ in range(SUPPORT))


def with_tiny_weights(beta, where, n: int) -> tuple[Fraction, ...]:
    """Put weight 30^-n on each index in ``where`` and rescale the rest."""
    tiny = Fraction(1, 30**n)
    where = set(where)
    rest = sum(v for i, v in enumerate(beta) if i not in where)
    if rest == 0:
        raise ValueError("nothing left to rescale")
    scale = (1 - tiny * len(where)) / rest
    return tuple(tiny if i in where else v * scale for i, v in enumerate(beta))


def random_beta(rng, n: int, max_den: int = 16) -> tuple[Fraction, ...]:
    """Random exact distribution; about a third carry adversarial 30^-n weights."""
    kind = int(rng.integers(0, 3))
    k = int(rng.integers(1, 6))
    support = sorted(set(int(v) for v in rng.integers(0, SUPPORT, size=k)))
    w = [Fraction(int(rng.integers(1, max_den + 1))) for _ in support]
    s = sum(w)
    beta = [Fraction(0)] * SUPPORT
    for i, v in zip(support, w):
        beta[i] = v / s
    if kind == 0:
        return tuple(beta)
    if kind == 1:
        free = [i for i in range(SUPPORT) if beta[i] == 0]
        far = [int(v) for v in rng.choice(free, size=min(len(free), int(rng.integers(1, 4))), replace=False)]
        return with_tiny_weights(beta, far, n)
    # full support with a random subset of tiny weights
    dens = [Fraction(int(rng.integers(1, max_den + 1))) for _ in range(SUPPORT)]
    s = sum(dens)
    beta = [v / s for v in dens]
    tiny = [int(v) for v in rng.choice(SUPPORT, size=int(rng.integers(1, 10)), replace=False)]
    return with_tiny_weights(beta, tiny, n)
