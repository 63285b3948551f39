"""Acceptance suite, one test per criterion.

Each check returns ``(ok, detail)``; the outcome is kept in ``RESULTS`` and
printed as a single line per criterion at the end of the pytest run (see
``conftest.pytest_terminal_summary``). Running this file directly prints the
same lines without pytest.

Criteria 1 and 4 are expected to fail: the potential has a strict local
minimum at the far point (13, 29) on the top face, which leaves cubes there
without a dominating direction and adds a second pure equilibrium. Details
are recorded in the project decisions ledger.
"""

import itertools
import sys
import time

import pytest

from potlab import hd
from potlab.domdir import verify_domdir
from potlab.eol import SIDE, pipeline, random_line, synthetic_line
from potlab.games.cc import build_cc_multiplayer_game, build_cc_twoplayer_game
from potlab.games.congestion import check_reduction, to_congestion_2p, to_congestion_np
from potlab.games.imitation import build_imitation_game, end_profile
from potlab.games.replication import build_replication_game
from potlab.games.verify import verify_potential_game
from potlab.harness import CountedOracle, follow_line_solver, naive_protocol, phi_query_cost, run_protocol, split_instance
from potlab.localinfo import verify_locality
from potlab.potential import phi
from potlab.rng import make_rng
from potlab.solvers import best_deviation, best_response_dynamics, pure_ne_enumerate

LINES_2D = [[], ["+1"], ["+1", "+2"]]
RESULTS: dict[int, tuple[str, bool, str]] = {}


def lines_2d():
    return [synthetic_line(2, mv) for mv in LINES_2D]


def _fmt(parts):
    return "; ".join(parts)


# --- checks --------------------------------------------------------------------


def check_domdir():
    parts, ok = [], True
    for line in lines_2d() + [pipeline(1, 0)]:
        rep = verify_domdir(line, "exhaustive", chunk=50_000, threads=1)
        single = [{"lo": list(line.end), "hi": list(line.end)}]
        good = not rep.violations and rep.exceptions == single
        ok &= good
        parts.append(f"d={line.d} moves={line.moves}: {len(rep.violations)} violations, {len(rep.exceptions)} exceptions")
    rep = verify_domdir(pipeline(3, 0), "sampled", count=10**6, seed=0, chunk=50_000)
    ok &= not rep.violations
    parts.append(f"d=5 sampled 1e6: {len(rep.violations)} violations")
    return ok, _fmt(parts)


def check_locality():
    parts, ok = [], True
    for line in lines_2d() + [pipeline(1, 0)]:
        rep = verify_locality(line, "exhaustive")
        ok &= rep.ok
        parts.append(f"d={line.d}: {rep.mismatches}/{rep.points}")
    rep = verify_locality(synthetic_line(6, ["+1", "+2", "+3"]), "sampled", count=10**6, seed=0)
    ok &= rep.ok
    parts.append(f"d=6 sampled: {rep.mismatches}/{rep.points}")
    return ok, _fmt(parts)


def check_potential():
    games = [(f"replication d=2 {mv}", build_replication_game(l, 8)) for mv, l in zip(LINES_2D, lines_2d())]
    games.append(("replication d=3", build_replication_game(pipeline(1, 0), 8)))
    games += [(f"imitation d=2 {mv}", build_imitation_game(l, 1)) for mv, l in zip(LINES_2D, lines_2d())]
    split = split_instance(synthetic_line(2, ["+1"]), 0)
    games.append(("cc multiplayer m=2", build_cc_multiplayer_game(split, 2)))
    games.append(("cc two-player", build_cc_twoplayer_game(split)))
    parts, ok = [], True
    for name, g in games:
        c = verify_potential_game(g, budget=10**8)
        ok &= c.passed
        parts.append(f"{name}: {'ok' if c.passed else 'FAIL'} ({c.profiles} profiles)")
    return ok, _fmt(parts)


def check_pure_ne():
    parts, ok = [], True

    def report(name, found, want):
        nonlocal ok
        good = sorted(found, key=repr) == sorted(want, key=repr)
        ok &= good
        parts.append(f"{name}: {len(found)} NE{'' if good else ' (expected only the end)'}")

    for mv, line in zip(LINES_2D, lines_2d()):
        g = build_replication_game(line, 8)
        report(f"replication {mv}", pure_ne_enumerate(g), [g.end_profile()])
    g = build_replication_game(pipeline(1, 0), 8)
    report("replication d=3", pure_ne_enumerate(g), [g.end_profile()])
    for mv, line in zip(LINES_2D, lines_2d()):
        report(f"imitation {mv}", pure_ne_enumerate(build_imitation_game(line, 1)), [end_profile(line)])
    line = synthetic_line(2, ["+1"])
    split = split_instance(line, 0)
    for m in (2, 29):
        g = build_cc_multiplayer_game(split, m)
        report(f"cc multiplayer m={m}", g.pure_ne(), [g.end_profile(line)])
    g = build_cc_twoplayer_game(split)
    report("cc two-player", g.pure_ne(), [g.end_profile(line)])
    return ok, _fmt(parts)


def check_hd(user_n: int = 0, count: int = 10**4):
    minimal = hd.minimal_chain_n()
    n = max(minimal, user_n)
    rng = make_rng(0, 7)
    fixed = [hd.uniform()] + [hd.point_mass(k) for k in range(hd.SUPPORT)]
    fixed += [hd.with_tiny_weights(hd.point_mass(k), [0, hd.SUPPORT - 1], n) for k in range(1, hd.SUPPORT - 1)]
    betas = fixed + [hd.random_beta(rng, n) for _ in range(count - len(fixed))]
    fails = sum(not hd.lemma_hd_verify(b, n).passed for b in betas)
    chain = hd.power_chain(n)
    ok = fails == 0 and chain.holds
    return ok, f"n={n} (minimal {minimal}): {fails} failures over {len(betas)} distributions; chain holds={chain.holds}"


def check_congestion():
    parts, ok = [], True
    line = synthetic_line(2, ["+1"])
    split = split_instance(line, 0)
    cc2 = build_cc_twoplayer_game(split)
    bad = []
    for N in range(1, 31):
        table = cc2.restricted_table(cc2.small_actions("A", N), cc2.small_actions("B", N))
        rep = check_reduction(table, to_congestion_2p(table), N * N + 2 * N)
        if not rep.passed:
            bad.append(N)
    ok &= not bad
    parts.append(f"two-player N=1..30: {30 - len(bad)}/30 pass (N=30: {rep.facilities} facilities)")
    ccn = build_cc_multiplayer_game(split, 2)
    base = ccn.truthful_profile((0,) * line.d, (0,) * line.d)
    for k in (1, 2, 3):
        free = [("x", i) for i in range(min(k, line.d))] + [("r1", j) for j in range(k - min(k, line.d))]
        table = ccn.binary_subgame(base, free, free)
        rep = check_reduction(table, to_congestion_np(table), 4**k + 2 ** (k + 1))
        ok &= rep.passed
        parts.append(f"multiplayer k={k}: {rep.facilities} facilities, {'ok' if rep.passed else 'FAIL'}")
    return ok, _fmt(parts)


def check_dynamics():
    parts, ok, steps = [], True, []
    for T in (2, 4):
        line = pipeline(T, 0)
        g = build_replication_game(line, 8)
        tr = best_response_dynamics(g, (0,) * line.d)
        mono = all(b > a for a, b in zip(tr.potentials, tr.potentials[1:]))
        good = tr.status == "converged" and tr.profiles[-1] == g.end_profile() and mono
        good &= best_deviation(g, tr.profiles[-1]) is None
        ok &= good
        steps.append(tr.steps)
        parts.append(f"T={T} d={line.d}: {tr.steps} steps, {'ok' if good else 'FAIL'}")
    ok &= steps == sorted(steps)
    return ok, _fmt(parts)


def check_costs():
    parts, ok = [], True
    follow = all(follow_line_solver(CountedOracle(random_line(T, s)), T)[1] == T + 1
                 for T in (1, 2, 5, 17, 40) for s in range(3))
    ok &= follow
    parts.append(f"follow_line T+1 queries: {follow}")
    worst = 0
    for line in lines_2d() + [pipeline(1, 0)]:
        o = CountedOracle(line)
        for x in itertools.product(range(SIDE + 1), repeat=line.d):
            v, q = phi_query_cost(x, o)
            ok &= v == phi(x, line) and q <= line.d + 1
            worst = max(worst, q - line.d - 1)
    parts.append(f"phi_query_cost within d+1: {worst <= 0}")

    def naive(line, seed):
        s = split_instance(line, seed)
        p = naive_protocol(s)
        r = run_protocol(p, s)
        return r.transcript.bits == p.closed_form_bits(), (r.output, r.transcript.bits, r.transcript.to_jsonl())

    runs = [(random_line(T, 1), 7) for T in (1, 5, 12)] + [(synthetic_line(3, ["+1", "+2", "-1"]), 7)]
    first = [naive(*a) for a in runs]
    again = [naive(*a) for a in runs]
    exact = all(f[0] for f in first)
    same = [f[1] for f in first] == [a[1] for a in again]
    ok &= exact and same
    parts.append(f"naive bits = closed form: {exact}; deterministic: {same}")
    return ok, _fmt(parts)


CRITERIA = {
    1: ("dominating directions", check_domdir),
    2: ("locality", check_locality),
    3: ("exact potential", check_potential),
    4: ("pure-equilibrium location", check_pure_ne),
    5: ("minimal expected loss gap", check_hd),
    6: ("congestion reductions", check_congestion),
    7: ("best-response dynamics", check_dynamics),
    8: ("cost accounting", check_costs),
}


def run(k: int):
    title, fn = CRITERIA[k]
    t = time.time()
    ok, detail = fn()
    RESULTS[k] = (title, ok, f"{detail} [{time.time() - t:.0f}s]")
    return ok, detail


def summary_lines():
    return [f"criterion {k} {title}: {'PASS' if ok else 'FAIL'} | {detail}" for k, (title, ok, detail) in sorted(RESULTS.items())]


# --- pytest entry points ---------------------------------------------------------


@pytest.mark.parametrize("k", sorted(CRITERIA))
def test_criterion(k):
    ok, detail = run(k)
    title, _, shown = RESULTS[k]
    print(f"criterion {k} {title}: {'PASS' if ok else 'FAIL'} | {shown}")
    assert ok, detail


if __name__ == "__main__":
    for k in (map(int, sys.argv[1:]) if len(sys.argv) > 1 else sorted(CRITERIA)):
        ok, _ = run(k)
        title, _, shown = RESULTS[k]
        print(f"criterion {k} {title}: {'PASS' if ok else 'FAIL'} | {shown}", flush=True)
