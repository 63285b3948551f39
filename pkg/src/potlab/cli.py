"""Command-line front end. Every run writes one JSON report; exit 0 iff its checks pass."""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import os
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from potlab import eol
from potlab.games.base import BudgetExceeded

USAGE, FAIL, OK = 2, 1, 0


@dataclass
class RunConfig:
    command: str
    target: str | None = None
    line: dict | None = None
    seed: int = 0
    game: str | None = None
    m: int | None = None
    n: int | None = None
    mode: str = "exhaustive"
    samples: int = 1000
    budget: int = 10**7
    max_steps: int = 10**4
    threads: int = 1
    extra: dict = field(default_factory=dict)
    out: str | None = None


class UsageError(ValueError):
    pass


# --- serialization ---------------------------------------------------------------


def jsonable(v):
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else int(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, np.ndarray):
        return [jsonable(x) for x in v.tolist()]
    if hasattr(v, "to_json"):
        return jsonable(v.to_json())
    if dataclasses.is_dataclass(v) and not isinstance(v, type):
        return {f.name: jsonable(getattr(v, f.name)) for f in dataclasses.fields(v)}
    if isinstance(v, dict):
        return {str(k): jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, set, frozenset)):
        return [jsonable(x) for x in v]
    return v


def content_hash(doc) -> str:
    """Git blob hash of the canonical JSON of ``doc``."""
    data = json.dumps(jsonable(doc), sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()


# --- instances and games ---------------------------------------------------------


def _parse_synthetic(text: str) -> int:
    key, _, val = text.partition("=")
    if key != "d" or not val.isdigit():
        raise UsageError(f"--synthetic expects d=<int>, got {text!r}")
    return int(val)


def load_line(args) -> tuple[eol.EmbeddedLine, dict]:
    if args.line:
        raw = eol.read_line(args.line)
        doc = eol.line_to_json(raw)
        return eol.as_embedded(raw), doc
    if args.synthetic:
        line = eol.synthetic_line(_parse_synthetic(args.synthetic), args.moves or [])
        return line, eol.line_to_json(line)
    if args.T is not None:
        raw = eol.random_line(args.T, args.seed)
        return eol.embed_pyramid(raw), eol.line_to_json(raw, args.seed)
    raise UsageError("give one of --line, --T or --synthetic")


def build_game(name: str, line, args):
    from potlab.games.cc import build_cc_multiplayer_game, build_cc_twoplayer_game
    from potlab.games.imitation import build_imitation_game
    from potlab.games.replication import build_replication_game
    from potlab.harness import split_instance

    if name == "replication":
        return build_replication_game(line, args.m or 8)
    if name == "imitation":
        return build_imitation_game(line, args.n or 1)
    if name == "ccn":
        return build_cc_multiplayer_game(split_instance(line, args.seed), args.m or 2, args.n)
    if name == "cc2":
        return build_cc_twoplayer_game(split_instance(line, args.seed), args.n)
    raise UsageError(f"unknown game {name!r}")


def end_profiles(game, line):
    name = getattr(game, "name", "")
    if name == "replication":
        return [game.end_profile()]
    if name == "imitation":
        from potlab.games.imitation import end_profile

        return [end_profile(line)]
    if hasattr(game, "end_profile"):
        return [game.end_profile(line)]
    return []


def _profile_json(game, p):
    if hasattr(p, "__len__") and len(p) == 2 and hasattr(p[0], "counts"):
        return {"A": list(p[0].counts), "B": list(p[1].counts)}
    if hasattr(p, "__len__") and len(p) == 2 and isinstance(p[0], tuple) and len(p[0]) == 2:
        return {"A": list(p[0][0]), "B": list(p[1][0])}
    return jsonable(p)


# --- commands --------------------------------------------------------------------


def cmd_generate(args, cfg):
    line, doc = load_line(args)
    if args.out_line:
        Path(args.out_line).write_text(json.dumps(doc, indent=2) + "\n")
    return True, {"line": doc, "d": line.d, "T": line.T, "end": list(line.end)}


def cmd_verify(args, cfg):
    line, _ = load_line(args)
    if args.what == "domdir":
        from potlab.domdir import verify_domdir

        rep = verify_domdir(line, cfg.mode, count=cfg.samples, seed=cfg.seed, threads=cfg.threads)
        return rep.ok, rep.to_json()
    if args.what == "locality":
        from potlab.localinfo import verify_locality

        rep = verify_locality(line, cfg.mode, count=cfg.samples, seed=cfg.seed)
        return rep.ok, rep.to_json()
    return cmd_check(args, cfg, line=line)


def cmd_build(args, cfg):
    line, _ = load_line(args)
    game = build_game(args.which, line, args)
    res = {"name": game.name, "players": len(game.players), "profiles": game.size(), "meta": getattr(game, "meta", {})}
    if hasattr(game, "certificate"):
        res["certificate"] = game.certificate()
    res["end_profiles"] = [_profile_json(game, p) for p in end_profiles(game, line)]
    return True, res


def cmd_check(args, cfg, line=None):
    from potlab.games.verify import verify_potential_game, verify_structured

    if line is None:
        line, _ = load_line(args)
    game = build_game(args.game, line, args)
    if getattr(args, "what", None) == "structured":
        if not hasattr(game, "verify_structured") and len(game.players) != 2:
            raise UsageError("structured check needs cc2, ccn or a two-sided table game")
        rep = verify_structured(game)
        return rep.passed, rep.to_json()
    rep = verify_potential_game(game, cfg.mode, budget=cfg.budget, samples=cfg.samples, seed=cfg.seed)
    return rep.passed, rep.to_json()


def cmd_solve(args, cfg):
    from potlab import solvers
    from potlab.rng import make_rng

    line, _ = load_line(args)
    game = build_game(args.game, line, args)
    if args.what == "pure":
        found = game.pure_ne() if hasattr(game, "pure_ne") else solvers.pure_ne_enumerate(game, cfg.budget)
        ends = end_profiles(game, line)
        res = {"count": len(found), "ne": [_profile_json(game, p) for p in found],
               "expected": [_profile_json(game, p) for p in ends]}
        return sorted(map(repr, found)) == sorted(map(repr, ends)), res
    if args.what == "mixed-sample":
        rng = make_rng(cfg.seed, 5)
        refuted, first = 0, None
        for s in range(cfg.samples):
            mixed = _random_mixture(game, rng, args.support)
            w = solvers.mixed_deviation_check(game, mixed, cfg.budget)
            if w is not None:
                refuted += 1
            elif first is None:
                first = s
        return refuted == cfg.samples, {"samples": cfg.samples, "refuted": refuted, "first_unrefuted": first}
    if args.what == "support":
        from potlab.games.base import TableGame

        if not isinstance(game, TableGame):
            if not hasattr(game, "small_actions"):
                raise UsageError("support enumeration needs a two-player table game or cc2")
            acts = [game.small_actions(s, args.actions) for s in ("A", "B")]
            game = game.restricted_table(*acts)
        found = solvers.support_enum_2p(game, args.max_support, cfg.budget)
        return True, {"count": len(found), "equilibria": [[list(map(str, p)), list(map(str, q))] for p, q in found]}
    raise UsageError(args.what)


def _random_mixture(game, rng, support: int):
    out = []
    for p in game.players:
        k = min(support, p.n_actions)
        idx = rng.choice(p.n_actions, size=k, replace=False)
        w = [int(v) for v in rng.integers(1, 9, size=k)]
        dist = [Fraction(0)] * p.n_actions
        for i, x in zip(idx, w):
            dist[int(i)] = Fraction(x, sum(w))
        out.append(dist)
    return out


def cmd_dynamics(args, cfg):
    from potlab.solvers import best_response_dynamics

    line, _ = load_line(args)
    game = build_game(args.game, line, args)
    if args.game != "replication":
        raise UsageError("dynamics runs on the replication game")
    start = (0,) * line.d
    tr = best_response_dynamics(game, start, cfg.max_steps)
    end = game.end_profile()
    ok = tr.status == "converged" and tuple(tr.profiles[-1]) == end
    return ok, {"status": tr.status, "steps": tr.steps, "final": list(tr.profiles[-1]), "expected": list(end),
                "trajectory": tr.to_json()}


def cmd_protocol(args, cfg):
    from potlab.harness import naive_protocol, run_protocol, split_instance

    line, _ = load_line(args)
    split = split_instance(line, cfg.seed)
    if args.which == "naive":
        proto = naive_protocol(split)
        res = run_protocol(proto, split)
        out = res.output
        truth = line.end if line.pyramid is None else line.pyramid.vertices[-1]
        ok = res.status == "done" and out == truth and res.transcript.bits == proto.closed_form_bits()
        rep = {"status": res.status, "output": jsonable(out), "bits": res.transcript.bits,
               "closed_form_bits": proto.closed_form_bits(), "expected": jsonable(truth)}
    else:
        from potlab.games.cc import best_response_protocol, build_cc_twoplayer_game

        game = build_cc_twoplayer_game(split, args.n)
        proto = best_response_protocol(game)
        res = run_protocol(proto, split)
        out = res.output
        ok = res.status == "done" and out is not None and tuple(out[0][0]) == tuple(line.end) == tuple(out[1][0])
        rep = {"status": res.status, "output": None if out is None else _profile_json(game, out),
               "bits": res.transcript.bits, "messages": len(res.transcript.messages), "expected": list(line.end)}
    if args.transcript:
        Path(args.transcript).write_text(res.transcript.to_jsonl())
    return ok, rep


def cmd_reduce(args, cfg):
    from potlab.games.congestion import check_reduction, to_congestion_2p, to_congestion_np

    line, _ = load_line(args)
    game = build_game(args.game, line, args)
    if args.which == "congestion-2p":
        if args.game != "cc2":
            raise UsageError("congestion-2p reduces the cc2 game")
        N = args.actions
        table = game.restricted_table(game.small_actions("A", N), game.small_actions("B", N))
        cg = to_congestion_2p(table)
        rep = check_reduction(table, cg, N * N + 2 * N)
    else:
        if args.game != "ccn":
            raise UsageError("congestion-np reduces the ccn game")
        k = args.k
        base = game.truthful_profile((0,) * line.d, (0,) * line.d)
        free = [("x", i) for i in range(min(k, line.d))] + [("r1", j) for j in range(k - min(k, line.d))]
        table = game.binary_subgame(base, free, free)
        cg = to_congestion_np(table)
        rep = check_reduction(table, cg, 4**k + 2 ** (k + 1))
    return rep.passed, rep.to_json()


def cmd_audit(args, cfg):
    from potlab import hd
    from potlab.rng import make_rng

    n = max(cfg.n or 0, hd.minimal_chain_n())
    rng = make_rng(cfg.seed, 7)
    fixed = [hd.uniform()] + [hd.point_mass(k) for k in range(hd.SUPPORT)]
    betas = fixed + [hd.random_beta(rng, n) for _ in range(max(0, cfg.samples - len(fixed)))]
    chain = hd.power_chain(n)
    if args.which == "hd":
        fails = [i for i, b in enumerate(betas) if not hd.lemma_hd_verify(b, n).passed]
        res = {"n": n, "minimal_n": hd.minimal_chain_n(), "distributions": len(betas), "failures": len(fails),
               "first_failure": fails[0] if fails else None, "chain": chain}
        return not fails and chain.holds, res
    reps = [hd.appendix_a_audit(b, n, minimal_n=hd.minimal_chain_n()) for b in betas[: cfg.samples]]
    bad = [i for i, r in enumerate(reps) if not r.passed]
    return not bad and chain.holds, {"n": n, "audited": len(reps), "failures": len(bad),
                                     "first": reps[bad[0]] if bad else reps[0], "chain": chain}


# --- argument parsing ------------------------------------------------------------


def _instance_flags(p):
    p.add_argument("--line", help="line file written by `generate`")
    p.add_argument("--T", type=int, help="pipeline instance with a random pyramid line of length T")
    p.add_argument("--synthetic", metavar="d=D", help="synthetic line in dimension D")
    p.add_argument("--moves", nargs="*", default=None, help="signed axis moves of the synthetic line, e.g. +1 +2")


def _game_flags(p, required=True):
    p.add_argument("--game", choices=["replication", "imitation", "cc2", "ccn"], required=required)
    p.add_argument("--m", type=int, help="replication factor")
    p.add_argument("--n", type=int, help="degree parameter (imitation) or weight exponent (cc games)")


def _mode_flags(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--exhaustive", action="store_true")
    g.add_argument("--sampled", type=int, metavar="COUNT")


def _run_flags(p, defaults: bool):
    d = (lambda v: v) if defaults else (lambda v: argparse.SUPPRESS)
    p.add_argument("--seed", type=int, default=d(0), help="the single source of randomness")
    p.add_argument("--threads", type=int, default=d(os.cpu_count() or 1))
    p.add_argument("--budget", type=int, default=d(10**7), help="profile budget")
    p.add_argument("--report", default=d(None), help="write the JSON report here (default: stdout)")


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="potlab")
    _run_flags(ap, True)
    common = argparse.ArgumentParser(add_help=False)
    _run_flags(common, False)
    sub = ap.add_subparsers(dest="command", required=True)
    _add = sub.add_parser
    sub.add_parser = lambda *a, **k: _add(*a, parents=[common], **k)

    p = sub.add_parser("generate", help="write a line file")
    _instance_flags(p)
    p.add_argument("--out-line")

    p = sub.add_parser("verify", help="potential | locality | domdir")
    p.add_argument("what", choices=["potential", "locality", "domdir"])
    _instance_flags(p)
    _mode_flags(p)
    _game_flags(p, required=False)

    p = sub.add_parser("build", help="build a game and summarize it")
    p.add_argument("which", choices=["replication", "imitation", "cc2", "ccn"])
    _instance_flags(p)
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=int)

    p = sub.add_parser("check", help="potential-game | structured")
    p.add_argument("what", choices=["potential-game", "structured"])
    _instance_flags(p)
    _mode_flags(p)
    _game_flags(p)

    p = sub.add_parser("solve", help="pure | mixed-sample | support")
    p.add_argument("what", choices=["pure", "mixed-sample", "support"])
    _instance_flags(p)
    _mode_flags(p)
    _game_flags(p)
    p.add_argument("--support", type=int, default=2, help="support size of sampled mixtures")
    p.add_argument("--max-support", type=int, default=2)
    p.add_argument("--actions", type=int, default=6, help="actions per side for restricted cc2 tables")

    p = sub.add_parser("dynamics", help="best-response dynamics from the all-zero profile")
    _instance_flags(p)
    _game_flags(p, required=False)
    p.add_argument("--max-steps", type=int, default=10**4)

    p = sub.add_parser("protocol", help="naive | best-response two-party protocols")
    p.add_argument("which", choices=["naive", "best-response"], nargs="?", default="naive")
    _instance_flags(p)
    p.add_argument("--n", type=int)
    p.add_argument("--transcript", help="write the transcript as JSON lines")

    p = sub.add_parser("reduce", help="congestion-2p | congestion-np")
    p.add_argument("which", choices=["congestion-2p", "congestion-np"])
    _instance_flags(p)
    _game_flags(p)
    p.add_argument("--actions", type=int, default=30, help="N for congestion-2p")
    p.add_argument("--k", type=int, default=2, help="binary players per side for congestion-np")
    p.add_argument("--check", choices=["exhaustive"], default="exhaustive")

    p = sub.add_parser("audit", help="hd | appendix-a")
    p.add_argument("which", choices=["hd", "appendix-a"])
    p.add_argument("--n", type=int)
    p.add_argument("--sampled", type=int, metavar="COUNT", default=10**4)
    return ap


COMMANDS = {
    "generate": cmd_generate,
    "verify": cmd_verify,
    "build": cmd_build,
    "check": cmd_check,
    "solve": cmd_solve,
    "dynamics": cmd_dynamics,
    "protocol": cmd_protocol,
    "reduce": cmd_reduce,
    "audit": cmd_audit,
}


def config_of(args) -> RunConfig:
    sampled = getattr(args, "sampled", None)
    cfg = RunConfig(
        command=args.command,
        target=getattr(args, "what", None) or getattr(args, "which", None),
        seed=args.seed,
        game=getattr(args, "game", None) or (args.which if args.command == "build" else None),
        m=getattr(args, "m", None),
        n=getattr(args, "n", None),
        mode="sampled" if sampled else "exhaustive",
        samples=sampled or 1000,
        budget=args.budget,
        max_steps=getattr(args, "max_steps", 10**4),
        threads=args.threads,
        out=args.report,
    )
    for key in ("support", "max_support", "actions", "k"):
        if hasattr(args, key):
            cfg.extra[key] = getattr(args, key)
    if cfg.threads < 1 or cfg.budget < 1 or cfg.samples < 1 or cfg.max_steps < 1:
        raise UsageError("budgets and thread counts must be positive")
    return cfg


def main(argv=None) -> int:
    ap = make_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return USAGE if e.code else OK
    try:
        cfg = config_of(args)
        if args.command == "verify" and args.what == "potential":
            if not args.game:
                raise UsageError("verify potential needs --game")
            args.what = "potential-game"
        if args.command == "dynamics" and not args.game:
            args.game = "replication"
        if any(getattr(args, k, None) for k in ("line", "synthetic")) or getattr(args, "T", None) is not None:
            _, cfg.line = load_line(args)
        t0 = time.perf_counter()
        ok, results = COMMANDS[args.command](args, cfg)
        elapsed = time.perf_counter() - t0
    except (UsageError, eol.InvalidLineError, eol.DomainError, BudgetExceeded, ValueError) as e:
        print(f"potlab: error: {e}", file=sys.stderr)
        return USAGE
    inputs = {"config": dataclasses.asdict(cfg)}
    inputs["config"].pop("out")
    report = {
        "command": args.command,
        "config": inputs["config"],
        "input_hash": content_hash(inputs),
        "ok": bool(ok),
        "results": jsonable(results),
        "timestamp": {"elapsed_s": round(elapsed, 3)},
    }
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    return OK if ok else FAIL


if __name__ == "__main__":
    sys.exit(main())
