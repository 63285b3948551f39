"""Congestion reductions of the cc games: facility counts and exact agreement."""

import argparse
import json

from potlab.eol import synthetic_line
from potlab.games.cc import build_cc_multiplayer_game, build_cc_twoplayer_game
from potlab.games.congestion import check_reduction, to_congestion_2p, to_congestion_np
from potlab.harness import split_instance


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--N", type=int, nargs="*", default=[2, 6, 12, 30])
    ap.add_argument("--k", type=int, nargs="*", default=[1, 2, 3])
    args = ap.parse_args()
    line = synthetic_line(2, ["+1"])
    split = split_instance(line, 0)
    cc2 = build_cc_twoplayer_game(split)
    for N in args.N:
        t = cc2.restricted_table(cc2.small_actions("A", N), cc2.small_actions("B", N))
        print(json.dumps({"N": N, **check_reduction(t, to_congestion_2p(t), N * N + 2 * N).to_json()}))
    ccn = build_cc_multiplayer_game(split, 2)
    base = ccn.truthful_profile((0, 0), (0, 0))
    for k in args.k:
        free = [("x", i) for i in range(min(k, 2))] + [("r1", j) for j in range(k - min(k, 2))]
        t = ccn.binary_subgame(base, free, free)
        print(json.dumps({"k": k, **check_reduction(t, to_congestion_np(t), 4**k + 2 ** (k + 1)).to_json()}))


if __name__ == "__main__":
    main()
