"""Where the pure equilibria sit, per game and parameter."""

import argparse
import json

from potlab.eol import pipeline, synthetic_line
from potlab.games.cc import build_cc_multiplayer_game, build_cc_twoplayer_game
from potlab.games.imitation import build_imitation_game
from potlab.games.replication import build_replication_game
from potlab.harness import split_instance
from potlab.solvers import pure_ne_enumerate


def counts_of(profile):
    return [list(side.counts) for side in profile]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--moves", nargs="*", default=["+1"])
    ap.add_argument("--m", type=int, nargs="*", default=[2, 4, 8])
    ap.add_argument("--cc-m", type=int, nargs="*", default=[2, 29])
    args = ap.parse_args()
    line = synthetic_line(2, args.moves)
    for m in args.m:
        print(json.dumps({"game": "replication", "m": m, "ne": pure_ne_enumerate(build_replication_game(line, m))}))
    print(json.dumps({"game": "replication d=3", "m": 8, "ne": pure_ne_enumerate(build_replication_game(pipeline(1, 0), 8))}))
    for n in (1, 2, 3):
        print(json.dumps({"game": "imitation", "n": n, "ne": pure_ne_enumerate(build_imitation_game(line, n))}))
    split = split_instance(line, 0)
    for m in args.cc_m:
        ne = build_cc_multiplayer_game(split, m).pure_ne()
        print(json.dumps({"game": "cc multiplayer", "m": m, "count": len(ne), "counts": [counts_of(p) for p in ne]}))
    ne = build_cc_twoplayer_game(split).pure_ne()
    print(json.dumps({"game": "cc two-player", "points": [[p[0][0], p[1][0]] for p in ne]}))


if __name__ == "__main__":
    main()
