"""Best-response step counts from the all-zero start as the line grows."""

import argparse
import json

from potlab.eol import pipeline
from potlab.games.replication import build_replication_game
from potlab.solvers import best_response_dynamics


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--T", type=int, nargs="*", default=[1, 2, 3, 4, 6, 8])
    ap.add_argument("--seeds", type=int, default=3)
    ap.add_argument("--m", type=int, default=8)
    args = ap.parse_args()
    for T in args.T:
        for seed in range(args.seeds):
            line = pipeline(T, seed)
            g = build_replication_game(line, args.m, budget=10**12)
            tr = best_response_dynamics(g, (0,) * line.d)
            print(json.dumps({"T": T, "seed": seed, "d": line.d, "steps": tr.steps, "status": tr.status,
                              "at_end": tr.profiles[-1] == g.end_profile()}))


if __name__ == "__main__":
    main()
