"""Minimal-loss gap over random exact distributions, around the chain threshold."""

import argparse
import json

from potlab import hd
from potlab.rng import make_rng


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--n", type=int, nargs="*", default=[1, 5, 20, 60, 92, 99])
    args = ap.parse_args()
    print(json.dumps({"minimal_chain_n": hd.minimal_chain_n(), "minimal_direct_n": hd.minimal_chain_n(which="direct")}))
    for n in args.n:
        rng = make_rng(args.seed, 7)
        reps = [hd.lemma_hd_verify(hd.random_beta(rng, n), n) for _ in range(args.count)]
        fails = [r for r in reps if not r.passed]
        print(json.dumps({"n": n, "count": args.count, "failures": len(fails), "chain": hd.power_chain(n).to_json(),
                          "first_failure": fails[0].to_json() if fails else None}))


if __name__ == "__main__":
    main()
