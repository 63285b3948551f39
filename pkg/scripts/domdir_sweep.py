"""Dominating-direction sweep over small cubes, with violation counts per line."""

import argparse
import json

from potlab.domdir import verify_domdir
from potlab.eol import pipeline, synthetic_line


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=10**5, help="cubes sampled at d=5")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    cases = [(f"d=2 {mv}", synthetic_line(2, mv), "exhaustive") for mv in ([], ["+1"], ["+1", "+2"])]
    cases += [("pipeline T=1", pipeline(1, args.seed), "exhaustive"), ("pipeline T=3", pipeline(3, args.seed), "sampled")]
    for name, line, mode in cases:
        rep = verify_domdir(line, mode, count=args.samples, seed=args.seed, chunk=50_000)
        faces = sorted({tuple(v["hi"][k] == 29 for k in range(line.d)) for v in rep.violations})
        print(json.dumps({"case": name, "cubes": rep.cubes, "violations": len(rep.violations),
                          "exceptions": rep.exceptions, "cases": rep.case_counts,
                          "violation_faces": [list(f) for f in faces]}))


if __name__ == "__main__":
    main()
