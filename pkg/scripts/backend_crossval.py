"""KS comparison of Gaussian-backend and Fock-backend homodyne samples."""

import argparse
import csv
from pathlib import Path

from cvbm import experiments as ex


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--circuits", type=int, default=20)
    ap.add_argument("--count", type=int, default=10_000)
    ap.add_argument("--cutoff", type=int, default=30)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="runs/backend_crossval.csv")
    args = ap.parse_args()

    results = ex.backend_crossval(args.circuits, args.count, args.cutoff, args.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["circuit", "n_modes", "mode", "ks_pvalue"])
        for i, (c, ps) in enumerate(results):
            for k, p in enumerate(ps):
                w.writerow([i, c.n_modes, k, repr(p)])
    pmin = min(p for _, ps in results for p in ps)
    print(f"{len(results)} circuits, smallest KS p-value {pmin:.4f}")


if __name__ == "__main__":
    main()
