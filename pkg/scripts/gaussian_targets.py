"""Train the single-mode S-D model on a classical N(0, 1) target and on a
quantum Gaussian target, over several seeds; writes the loss curves."""

import argparse
import csv
from pathlib import Path

from cvbm import experiments as ex


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--out", default="runs/gaussian_targets")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    with open(out / "classical_curves.csv", "w", newline="") as fh, \
            open(out / "classical_moments.csv", "w", newline="") as mh:
        w, m = csv.writer(fh), csv.writer(mh)
        w.writerow(["seed", "iteration", "loss"])
        m.writerow(["seed", "mean", "std"])
        for seed in range(args.seeds):
            res, mean, std = ex.classical_gaussian(seed)
            w.writerows([seed, i + 1, repr(v)] for i, v in enumerate(res.losses))
            m.writerow([seed, repr(mean), repr(std)])
            print(f"classical seed {seed}: mean {mean:+.3f} std {std:.3f}")

    with open(out / "quantum_curves.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["seed", "iteration", "loss"])
        for seed in range(args.seeds):
            res = ex.quantum_gaussian(seed)
            w.writerows([seed, i + 1, repr(v)] for i, v in enumerate(res.losses))
            print(f"quantum seed {seed}: loss {res.losses[0]:.4f} -> {res.losses[-1]:.4f}")


if __name__ == "__main__":
    main()
