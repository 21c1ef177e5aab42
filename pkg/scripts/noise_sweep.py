"""S-D model learning a noiseless quantum Gaussian target through a loss
channel, for several transmissivities and seeds."""

import argparse
import csv
from pathlib import Path

import numpy as np

from cvbm import experiments as ex


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--T", type=float, nargs="+", default=[1.0, 0.8, 0.6])
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--iterations", type=int, default=50)
    ap.add_argument("--out", default="runs/noise_sweep")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    finals: dict[float, list[float]] = {}
    with open(out / "curves.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["T", "seed", "iteration", "loss"])
        for T in args.T:
            for seed in range(args.seeds):
                res = ex.noise_run(T, seed, args.iterations)
                finals.setdefault(T, []).append(ex.final_loss(res.losses))
                w.writerows([T, seed, i + 1, repr(v)] for i, v in enumerate(res.losses))
    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["T", "mean_final_loss", "std_final_loss"])
        for T, v in finals.items():
            w.writerow([T, repr(float(np.mean(v))), repr(float(np.std(v, ddof=1)))])
            print(f"T={T:g}: {np.mean(v):.5f} +/- {np.std(v, ddof=1):.5f}")


if __name__ == "__main__":
    main()
