"""Shift-rule vs finite-difference gradients on random circuits, per gate kind."""

import argparse
import csv
from pathlib import Path

from cvbm import experiments as ex


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--circuits", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="runs/gradient_fidelity.csv")
    args = ap.parse_args()

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["gate", "param", "shift_grad", "fd_grad", "abs_err", "tolerance"])
        for kind in ex.GATE_KINDS:
            res = ex.gradient_fidelity(kind, args.circuits, args.seed)
            for r in res.rows:
                w.writerow([kind, r.param, repr(r.shift_grad), repr(r.fd_grad), repr(r.abs_err), r.tolerance])
            print(f"{kind:13s} max err {res.max_err:.2e} tol {res.tolerance:.0e} {'ok' if res.ok else 'FAIL'}")


if __name__ == "__main__":
    main()
