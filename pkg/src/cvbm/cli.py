"""Command-line entry point.

Exit codes: 0 success, 1 runtime failure, 2 invalid input (config, schema,
or file format).
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import datasets
from .circuit import Circuit, ShiftConfig, sample
from .config import ConfigError, RunConfig, load
from .errors import CVBMError, FormatError
from .exact import GaussianDensity, density_of, gradient_check
from .fock import FockConfig
from .kernels import COMBINERS, KERNEL_KINDS, KernelSpec, gram
from .mmd_loss import mmd
from .trainer import TrainLogEntry, save_checkpoint, train, write_log

EXIT_OK, EXIT_RUNTIME, EXIT_INVALID = 0, 1, 2
FINAL_SAMPLES = 10_000
FINAL_WINDOW = 5


def workers() -> int:
    """Worker cap from CVBM_THREADS; 0 or unset means one per CPU."""
    raw = os.environ.get("CVBM_THREADS", "").strip()
    n = int(raw) if raw else 0
    if n < 0:
        raise ConfigError("CVBM_THREADS must be >= 0")
    return n if n > 0 else (os.cpu_count() or 1)


def final_loss(log: list[TrainLogEntry]) -> float:
    """Mean of the last few logged losses; a single sampled value is too noisy."""
    tail = [e.loss for e in log[-FINAL_WINDOW:]]
    return float(np.mean(tail))


def _write_csv(path: Path, rows, header=None) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if header:
            w.writerow(header)
        w.writerows(rows)


def _train_run(rc: RunConfig) -> tuple[Circuit, list[TrainLogEntry]]:
    data = datasets.generate(rc.target)
    return train(rc.circuit, data, rc.train)


def _emit_training(rc: RunConfig, out: Path, trained: Circuit, log: list[TrainLogEntry]) -> dict:
    out.mkdir(parents=True, exist_ok=True)
    write_log(out / "loss.csv", log)
    save_checkpoint(out / "checkpoint.json", trained, log[-1].iteration, rc.train)
    rng = np.random.default_rng([rc.train.seed, 2])
    datasets.save(out / "final_samples.csv",
                  sample(trained, FINAL_SAMPLES, rng, rc.train.channels(), fock_config=rc.train.fock))
    summary = {"final_loss": final_loss(log), "iterations": len(log), "seed": rc.train.seed}
    (out / "summary.json").write_text(json.dumps(summary, indent=2))
    return summary


def cmd_train(args) -> int:
    rc = load(args.config)
    if args.seed is not None:
        rc = _reseed(rc, args.seed)
    out = Path(args.out) if args.out else rc.output_dir
    trained, log = _train_run(rc)
    summary = _emit_training(rc, out, trained, log)
    print(f"trained {len(log)} iterations, final loss {summary['final_loss']:.6g} -> {out}")
    return EXIT_OK


def _reseed(rc: RunConfig, seed: int) -> RunConfig:
    from .config import parse
    raw = json.loads(json.dumps(rc.raw))
    raw.setdefault("train", {})["seed"] = int(seed)
    return parse(raw)


def cmd_sample(args) -> int:
    path = Path(args.checkpoint)
    try:
        circuit = Circuit.load(path)
    except (OSError, KeyError, ValueError) as exc:
        raise FormatError(f"{path}: not a circuit checkpoint ({exc})") from exc
    cutoff = args.cutoff
    meta = path.with_suffix(".meta.json")
    if cutoff is None and meta.exists():
        cutoff = json.loads(meta.read_text())["config"]["fock"]["cutoff"]
    cfg = FockConfig(cutoff=cutoff or 7)
    x = sample(circuit, args.count, np.random.default_rng(args.seed), fock_config=cfg)
    datasets.save(args.out, x)
    print(f"wrote {args.count} samples to {args.out}")
    return EXIT_OK


def _kernel_from_args(args) -> KernelSpec:
    base = KernelSpec()
    if getattr(args, "config", None):
        base = load(args.config).train.kernel
    fields = {k: v for k, v in (("kind", args.kernel), ("sigma", args.sigma),
                                ("cutoff", args.cutoff), ("combiner", args.combiner)) if v is not None}
    return replace(base, **fields)


def cmd_mmd(args) -> int:
    spec = _kernel_from_args(args)
    a, b = datasets.load(args.a), datasets.load(args.b)
    if args.split:
        rng = np.random.default_rng(args.seed)
        a = a[rng.permutation(len(a))][: len(a) // 2]
        b = b[rng.permutation(len(b))][len(b) // 2:]
    spec = spec.resolve(np.vstack([a, b]))
    est = mmd(spec, a, b)
    print(f"{est.value!r}")
    return EXIT_OK


def cmd_kernel_gram(args) -> int:
    spec = _kernel_from_args(args)
    x = datasets.load(args.samples)
    spec = spec.resolve(x)
    g = gram(spec, x, x)
    _write_csv(Path(args.out), [[repr(float(v)) for v in row] for row in g])
    print(f"wrote {g.shape[0]}x{g.shape[1]} Gram matrix to {args.out}")
    return EXIT_OK


def cmd_grad_check(args) -> int:
    rc = load(args.config)
    out = Path(args.out) if args.out else rc.output_dir
    circuit = rc.circuit
    cfg = rc.train.fock
    if rc.target.kind == "ClassicalGaussian":
        target = GaussianDensity(np.asarray(rc.target.mu), np.diag(np.asarray(rc.target.sigma) ** 2))
    else:
        grid = None
        target = density_of(rc.target.circuit, cfg, grid)
    spec = rc.train.kernel
    if spec.kind != "GaussianRBF":
        raise ConfigError("grad-check needs the GaussianRBF kernel")
    if spec.sigma is None:
        spec = spec.resolve(datasets.generate(replace(rc.target, count=2000)))
    h = rc.grad_gaussian_shift
    shifts = ShiftConfig(displacement=h, squeezing=h, angle=h, nongaussian=rc.grad_t)
    rows = gradient_check(circuit, spec, target, shifts, cfg)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "grad_check.csv",
               [[r.param, repr(r.shift_grad), repr(r.fd_grad), repr(r.abs_err)] for r in rows],
               ["param", "shift_grad", "fd_grad", "abs_err"])
    bad = [r for r in rows if not r.ok]
    for r in rows:
        print(f"{r.param:28s} shift={r.shift_grad:+.8f} fd={r.fd_grad:+.8f} "
              f"err={r.abs_err:.2e} tol={r.tolerance:.0e} {'ok' if r.ok else 'FAIL'}")
    return EXIT_OK if not bad else EXIT_RUNTIME


def _sweep_cell(raw: dict, T: float, seed: int) -> tuple[float, int, list[float]]:
    from .config import parse
    raw = json.loads(json.dumps(raw))
    tr = raw.setdefault("train", {})
    tr["seed"] = seed
    tr["noise"] = T
    rc = parse(raw)
    _, log = _train_run(rc)
    return T, seed, [e.loss for e in log]


SWEEP_DEFAULTS = {"m_model": 100, "n_data": 100, "r_shift": 50, "s_shift": 50}


def cmd_noise_sweep(args) -> int:
    rc = load(args.config)
    ts = [float(t) for t in args.T]
    for t in ts:
        if not 0.0 <= t <= 1.0:
            raise ConfigError(f"transmissivity {t} outside [0, 1]")
    if args.seeds < 1:
        raise ConfigError("--seeds must be >= 1")
    raw = json.loads(json.dumps(rc.raw))
    tr = raw.setdefault("train", {})
    for k, v in SWEEP_DEFAULTS.items():
        tr.setdefault(k, v)
    base_seed = rc.train.seed
    cells = [(t, base_seed + i) for t in ts for i in range(args.seeds)]
    n_workers = min(workers(), len(cells))
    if n_workers > 1:
        with ProcessPoolExecutor(n_workers) as pool:
            results = list(pool.map(_sweep_cell, [raw] * len(cells), *zip(*cells)))
    else:
        results = [_sweep_cell(raw, t, s) for t, s in cells]

    out = Path(args.out) if args.out else rc.output_dir
    out.mkdir(parents=True, exist_ok=True)
    finals = {}
    for t, s, losses in results:
        finals.setdefault(t, []).append(float(np.mean(losses[-FINAL_WINDOW:])))
    rows = []
    for t, s, losses in results:
        f = finals[t]
        rows.append([repr(t), s, repr(float(np.mean(losses[-FINAL_WINDOW:]))),
                     repr(float(np.mean(f))), repr(float(np.std(f, ddof=1) if len(f) > 1 else 0.0))])
    _write_csv(out / "noise_sweep.csv", rows, ["T", "seed", "final_loss", "T_mean", "T_std"])
    _write_csv(out / "noise_sweep_curves.csv",
               [[repr(t), s, i + 1, repr(v)] for t, s, losses in results for i, v in enumerate(losses)],
               ["T", "seed", "iteration", "loss"])
    for t in ts:
        print(f"T={t:g}: final loss {np.mean(finals[t]):.5f} +/- {np.std(finals[t]):.5f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cvbm", description="CV Born machine simulator and trainer")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="train a circuit from a run config")
    t.add_argument("config")
    t.add_argument("--seed", type=int)
    t.add_argument("--out")
    t.set_defaults(func=cmd_train)

    s = sub.add_parser("sample", help="draw homodyne samples from a checkpointed circuit")
    s.add_argument("checkpoint")
    s.add_argument("--count", type=int, default=FINAL_SAMPLES)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--cutoff", type=int)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sample)

    def kernel_flags(q):
        q.add_argument("--config", help="take the kernel from this run config's train.kernel")
        q.add_argument("--kernel", choices=KERNEL_KINDS)
        q.add_argument("--sigma", type=float)
        q.add_argument("--cutoff", type=int)
        q.add_argument("--combiner", choices=COMBINERS)

    m = sub.add_parser("mmd", help="unbiased MMD between two sample files")
    m.add_argument("a")
    m.add_argument("b")
    m.add_argument("--split", action="store_true",
                   help="shuffle both files and compare disjoint halves")
    m.add_argument("--seed", type=int, default=0)
    kernel_flags(m)
    m.set_defaults(func=cmd_mmd)

    g = sub.add_parser("grad-check", help="shift-rule vs finite-difference gradients on exact densities")
    g.add_argument("config")
    g.add_argument("--out")
    g.set_defaults(func=cmd_grad_check)

    k = sub.add_parser("kernel-gram", help="write the Gram matrix of a sample file")
    k.add_argument("samples")
    k.add_argument("--out", required=True)
    kernel_flags(k)
    k.set_defaults(func=cmd_kernel_gram)

    n = sub.add_parser("noise-sweep", help="train under loss channels of several transmissivities")
    n.add_argument("config")
    n.add_argument("--T", nargs="+", required=True, type=float)
    n.add_argument("--seeds", type=int, default=5)
    n.add_argument("--out")
    n.set_defaults(func=cmd_noise_sweep)
    return p


def _origin(exc: BaseException) -> str:
    """Name of the innermost package module in the traceback."""
    name = "cli"
    for frame in traceback.extract_tb(exc.__traceback__):
        parts = Path(frame.filename).parts
        if "cvbm" in parts:
            name = Path(frame.filename).stem
    return name


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FormatError, FileNotFoundError) as exc:
        print(f"error [{_origin(exc)}]: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (CVBMError, ValueError, ArithmeticError, OSError) as exc:
        print(f"error [{_origin(exc)}]: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
