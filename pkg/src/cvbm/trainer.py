"""Gradient-descent training of circuit parameters on the sampled MMD."""

from __future__ import annotations

import csv
import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .circuit import TRAINING_SHIFTS, Circuit, ShiftConfig, sample
from .errors import NonFinite
from .fock import FockConfig
from .gaussian import LossChannel
from .kernels import KernelSpec
from .mmd_loss import MmdEstimate, gradient_component, mmd

UPDATE_MODES = ("sequential", "simultaneous")
_ANGLES = {("Rotation", "phi"), ("Squeezing", "phi"), ("Beamsplitter", "theta"),
           ("Beamsplitter", "phi")}


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.05
    max_iterations: int = 60
    m_model: int = 50
    n_data: int = 50
    r_shift: int = 30
    s_shift: int = 30
    seed: int = 0
    noise: tuple[float, ...] | None = None  # transmissivity per mode, None = noiseless
    kernel: KernelSpec = field(default_factory=KernelSpec)
    convergence_window: int = 10
    convergence_tol: float = 1e-3
    update_mode: str = "sequential"
    reuse_model_samples: bool = False  # simultaneous mode only
    shifts: ShiftConfig = TRAINING_SHIFTS
    fock: FockConfig = field(default_factory=FockConfig)

    def __post_init__(self):
        if not self.learning_rate >= 0 or not np.isfinite(self.learning_rate):
            raise ValueError(f"learning_rate must be a finite nonnegative number, got {self.learning_rate}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.m_model < 2 or self.n_data < 2:
            raise ValueError("m_model and n_data must be >= 2")
        if self.r_shift < 1 or self.s_shift < 1:
            raise ValueError("r_shift and s_shift must be >= 1")
        if self.convergence_window < 1:
            raise ValueError("convergence_window must be >= 1")
        if self.update_mode not in UPDATE_MODES:
            raise ValueError(f"update_mode must be one of {UPDATE_MODES}")
        if self.noise is not None:
            noise = tuple(float(t) for t in self.noise)
            for t in noise:
                if not 0.0 <= t <= 1.0:
                    raise ValueError(f"transmissivity must lie in [0, 1], got {t}")
            object.__setattr__(self, "noise", noise)

    def channels(self) -> list[LossChannel]:
        return [LossChannel(t, k) for k, t in enumerate(self.noise or ())]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["noise"] = list(self.noise) if self.noise is not None else None
        return d


@dataclass(frozen=True)
class TrainLogEntry:
    iteration: int
    loss: float
    params: tuple[float, ...]
    wall_time_ms: int


def initialize(circuit: Circuit, rng: np.random.Generator) -> Circuit:
    """Angles uniform in [0, 2 pi); every other parameter N(0, 0.1^2)."""
    values = []
    for gi, pi in circuit.param_slots():
        g = circuit.gates[gi]
        if (g.kind, g.names[pi]) in _ANGLES:
            values.append(rng.uniform(0.0, 2 * np.pi))
        else:
            values.append(rng.normal(0.0, 0.1))
    return circuit.set_params(values)


def _draw_data(data: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    replace = n > data.shape[0]
    return data[rng.choice(data.shape[0], size=n, replace=replace)]


def converged(losses: list[float], window: int, tol: float) -> bool:
    return len(losses) >= window and max(losses[-window:]) - min(losses[-window:]) < tol


def plateaued(losses, window: int = 10) -> bool:
    """True when the last ``window`` losses show no significant downward trend:
    the least-squares slope is within two standard errors of zero or positive."""
    y = np.asarray(losses[-window:], dtype=float)
    if y.size < 3:
        return False
    t = np.arange(y.size, dtype=float)
    t -= t.mean()
    slope = float(t @ (y - y.mean()) / (t @ t))
    resid = y - y.mean() - slope * t
    se = float(np.sqrt(resid @ resid / (y.size - 2) / (t @ t)))
    return slope >= -2.0 * se


def train(circuit: Circuit, data, config: TrainConfig,
          callback: Callable[[TrainLogEntry, Circuit], None] | None = None
          ) -> tuple[Circuit, list[TrainLogEntry]]:
    """Run batch gradient descent; returns the trained circuit and the log.

    The loss logged for iteration t is the estimate on the samples drawn at
    the start of that iteration, before any parameter moves.
    """
    data = np.asarray(data, dtype=float)
    data = data[:, None] if data.ndim == 1 else data
    if data.shape[0] == 0:
        raise ValueError("training data is empty")
    if data.shape[1] != circuit.n_modes:
        raise ValueError(f"data has {data.shape[1]} columns, circuit has {circuit.n_modes} modes")
    if circuit.n_params == 0:
        raise ValueError("circuit has no trainable parameters")

    rng = np.random.default_rng(config.seed)
    noise = config.channels()
    cfg = config.fock
    mu = config.learning_rate
    spec = config.kernel
    log: list[TrainLogEntry] = []
    t0 = time.perf_counter()

    def draw_model(c: Circuit, r: np.random.Generator) -> np.ndarray:
        return sample(c, config.m_model, r, noise, fock_config=cfg)

    for it in range(1, config.max_iterations + 1):
        it_rng = rng.spawn(1)[0]
        Y = _draw_data(data, config.n_data, it_rng)
        X = draw_model(circuit, it_rng)
        if it == 1:
            # median heuristic on the pooled iteration-0 samples, then frozen
            spec = spec.resolve(np.vstack([X, Y]))
        loss = mmd(spec, X, Y).value
        if not np.isfinite(loss):
            raise NonFinite("loss", it)
        entry = TrainLogEntry(it, float(loss), tuple(float(p) for p in circuit.get_params()),
                              int(round((time.perf_counter() - t0) * 1000)))
        log.append(entry)
        if callback is not None:
            callback(entry, circuit)

        if config.update_mode == "sequential":
            for k in range(circuit.n_params):
                if k > 0:
                    X = draw_model(circuit, it_rng)
                g, _ = gradient_component(circuit, k, spec, X, Y, config.r_shift, config.s_shift,
                                          it_rng, noise, config.shifts, cfg)
                if not np.isfinite(g):
                    raise NonFinite("gradient", it)
                if mu != 0.0:
                    circuit = circuit.with_param(k, circuit.get_params()[k] - mu * g)
        else:
            grads = np.zeros(circuit.n_params)
            for k in range(circuit.n_params):
                Xk = X if (k == 0 or config.reuse_model_samples) else draw_model(circuit, it_rng)
                grads[k], _ = gradient_component(circuit, k, spec, Xk, Y, config.r_shift,
                                                 config.s_shift, it_rng, noise, config.shifts, cfg)
            if not np.all(np.isfinite(grads)):
                raise NonFinite("gradient", it)
            if mu != 0.0:
                circuit = circuit.set_params(circuit.get_params() - mu * grads)

        if converged([e.loss for e in log], config.convergence_window, config.convergence_tol):
            break
    return circuit, log


def evaluate(circuit: Circuit, data, spec: KernelSpec, m_eval: int = 1000, seed: int = 0,
             max_data: int | None = 10_000, noise: list[LossChannel] | None = None,
             fock_config: FockConfig | None = None) -> MmdEstimate:
    """Held-out MMD between fresh model samples and the dataset (capped at
    ``max_data`` rows, drawn without replacement)."""
    if m_eval < 2:
        raise ValueError("m_eval must be >= 2")
    data = np.asarray(data, dtype=float)
    data = data[:, None] if data.ndim == 1 else data
    rng = np.random.default_rng(seed)
    X = sample(circuit, m_eval, rng, noise, fock_config=fock_config)
    if max_data is not None and data.shape[0] > max_data:
        data = data[rng.choice(data.shape[0], size=max_data, replace=False)]
    spec = spec.resolve(np.vstack([X, data]))
    return mmd(spec, X, data)


LOG_HEADER = ("iteration", "loss", "wall_time_ms")


def write_log(path, log: list[TrainLogEntry]) -> None:
    n = len(log[0].params) if log else 0
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(list(LOG_HEADER) + [f"p{k}" for k in range(n)])
        for e in log:
            w.writerow([e.iteration, repr(e.loss), e.wall_time_ms] + [repr(p) for p in e.params])


def read_log(path) -> list[TrainLogEntry]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    out = []
    for row in rows[1:]:
        out.append(TrainLogEntry(int(row[0]), float(row[1]), tuple(float(v) for v in row[3:]),
                                 int(row[2])))
    return out


def save_checkpoint(path, circuit: Circuit, iteration: int, config: TrainConfig) -> None:
    """Circuit JSON at ``path`` plus a ``<stem>.meta.json`` sidecar."""
    path = Path(path)
    circuit.save(path)
    meta = {"iteration": iteration, "seed": config.seed, "config": config.to_dict()}
    path.with_suffix(".meta.json").write_text(json.dumps(meta, indent=2))
