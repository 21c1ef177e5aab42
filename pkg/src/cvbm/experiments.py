"""Desk-scale experiment drivers shared by ``scripts/`` and the acceptance tests."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .circuit import GRADCHECK_SHIFTS, Circuit, sample
from .exact import GaussianDensity, GradCheckRow, gradient_check
from .fock import FockConfig
from .gates import BSgate, Dgate, Gate, Kgate, Rgate, Sgate, Vgate
from .kernels import KernelSpec
from .trainer import TrainConfig, initialize, plateaued, train

# ---------------------------------------------------------------- circuits


def sd_circuit() -> Circuit:
    """Single-mode squeeze-then-displace model."""
    return Circuit(1, (Sgate(0.0, 0.0, 0), Dgate(0.0, 0.0, 0)), "S-D")


QUANTUM_GAUSSIAN_TARGET = Circuit(1, (Sgate(0.4, 0.0, 0), Dgate(0.5, 0.0, 0)), "target S(0.4) D(0.5)")


def three_mode_model() -> Circuit:
    gates = [Sgate(0.0, 0.0, k) for k in range(3)]
    gates += [Dgate(0.0, 0.0, k) for k in range(3)]
    gates += [BSgate(0.0, 0.0, (0, 1)), BSgate(0.0, 0.0, (1, 2))]
    return Circuit(3, tuple(gates), "3-mode S-D-BS")


THREE_MODE_TARGET = Circuit(3, (
    BSgate(0.6, 0.2, (0, 1)), BSgate(0.4, -0.3, (1, 2)),
    Dgate(0.3, 0.0, 0), Dgate(-0.2, 0.1, 1), Dgate(0.1, 0.0, 2),
    Sgate(0.3, 0.0, 0), Sgate(-0.2, 0.0, 1), Sgate(0.25, 0.0, 2),
), "3-mode BS-D-S target")


def _u(rng, a=0.5):
    return float(rng.uniform(-a, a))


def random_gaussian_circuit(rng: np.random.Generator, n_modes: int, depth: int = 4,
                            bound: float = 0.5) -> Circuit:
    """Random Gaussian circuit with every parameter in [-bound, bound]."""
    gates: list[Gate] = []
    for _ in range(depth):
        kind = rng.choice(["R", "D", "S", "BS"] if n_modes > 1 else ["R", "D", "S"])
        k = int(rng.integers(n_modes))
        if kind == "R":
            gates.append(Rgate(_u(rng, bound), k))
        elif kind == "D":
            gates.append(Dgate(_u(rng, bound), _u(rng, bound), k))
        elif kind == "S":
            gates.append(Sgate(_u(rng, bound), _u(rng, bound), k))
        else:
            i, j = rng.choice(n_modes, size=2, replace=False)
            gates.append(BSgate(_u(rng, bound), _u(rng, bound), (int(i), int(j))))
    # every mode gets at least a displacement so no marginal is trivially vacuum
    for k in range(n_modes):
        gates.append(Dgate(_u(rng, bound), _u(rng, bound), k))
    return Circuit(n_modes, tuple(gates))


def gate_probe_circuit(kind: str, rng: np.random.Generator) -> tuple[Circuit, list[int]]:
    """A random circuit exercising one gate kind; returns it with the flat
    indices of that gate's parameters.

    Other gates are frozen. A trailing rotation makes x-homodyne sensitive
    to gates that are diagonal in x (cubic phase, Kerr acting on p-information).
    """
    frozen = (False, False)
    pre = [Sgate(_u(rng), _u(rng), 0, trainable=frozen), Dgate(_u(rng), _u(rng), 0, trainable=frozen)]
    if kind == "Beamsplitter":
        pre += [Sgate(_u(rng), _u(rng), 1, trainable=frozen), Dgate(_u(rng), _u(rng), 1, trainable=frozen)]
        gates = pre + [BSgate(_u(rng), _u(rng), (0, 1))]
        return Circuit(2, tuple(gates)), [0, 1]
    probe = {
        "Rotation": lambda: Rgate(_u(rng, np.pi), 0),
        "Displacement": lambda: Dgate(_u(rng), _u(rng), 0),
        "Squeezing": lambda: Sgate(_u(rng), _u(rng), 0, trainable=(True, True)),
        "CubicPhase": lambda: Vgate(_u(rng, 0.25), 0),
        "Kerr": lambda: Kgate(_u(rng), 0),
    }[kind]()
    tail = [Rgate(_u(rng, np.pi), 0, trainable=(False,))]
    c = Circuit(1, tuple(pre + [probe] + tail))
    return c, list(range(len(probe.params)))


# ------------------------------------------------------- gradient fidelity


@dataclass
class GradFidelity:
    kind: str
    rows: list[GradCheckRow] = field(default_factory=list)

    @property
    def max_err(self) -> float:
        return max(r.abs_err for r in self.rows)

    @property
    def tolerance(self) -> float:
        return self.rows[0].tolerance

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.rows)


GATE_KINDS = ("Rotation", "Displacement", "Squeezing", "Beamsplitter", "CubicPhase", "Kerr")


def gradient_fidelity(kind: str, n_circuits: int = 50, seed: int = 0, cutoff: int = 15,
                      sigma: float = 1.0) -> GradFidelity:
    rng = np.random.default_rng([seed, GATE_KINDS.index(kind)])
    spec = KernelSpec(sigma=sigma)
    cfg = FockConfig(cutoff=cutoff)
    out = GradFidelity(kind)
    for _ in range(n_circuits):
        circuit, _ = gate_probe_circuit(kind, rng)
        n = circuit.n_modes
        target = GaussianDensity(np.zeros(n), np.eye(n))
        out.rows += gradient_check(circuit, spec, target, GRADCHECK_SHIFTS, cfg)
    return out


# ------------------------------------------------------- backend agreement


def backend_crossval(n_circuits: int = 20, count: int = 10_000, cutoff: int = 30,
                     seed: int = 0) -> list[tuple[Circuit, list[float]]]:
    """Per-mode two-sample KS p-values between the Gaussian and Fock backends."""
    rng = np.random.default_rng(seed)
    cfg = FockConfig(cutoff=cutoff)
    out = []
    for i in range(n_circuits):
        n_modes = 1 + i % 3
        c = random_gaussian_circuit(rng, n_modes)
        g = sample(c, count, np.random.default_rng([seed, i, 0]), backend="gaussian")
        f = sample(c, count, np.random.default_rng([seed, i, 1]), backend="fock", fock_config=cfg)
        out.append((c, [float(stats.ks_2samp(g[:, k], f[:, k]).pvalue) for k in range(n_modes)]))
    return out


# ---------------------------------------------------------------- training


@dataclass
class RunResult:
    seed: int
    losses: list[float]
    params: np.ndarray
    circuit: Circuit
    seconds: float


def run_training(model: Circuit, data: np.ndarray, config: TrainConfig) -> RunResult:
    t0 = time.perf_counter()
    start = initialize(model, np.random.default_rng([config.seed, 1]))
    trained, log = train(start, data, config)
    return RunResult(config.seed, [e.loss for e in log], trained.get_params(), trained,
                     time.perf_counter() - t0)


def classical_gaussian(seed: int, iterations: int = 60, data_seed: int = 7) -> tuple[RunResult, float, float]:
    """Train S-D on N(0, 1); returns the run and the mean/std of 10^4 model samples."""
    data = np.random.default_rng(data_seed).standard_normal((10_000, 1))
    cfg = TrainConfig(seed=seed, max_iterations=iterations)
    res = run_training(sd_circuit(), data, cfg)
    x = sample(res.circuit, 10_000, np.random.default_rng([seed, 2]))
    return res, float(x.mean()), float(x.std())


def quantum_gaussian(seed: int, iterations: int = 25, data_seed: int = 11) -> RunResult:
    data = sample(QUANTUM_GAUSSIAN_TARGET, 10_000, np.random.default_rng(data_seed))
    cfg = TrainConfig(seed=seed, max_iterations=iterations)
    return run_training(sd_circuit(), data, cfg)


def noise_run(T: float | None, seed: int, iterations: int = 50, data_seed: int = 11) -> RunResult:
    """S-D model under a loss channel of transmissivity T (None = no channel)
    learning the noiseless quantum Gaussian target, at M=N=100, R=S=50."""
    data = sample(QUANTUM_GAUSSIAN_TARGET, 10_000, np.random.default_rng(data_seed))
    cfg = TrainConfig(seed=seed, max_iterations=iterations, m_model=100, n_data=100,
                      r_shift=50, s_shift=50, noise=None if T is None else (T,))
    return run_training(sd_circuit(), data, cfg)


def kernel_run(kind: str, seed: int, iterations: int = 30, data_seed: int = 13,
               cutoff: int = 15) -> tuple[RunResult, bool]:
    """Three-mode Gaussian model under one kernel; returns the run and whether
    its loss curve converged or plateaued."""
    data = sample(THREE_MODE_TARGET, 10_000, np.random.default_rng(data_seed))
    kernel = KernelSpec(kind=kind, cutoff=cutoff)
    cfg = TrainConfig(seed=seed, max_iterations=iterations, m_model=100, n_data=100,
                      r_shift=50, s_shift=50, kernel=kernel)
    res = run_training(three_mode_model(), data, cfg)
    return res, plateaued(res.losses, window=10)


def final_loss(losses, window: int = 5) -> float:
    return float(np.mean(losses[-window:]))
