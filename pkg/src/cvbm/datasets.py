"""Target distributions and the dataset CSV format."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit, sample
from .errors import FormatError
from .fock import FockConfig

TARGET_KINDS = ("ClassicalGaussian", "QuantumCircuit")


@dataclass(frozen=True)
class TargetSpec:
    kind: str = "ClassicalGaussian"
    mu: tuple[float, ...] = (0.0,)
    sigma: tuple[float, ...] = (1.0,)
    circuit: Circuit | None = None
    count: int = 10_000
    seed: int = 0
    fock: FockConfig = field(default_factory=FockConfig)

    def __post_init__(self):
        if self.kind not in TARGET_KINDS:
            raise ValueError(f"target kind must be one of {TARGET_KINDS}, got {self.kind!r}")
        if self.count < 1:
            raise ValueError("count must be >= 1")
        mu = tuple(float(v) for v in np.atleast_1d(self.mu))
        sigma = tuple(float(v) for v in np.atleast_1d(self.sigma))
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)
        if self.kind == "ClassicalGaussian":
            if len(mu) != len(sigma):
                raise ValueError("mu and sigma must have the same length")
            if any(not s > 0 for s in sigma):
                raise ValueError("sigma must be positive in every dimension")
        elif self.circuit is None:
            raise ValueError("QuantumCircuit target needs a circuit")

    @property
    def n_modes(self) -> int:
        return len(self.mu) if self.kind == "ClassicalGaussian" else self.circuit.n_modes


def generate(spec: TargetSpec) -> np.ndarray:
    """Draw ``spec.count`` target samples, shape (count, n).

    Quantum targets are sampled without any loss channel: target data is
    taken to be noiseless.
    """
    rng = np.random.default_rng(spec.seed)
    if spec.kind == "ClassicalGaussian":
        mu = np.asarray(spec.mu)
        return mu + np.asarray(spec.sigma) * rng.standard_normal((spec.count, mu.size))
    return sample(spec.circuit, spec.count, rng, noise=None, fock_config=spec.fock)


def save(path, matrix) -> None:
    m = np.asarray(matrix, dtype=float)
    m = m[:, None] if m.ndim == 1 else m
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"x{k}" for k in range(m.shape[1])])
            # repr gives the shortest string that round-trips the double exactly
            w.writerows([[repr(float(v)) for v in row] for row in m])
    except OSError as exc:
        raise OSError(f"cannot write dataset {path}: {exc}") from exc


def load(path) -> np.ndarray:
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise OSError(f"cannot read dataset {path}: {exc}") from exc
    if not rows:
        raise FormatError(f"{path}: empty file, expected a header row")
    n = len(rows[0])
    if n == 0:
        raise FormatError(f"{path}: empty header")
    out = np.empty((len(rows) - 1, n))
    for i, row in enumerate(rows[1:]):
        if len(row) != n:
            raise FormatError(f"{path}: line {i + 2} has {len(row)} fields, expected {n}")
        try:
            out[i] = [float(v) for v in row]
        except ValueError as exc:
            raise FormatError(f"{path}: line {i + 2}: {exc}") from exc
    return out
