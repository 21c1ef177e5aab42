"""Unbiased MMD estimator and its parameter-shift gradient from circuit samples."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import Circuit, ShiftConfig, sample, shifted_circuits
from .errors import InsufficientSamples
from .fock import FockConfig
from .gaussian import LossChannel
from .kernels import KernelSpec, gram


@dataclass(frozen=True)
class MmdEstimate:
    value: float
    m: int
    n: int

    def __post_init__(self):
        if self.m < 2 or self.n < 2:
            raise InsufficientSamples(f"unbiased MMD needs m, n >= 2 (got {self.m}, {self.n})")


@dataclass(frozen=True)
class ShiftMeta:
    shift: float
    scale: float
    r: int
    s: int


@dataclass(frozen=True)
class GradientEstimate:
    values: np.ndarray
    shift_meta: tuple[ShiftMeta, ...]

    def __post_init__(self):
        if len(self.values) != len(self.shift_meta):
            raise ValueError("one shift record per gradient component")


_TILE = 2048


def _kernel_sum(spec: KernelSpec, A: np.ndarray, B: np.ndarray, drop_diagonal: bool = False) -> float:
    """Sum of k(a_i, b_j) over all pairs, built from row tiles so memory stays
    O(tile * len(B)). With ``drop_diagonal`` (A is B) the i = j terms are left out."""
    total = 0.0
    for start in range(0, A.shape[0], _TILE):
        k = gram(spec, A[start:start + _TILE], B)
        total += float(k.sum())
        if drop_diagonal:
            rows = np.arange(k.shape[0])
            total -= float(k[rows, start + rows].sum())
    return total


def mmd(spec: KernelSpec, X, Y) -> MmdEstimate:
    """Unbiased squared MMD; the i = j terms of the within-sample sums are dropped."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    X = X[:, None] if X.ndim == 1 else X
    Y = Y[:, None] if Y.ndim == 1 else Y
    m, n = X.shape[0], Y.shape[0]
    if m < 2 or n < 2:
        raise InsufficientSamples(f"unbiased MMD needs m, n >= 2 (got {m}, {n})")
    value = (_kernel_sum(spec, X, X, True) / (m * (m - 1))
             + _kernel_sum(spec, Y, Y, True) / (n * (n - 1))
             - 2.0 * _kernel_sum(spec, X, Y) / (m * n))
    return MmdEstimate(value, m, n)


def four_term(spec: KernelSpec, a, b, X, Y) -> float:
    """Mean k(a, x) - mean k(b, x) - mean k(a, y) + mean k(b, y)."""
    return float(gram(spec, a, X).mean() - gram(spec, b, X).mean()
                 - gram(spec, a, Y).mean() + gram(spec, b, Y).mean())


def gradient_component(circuit: Circuit, k: int, spec: KernelSpec, X_model, Y_data,
                       r: int, s: int, rng: np.random.Generator,
                       noise: list[LossChannel] | None = None,
                       shifts: ShiftConfig = ShiftConfig(),
                       fock_config: FockConfig | None = None) -> tuple[float, ShiftMeta]:
    if r < 1 or s < 1:
        raise ValueError("shifted sample counts must be >= 1")
    plus, minus, scale = shifted_circuits(circuit, k, shifts)
    a = sample(plus, r, rng, noise, fock_config=fock_config)
    b = sample(minus, s, rng, noise, fock_config=fock_config)
    h = plus.get_params()[k] - circuit.get_params()[k]
    return scale * four_term(spec, a, b, X_model, Y_data), ShiftMeta(float(h), scale, r, s)


def mmd_gradient(circuit: Circuit, spec: KernelSpec, X_model, Y_data, r: int, s: int,
                 rng: np.random.Generator, noise: list[LossChannel] | None = None,
                 shifts: ShiftConfig = ShiftConfig(), indices=None,
                 fock_config: FockConfig | None = None) -> GradientEstimate:
    """Shift-rule estimate of dL/dtheta_k for each trainable parameter.

    Each component gets its own child generator, spawned in parameter order,
    so results do not depend on evaluation order.
    """
    n_params = circuit.n_params
    indices = list(range(n_params)) if indices is None else list(indices)
    for k in indices:
        if not 0 <= k < n_params:
            raise IndexError(f"parameter index {k} out of range (0..{n_params - 1})")
    children = rng.spawn(n_params)
    values = np.zeros(n_params)
    meta = [ShiftMeta(0.0, 0.0, 0, 0)] * n_params
    for k in indices:
        values[k], meta[k] = gradient_component(circuit, k, spec, X_model, Y_data, r, s,
                                                children[k], noise, shifts, fock_config)
    return GradientEstimate(values, tuple(meta))
