"""Phase-space simulation of Gaussian circuits.

Quadratures are ordered (x_1..x_n, p_1..p_n) everywhere. A gate acts as
mean <- M mean + d and cov <- M cov M^T, where M is the Heisenberg-picture
symplectic matrix of the gate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CorruptedState, NonGaussianGate
from .gates import Gate, Rgate


@dataclass(frozen=True, eq=False)
class GaussianState:
    mean: np.ndarray
    cov: np.ndarray
    n_modes: int
    hbar: float = 2.0

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float).reshape(-1)
        cov = np.array(self.cov, dtype=float)
        if mean.shape != (2 * self.n_modes,) or cov.shape != (2 * self.n_modes,) * 2:
            raise ValueError("mean/cov shapes inconsistent with n_modes")
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    def x_block(self) -> tuple[np.ndarray, np.ndarray]:
        n = self.n_modes
        return self.mean[:n], self.cov[:n, :n]

    def check_physical(self, tol: float = 1e-9) -> None:
        """Raise if the covariance is asymmetric, not positive definite, or
        violates the uncertainty relation cov + i(hbar/2) Omega >= 0."""
        c = self.cov
        if np.max(np.abs(c - c.T)) > 1e-10:
            raise CorruptedState("covariance not symmetric")
        if np.linalg.eigvalsh(c).min() <= 0:
            raise CorruptedState("covariance not positive definite")
        ev = np.linalg.eigvalsh(c + 0.5j * self.hbar * symplectic_form(self.n_modes))
        if ev.min() < -tol:
            raise CorruptedState(f"uncertainty relation violated (min eigenvalue {ev.min():.3g})")


@dataclass(frozen=True)
class LossChannel:
    transmissivity: float
    mode: int

    def __post_init__(self):
        if not 0.0 <= self.transmissivity <= 1.0:
            raise ValueError(f"transmissivity must lie in [0, 1], got {self.transmissivity}")


def symplectic_form(n_modes: int) -> np.ndarray:
    z = np.zeros((n_modes, n_modes))
    i = np.eye(n_modes)
    return np.block([[z, i], [-i, z]])


def vacuum(n_modes: int, hbar: float = 2.0) -> GaussianState:
    if n_modes < 1:
        raise ValueError("need at least one mode")
    return GaussianState(np.zeros(2 * n_modes), hbar / 2 * np.eye(2 * n_modes), n_modes, hbar)


def _local(n: int, mode: int, block: np.ndarray) -> np.ndarray:
    m = np.eye(2 * n)
    idx = [mode, mode + n]
    m[np.ix_(idx, idx)] = block
    return m


def symplectic_action(gate: Gate, n_modes: int, hbar: float = 2.0) -> tuple[np.ndarray, np.ndarray]:
    """(M, d) for one gate on an n-mode register."""
    if not gate.is_gaussian:
        raise NonGaussianGate(f"{gate.kind} has no symplectic representation")
    n = n_modes
    d = np.zeros(2 * n)
    if gate.kind == "Rotation":
        (phi,) = gate.params
        c, s = np.cos(phi), np.sin(phi)
        return _local(n, gate.modes[0], np.array([[c, -s], [s, c]])), d
    if gate.kind == "Displacement":
        re, im = gate.params
        k = gate.modes[0]
        d[k] = np.sqrt(2 * hbar) * re
        d[k + n] = np.sqrt(2 * hbar) * im
        return np.eye(2 * n), d
    if gate.kind == "Squeezing":
        r, phi = gate.params
        ch, sh = np.cosh(r), np.sinh(r)
        c, s = np.cos(phi), np.sin(phi)
        blk = np.array([[ch - sh * c, -sh * s], [-sh * s, ch + sh * c]])
        return _local(n, gate.modes[0], blk), d
    if gate.kind == "Beamsplitter":
        theta, phi = gate.params
        i, j = gate.modes
        ct, st = np.cos(theta), np.sin(theta)
        cp, sp = np.cos(phi), np.sin(phi)
        m = np.eye(2 * n)
        xi, pi, xj, pj = i, i + n, j, j + n
        rows = [xi, xj, pi, pj]
        blk = np.zeros((4, 4))
        # a -> cos a + e^{i phi} sin b ;  b -> cos b - e^{-i phi} sin a
        blk[0] = [ct, st * cp, 0.0, -st * sp]
        blk[1] = [-st * cp, ct, -st * sp, 0.0]
        blk[2] = [0.0, st * sp, ct, st * cp]
        blk[3] = [st * sp, 0.0, -st * cp, ct]
        m[np.ix_(rows, rows)] = blk
        return m, d
    raise NonGaussianGate(gate.kind)


def apply_symplectic(state: GaussianState, gate: Gate, modes=None) -> GaussianState:
    if modes is not None and tuple(modes) != gate.modes:
        gate = gate.on(*modes)
    if len(set(gate.modes)) != len(gate.modes):
        raise ValueError("mode indices must be distinct")
    for m in gate.modes:
        if not 0 <= m < state.n_modes:
            raise IndexError(f"mode {m} out of range for {state.n_modes}-mode state")
    mat, d = symplectic_action(gate, state.n_modes, state.hbar)
    return GaussianState(mat @ state.mean + d, mat @ state.cov @ mat.T, state.n_modes, state.hbar)


def apply_loss(state: GaussianState, channel: LossChannel) -> GaussianState:
    t = channel.transmissivity
    if t == 1.0:
        return state
    n = state.n_modes
    k = channel.mode
    if not 0 <= k < n:
        raise IndexError(f"mode {k} out of range")
    scale = np.ones(2 * n)
    scale[[k, k + n]] = np.sqrt(t)
    mean = scale * state.mean
    cov = scale[:, None] * state.cov * scale[None, :]
    cov[[k, k + n], [k, k + n]] += (1 - t) * state.hbar / 2
    return GaussianState(mean, cov, n, state.hbar)


def homodyne_sample(state: GaussianState, rng: np.random.Generator, count: int) -> np.ndarray:
    """Joint x-quadrature samples, shape (count, n_modes)."""
    if count < 1:
        raise ValueError("count must be >= 1")
    mu, cov = state.x_block()
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise CorruptedState("x-block of covariance is not positive definite") from exc
    z = rng.standard_normal((count, state.n_modes))
    return mu + z @ chol.T


def homodyne_sample_angle(state: GaussianState, rng: np.random.Generator, count: int,
                          phis) -> np.ndarray:
    """Homodyne at per-mode angles, by rotating each mode by -phi and reading x."""
    for k, phi in enumerate(np.broadcast_to(np.asarray(phis, dtype=float), (state.n_modes,))):
        if phi != 0.0:
            state = apply_symplectic(state, Rgate(-phi, k))
    return homodyne_sample(state, rng, count)
