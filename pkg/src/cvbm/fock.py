"""Truncated Fock-space simulation.

Gate matrices are the top-left ``cutoff x cutoff`` block of the exact
(infinite-dimensional) operator, so probability that a gate pushes above the
cutoff is lost rather than folded back. That loss is what ``norm_floor``
polices.

* Rotation and Kerr are diagonal and built directly.
* Displacement and squeezing use exact matrix-element recurrences.
* The beamsplitter conserves total photon number, so it is exponentiated
  exactly inside each photon-number sector and then cropped.
* The cubic phase gate is diagonal in position, so its matrix elements are
  overlap integrals of Hermite functions against the phase, done by quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import factorial

import numpy as np
from scipy.linalg import expm
from scipy.special import gammaln

from .errors import TruncationLeakage
from .gates import GATE_PARAMS, Gate

# Generator coefficient of the cubic phase gate: V(g) = exp(i * g * c * x^3).
# "hbar" uses c = 1/(3 hbar); "sixth" uses c = 1/6. They coincide at hbar = 2.
CUBIC_CONVENTIONS = ("hbar", "sixth")


@dataclass(frozen=True)
class FockConfig:
    cutoff: int = 7
    hbar: float = 2.0
    norm_floor: float = 0.99
    cubic_convention: str = "hbar"

    def __post_init__(self):
        if int(self.cutoff) != self.cutoff or self.cutoff < 2:
            raise ValueError(f"cutoff must be an integer >= 2, got {self.cutoff}")
        if not self.hbar > 0:
            raise ValueError("hbar must be positive")
        if not 0 < self.norm_floor <= 1:
            raise ValueError(f"norm_floor must lie in (0, 1], got {self.norm_floor}")
        if self.cubic_convention not in CUBIC_CONVENTIONS:
            raise ValueError(f"cubic_convention must be one of {CUBIC_CONVENTIONS}")


@dataclass(frozen=True)
class FockOperator:
    matrix: np.ndarray
    arity: int
    is_unitary_within: float

    def __post_init__(self):
        d = self.matrix.shape[0]
        if self.matrix.ndim != 2 or self.matrix.shape[1] != d:
            raise ValueError("operator matrix must be square")
        root = round(d ** (1.0 / self.arity))
        if root**self.arity != d:
            raise ValueError(f"matrix size {d} inconsistent with arity {self.arity}")


@dataclass(frozen=True, eq=False)
class FockState:
    amplitudes: np.ndarray
    n_modes: int
    config: FockConfig

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        d = self.config.cutoff
        if amps.size != d**self.n_modes:
            raise ValueError(f"expected {d}**{self.n_modes} amplitudes, got {amps.size}")
        amps = amps.reshape((d,) * self.n_modes)
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def cutoff(self) -> int:
        return self.config.cutoff

    @property
    def norm2(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def normalized(self) -> "FockState":
        return FockState(self.amplitudes / np.sqrt(self.norm2), self.n_modes, self.config)


def unitarity_deviation(matrix: np.ndarray, block: int | None = None) -> float:
    """max |M^dag M - I| over the leading ``block`` levels (all levels if None)."""
    g = matrix.conj().T @ matrix
    if block is not None:
        g = g[:block, :block]
    return float(np.max(np.abs(g - np.eye(g.shape[0]))))


def vacuum_state(n_modes: int, config: FockConfig = FockConfig()) -> FockState:
    amps = np.zeros((config.cutoff,) * n_modes, dtype=complex)
    amps[(0,) * n_modes] = 1.0
    return FockState(amps, n_modes, config)


def fock_basis_state(levels, config: FockConfig = FockConfig()) -> FockState:
    levels = tuple(levels)
    amps = np.zeros((config.cutoff,) * len(levels), dtype=complex)
    amps[levels] = 1.0
    return FockState(amps, len(levels), config)


def _annihilation(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1)


def ladder_operators(config: FockConfig) -> tuple[FockOperator, FockOperator]:
    a = _annihilation(config.cutoff).astype(complex)
    adag = a.conj().T
    return (FockOperator(a, 1, unitarity_deviation(a)),
            FockOperator(adag, 1, unitarity_deviation(adag)))


def quadrature_x(dim: int, hbar: float = 2.0) -> np.ndarray:
    a = _annihilation(dim)
    return np.sqrt(hbar / 2) * (a + a.T)


def quadrature_p(dim: int, hbar: float = 2.0) -> np.ndarray:
    a = _annihilation(dim)
    return -1j * np.sqrt(hbar / 2) * (a - a.T)


def displacement_matrix(alpha: complex, dim: int) -> np.ndarray:
    """<m|D(alpha)|n> for m, n < dim, by the column recurrence
    D|n> = (a^dag - alpha*) D|n-1> / sqrt(n)."""
    out = np.zeros((dim, dim), dtype=complex)
    m = np.arange(dim)
    sq = np.sqrt(m)
    if alpha == 0:
        return np.eye(dim, dtype=complex)
    # log-space first column avoids overflow in alpha**m / sqrt(m!)
    logcol = -abs(alpha) ** 2 / 2 + m * np.log(abs(alpha)) - 0.5 * gammaln(m + 1)
    out[:, 0] = np.exp(logcol) * np.exp(1j * m * np.angle(alpha))
    for n in range(1, dim):
        col = -np.conj(alpha) * out[:, n - 1]
        col[1:] += sq[1:] * out[:-1, n - 1]
        out[:, n] = col / np.sqrt(n)
    return out


def squeezing_matrix(r: float, phi: float, dim: int) -> np.ndarray:
    """<m|S(r e^{i phi})|n> for m, n < dim.

    S|n> = [sech(r) a^dag S|n-1> + e^{-i phi} tanh(r) sqrt(n-1) S|n-2>] / sqrt(n)
    """
    out = np.zeros((dim, dim), dtype=complex)
    sech = 1.0 / np.cosh(r)
    th = np.tanh(r)
    eph = np.exp(1j * phi)
    k = np.arange(0, dim, 2) // 2
    logmag = 0.5 * gammaln(2 * k + 1) - k * np.log(2.0) - gammaln(k + 1)
    out[0::2, 0] = np.sqrt(sech) * np.exp(logmag) * (-eph * th) ** k
    sq = np.sqrt(np.arange(dim))
    for n in range(1, dim):
        col = np.zeros(dim, dtype=complex)
        col[1:] = sech * sq[1:] * out[:-1, n - 1]
        if n >= 2:
            col += np.conj(eph) * th * np.sqrt(n - 1) * out[:, n - 2]
        out[:, n] = col / np.sqrt(n)
    return out


def cubic_coefficient(hbar: float, convention: str = "hbar") -> float:
    if convention == "hbar":
        return 1.0 / (3.0 * hbar)
    if convention == "sixth":
        return 1.0 / 6.0
    raise ValueError(f"unknown cubic convention {convention!r}")


def _cubic_grid(dim: int, hbar: float, rate: float) -> np.ndarray:
    # Hermite functions below dim are negligible beyond the turning point + 10
    half = np.sqrt(hbar) * (np.sqrt(2.0 * dim + 1.0) + 10.0)
    # resolve the phase oscillation inside the classically allowed region
    inner = np.sqrt(hbar) * (np.sqrt(2.0 * dim + 1.0) + 3.0)
    dx = min(0.01, 0.25 / max(3.0 * rate * inner**2, 1e-12))
    return np.linspace(-half, half, int(np.ceil(2 * half / dx)) + 1)


def _cubic_elements(gamma: float, config: FockConfig, columns: int) -> np.ndarray:
    """<m|V(gamma)|n> for m < cutoff, n < columns, by quadrature in the
    position basis where V is the phase exp(i gamma c x^3)."""
    rate = abs(gamma) * cubic_coefficient(config.hbar, config.cubic_convention)
    x = _cubic_grid(config.cutoff, config.hbar, rate)
    h = hermite_functions(config.cutoff, x, config.hbar)
    phase = np.exp(1j * gamma * cubic_coefficient(config.hbar, config.cubic_convention) * x**3)
    return (h * (phase * (x[1] - x[0]))) @ h[:columns].T


def cubic_phase_matrix(gamma: float, config: FockConfig) -> np.ndarray:
    return _cubic_elements(gamma, config, config.cutoff)


def cubic_phase_vacuum(gamma, config: FockConfig) -> np.ndarray:
    """V(gamma)|0> truncated to the cutoff. Vectorized: an array of gammas
    gives one row per gamma, shape (len(gamma), cutoff)."""
    gammas = np.atleast_1d(np.asarray(gamma, dtype=float))
    c = cubic_coefficient(config.hbar, config.cubic_convention)
    # the vacuum envelope damps the integrand, so a shorter, coarser grid suffices
    half = np.sqrt(config.hbar) * (np.sqrt(2.0 * config.cutoff + 1.0) + 4.0)
    rate = c * float(np.max(np.abs(gammas), initial=0.0))
    dx = min(0.01, 1.0 / max(3.0 * rate * (0.75 * half) ** 2, 1e-12))
    x = np.linspace(-half, half, int(np.ceil(2 * half / dx)) + 1)
    h = hermite_functions(config.cutoff, x, config.hbar)
    weighted = h * (h[0] * (x[1] - x[0]))
    out = np.empty((gammas.size, config.cutoff), dtype=complex)
    cube = c * x**3
    for start in range(0, gammas.size, 256):
        g = gammas[start:start + 256]
        out[start:start + 256] = np.exp(1j * np.outer(g, cube)) @ weighted.T
    return out[0] if np.ndim(gamma) == 0 else out


def squeezed_vacuum(r, phi: float = 0.0, dim: int = 7) -> np.ndarray:
    """S(r e^{i phi})|0> truncated to ``dim`` levels, closed form. Vectorized in r."""
    rs = np.atleast_1d(np.asarray(r, dtype=float))
    out = np.zeros((rs.size, dim), dtype=complex)
    k = np.arange(0, dim, 2) // 2
    logmag = 0.5 * gammaln(2 * k + 1) - k * np.log(2.0) - gammaln(k + 1)
    ratio = -np.exp(1j * phi) * np.tanh(rs)
    out[:, 0::2] = (np.sqrt(1.0 / np.cosh(rs))[:, None] * np.exp(logmag)[None, :]
                    * ratio[:, None] ** k[None, :])
    return out[0] if np.ndim(r) == 0 else out


def beamsplitter_matrix(theta: float, phi: float, dim: int) -> np.ndarray:
    """D^2 x D^2 block of exp[theta (e^{i phi} a^dag b - e^{-i phi} a b^dag)],
    index n_a * dim + n_b."""
    out = np.zeros((dim * dim, dim * dim), dtype=complex)
    e = np.exp(1j * phi)
    for total in range(2 * dim - 1):
        k = np.arange(total + 1)
        gen = np.zeros((total + 1, total + 1), dtype=complex)
        up = np.sqrt((k[:-1] + 1) * (total - k[:-1]))
        gen[k[1:], k[:-1]] = theta * e * up
        gen[k[:-1], k[1:]] = -theta * np.conj(e) * up
        block = expm(gen)
        keep = k[(k < dim) & (total - k < dim)]
        flat = keep * dim + (total - keep)
        out[np.ix_(flat, flat)] = block[np.ix_(keep, keep)]
    return out


@lru_cache(maxsize=4096)
def _gate_matrix(kind: str, params: tuple[float, ...], config: FockConfig) -> np.ndarray:
    d = config.cutoff
    n = np.arange(d)
    if kind == "Rotation":
        m = np.diag(np.exp(1j * params[0] * n))
    elif kind == "Kerr":
        m = np.diag(np.exp(1j * params[0] * n.astype(float) ** 2))
    elif kind == "Displacement":
        m = displacement_matrix(complex(params[0], params[1]), d)
    elif kind == "Squeezing":
        m = squeezing_matrix(params[0], params[1], d)
    elif kind == "Beamsplitter":
        m = beamsplitter_matrix(params[0], params[1], d)
    elif kind == "CubicPhase":
        m = cubic_phase_matrix(params[0], config)
    else:
        raise ValueError(f"unknown gate kind {kind!r}")
    m.setflags(write=False)
    return m


def gate_unitary(gate: Gate, config: FockConfig) -> FockOperator:
    if gate.kind not in GATE_PARAMS:
        raise ValueError(f"unknown gate kind {gate.kind!r}")
    if config.cutoff < 2:
        raise ValueError("cutoff must be >= 2")
    m = _gate_matrix(gate.kind, gate.params, config)
    return FockOperator(m, len(gate.modes), unitarity_deviation(m))


def apply_operator(state: FockState, matrix: np.ndarray, modes) -> np.ndarray:
    """Contract a one- or two-mode matrix into the amplitude tensor; returns raw amplitudes."""
    d = state.cutoff
    psi = state.amplitudes
    modes = tuple(modes)
    if len(modes) == 1:
        out = np.tensordot(matrix, psi, axes=([1], [modes[0]]))
        return np.moveaxis(out, 0, modes[0])
    u = matrix.reshape(d, d, d, d)
    out = np.tensordot(u, psi, axes=([2, 3], list(modes)))
    return np.moveaxis(out, [0, 1], list(modes))


def _check_modes(modes, n_modes: int, arity: int):
    if len(modes) != arity:
        raise ValueError(f"gate acts on {arity} mode(s), got {len(modes)} indices")
    if len(set(modes)) != len(modes):
        raise ValueError(f"mode indices must be distinct, got {modes}")
    for m in modes:
        if not 0 <= m < n_modes:
            raise IndexError(f"mode {m} out of range for {n_modes}-mode state")


def apply_gate(state: FockState, gate: Gate, modes=None) -> FockState:
    modes = tuple(gate.modes if modes is None else modes)
    _check_modes(modes, state.n_modes, len(gate.modes))
    op = gate_unitary(gate, state.config)
    new = FockState(apply_operator(state, op.matrix, modes), state.n_modes, state.config)
    norm2 = new.norm2
    if norm2 < state.config.norm_floor:
        raise TruncationLeakage(norm2, state.config.norm_floor, f"{gate.kind} on modes {modes}")
    return new


def overlap(a: FockState, b: FockState) -> complex:
    """<a|b>, conjugate-linear in ``a``."""
    if a.n_modes != b.n_modes or a.cutoff != b.cutoff:
        raise ValueError("states differ in mode count or cutoff")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def hermite_functions(n_max: int, x: np.ndarray, hbar: float = 2.0) -> np.ndarray:
    """Orthonormal Hermite functions <x|n> for n < n_max, shape (n_max, len(x)).

    Uses the three-term recurrence on the functions themselves so nothing
    overflows at large n.
    """
    x = np.asarray(x, dtype=float)
    u = x / np.sqrt(hbar)
    h = np.empty((n_max,) + x.shape)
    h[0] = (np.pi * hbar) ** -0.25 * np.exp(-(u**2) / 2)
    if n_max > 1:
        h[1] = np.sqrt(2.0) * u * h[0]
    for n in range(1, n_max - 1):
        h[n + 1] = np.sqrt(2.0 / (n + 1)) * u * h[n] - np.sqrt(n / (n + 1)) * h[n - 1]
    return h


def reduced_density_matrix(state: FockState, mode: int) -> np.ndarray:
    psi = np.moveaxis(state.amplitudes, mode, 0).reshape(state.cutoff, -1)
    return psi @ psi.conj().T


def position_density(state: FockState, mode: int, grid) -> np.ndarray:
    """Homodyne (x-quadrature) density of one mode on ``grid``; other modes traced out.

    Integrates to the state's squared norm, not to one.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("empty grid")
    if not 0 <= mode < state.n_modes:
        raise IndexError(f"mode {mode} out of range")
    h = hermite_functions(state.cutoff, grid, state.config.hbar)
    psi = np.moveaxis(state.amplitudes, mode, 0).reshape(state.cutoff, -1)
    amp = h.T @ psi
    return np.sum(amp.real**2 + amp.imag**2, axis=1)


# alias kept for callers that name the operation by the wavefunction
position_wavefunction = position_density


def quadrature_moments(state: FockState, mode: int) -> tuple[float, float]:
    """(<x>, Var x) of one mode, normalized by the state's squared norm."""
    rho = reduced_density_matrix(state, mode)
    x = quadrature_x(state.cutoff, state.config.hbar)
    tr = np.trace(rho).real
    m1 = np.trace(rho @ x).real / tr
    m2 = np.trace(rho @ x @ x).real / tr
    return float(m1), float(max(m2 - m1 * m1, 0.0))


def loss_kraus(transmissivity: float, dim: int) -> list[np.ndarray]:
    """Kraus operators of the pure-loss channel on ``dim`` levels.

    <m|E_n|m+n> = sqrt(C(m+n, n)) (1-T)^{n/2} T^{m/2}; written out elementwise
    so T = 0 is well defined.
    """
    t = float(transmissivity)
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"transmissivity must lie in [0, 1], got {t}")
    ops = []
    for n in range(dim):
        e = np.zeros((dim, dim))
        for m in range(dim - n):
            binom = factorial(m + n) / (factorial(m) * factorial(n))
            e[m, m + n] = np.sqrt(binom) * (1 - t) ** (n / 2) * t ** (m / 2)
        ops.append(e)
    return ops


def apply_kraus_density(rho: np.ndarray, kraus: list[np.ndarray]) -> np.ndarray:
    return sum(k @ rho @ k.conj().T for k in kraus)


def loss_branches(state: FockState, transmissivity: float, mode: int):
    """Unravel the loss channel into (probability, normalized pure state) branches.

    Sampling a branch with its probability and then sampling the branch state
    reproduces homodyne statistics of the mixed output exactly.
    """
    base = state.norm2
    out = []
    for e in loss_kraus(transmissivity, state.cutoff):
        amps = apply_operator(state, e, (mode,))
        w = float(np.vdot(amps, amps).real)
        if w > 1e-15 * base:
            out.append((w / base, FockState(amps / np.sqrt(w), state.n_modes, state.config)))
    return out
