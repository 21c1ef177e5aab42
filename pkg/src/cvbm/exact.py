"""Exact-density MMD, used only to verify gradient rules without sampling noise.

Model distributions are represented exactly: Gaussian circuits by their
x-quadrature mean and covariance, single-mode Fock circuits by their homodyne
density on a fixed grid. Expectations of the RBF kernel are then closed form
(Gaussian x Gaussian) or quadrature sums.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import Circuit, ShiftConfig, run, shift_rule
from .fock import FockConfig, position_density, quadrature_moments
from .gaussian import GaussianState
from .kernels import KernelSpec

FD_STEP = 1e-5
GAUSSIAN_TOL = 1e-4


def nongaussian_tol(t: float) -> float:
    return max(1e-3, 10.0 * t * t)


@dataclass(frozen=True, eq=False)
class GaussianDensity:
    mean: np.ndarray
    cov: np.ndarray


@dataclass(frozen=True, eq=False)
class GridDensity:
    """Point masses on a uniform one-dimensional grid."""

    grid: np.ndarray
    weights: np.ndarray


def _rbf_gauss(sigma: float, d: np.ndarray, c: np.ndarray) -> np.ndarray:
    """E exp(-|x - y|^2 / 2 sigma^2) for x - y ~ N(d, c); d may be batched (..., n)."""
    n = c.shape[0]
    a = sigma**2 * np.eye(n) + c
    pref = np.linalg.det(np.eye(n) + c / sigma**2) ** -0.5
    sol = np.linalg.solve(a, np.moveaxis(np.atleast_2d(d), -1, 0))
    quad = np.sum(np.moveaxis(np.atleast_2d(d), -1, 0) * sol, axis=0)
    return pref * np.exp(-0.5 * quad)


def cross_expectation(spec: KernelSpec, p, q) -> float:
    """E_{x~p, y~q} k(x, y) for the RBF kernel."""
    if spec.kind != "GaussianRBF" or spec.sigma is None:
        raise ValueError("exact densities support the RBF kernel with a fixed sigma")
    s = spec.sigma
    if isinstance(p, GaussianDensity) and isinstance(q, GaussianDensity):
        return float(_rbf_gauss(s, p.mean - q.mean, p.cov + q.cov)[0])
    if isinstance(p, GridDensity) and isinstance(q, GridDensity):
        k = np.exp(-((p.grid[:, None] - q.grid[None, :]) ** 2) / (2 * s * s))
        return float(p.weights @ k @ q.weights)
    if isinstance(p, GaussianDensity):
        p, q = q, p
    if q.mean.size != 1:
        raise ValueError("grid densities are single-mode")
    inner = _rbf_gauss(s, (p.grid - q.mean[0])[:, None], q.cov)
    return float(p.weights @ inner)


def exact_loss(spec: KernelSpec, p, q) -> float:
    return (cross_expectation(spec, p, p) - 2.0 * cross_expectation(spec, p, q)
            + cross_expectation(spec, q, q))


def fixed_grid(circuit: Circuit, fock_config: FockConfig, points: int = 2048,
               width: float = 10.0) -> np.ndarray:
    """A grid wide enough for the circuit and its small perturbations."""
    state, _ = run(circuit, "fock", fock_config)
    mean, var = quadrature_moments(state, 0)
    half = width * np.sqrt(max(var, 1e-6)) + abs(mean) + 2.0
    return np.linspace(-half, half, points)


def density_of(circuit: Circuit, fock_config: FockConfig | None = None,
               grid: np.ndarray | None = None):
    """Exact x-quadrature distribution of the circuit's output."""
    if circuit.is_gaussian:
        state, _ = run(circuit, "gaussian", fock_config)
        assert isinstance(state, GaussianState)
        mu, cov = state.x_block()
        return GaussianDensity(mu.copy(), cov.copy())
    if circuit.n_modes != 1:
        raise ValueError("exact non-Gaussian densities are implemented for one mode")
    cfg = fock_config or FockConfig()
    if grid is None:
        grid = fixed_grid(circuit, cfg)
    state, _ = run(circuit, "fock", cfg)
    dens = position_density(state, 0, grid)
    w = dens * (grid[1] - grid[0])
    return GridDensity(grid, w / w.sum())


def exact_shift_gradient(circuit: Circuit, k: int, spec: KernelSpec, target,
                         shifts: ShiftConfig = ShiftConfig(),
                         fock_config: FockConfig | None = None,
                         grid: np.ndarray | None = None) -> float:
    """The shift-rule gradient with every expectation taken exactly."""
    h, scale = shift_rule(circuit, k, shifts)
    theta = circuit.get_params()[k]
    p = density_of(circuit, fock_config, grid)
    plus = density_of(circuit.with_param(k, theta + h), fock_config, grid)
    minus = density_of(circuit.with_param(k, theta - h), fock_config, grid)
    g = (cross_expectation(spec, plus, p) - cross_expectation(spec, minus, p)
         - cross_expectation(spec, plus, target) + cross_expectation(spec, minus, target))
    return scale * g


def fd_gradient(circuit: Circuit, k: int, spec: KernelSpec, target,
                fock_config: FockConfig | None = None, grid: np.ndarray | None = None,
                step: float = FD_STEP) -> float:
    theta = circuit.get_params()[k]
    up = exact_loss(spec, density_of(circuit.with_param(k, theta + step), fock_config, grid), target)
    down = exact_loss(spec, density_of(circuit.with_param(k, theta - step), fock_config, grid), target)
    return (up - down) / (2 * step)


@dataclass(frozen=True)
class GradCheckRow:
    param: str
    shift_grad: float
    fd_grad: float
    abs_err: float
    tolerance: float

    @property
    def ok(self) -> bool:
        return self.abs_err < self.tolerance


def gradient_check(circuit: Circuit, spec: KernelSpec, target,
                   shifts: ShiftConfig = ShiftConfig(),
                   fock_config: FockConfig | None = None,
                   reference_t: float = 0.01) -> list[GradCheckRow]:
    """Compare shift-rule and finite-difference gradients for every parameter.

    Gaussian-gate parameters must agree within 1e-4; non-Gaussian ones within
    the tolerance of the reference shift ``reference_t``, so a large configured
    shift shows up as a failure rather than loosening the bar.
    """
    cfg = fock_config or FockConfig()
    grid = None if circuit.is_gaussian else fixed_grid(circuit, cfg)
    rows = []
    for k, (name, (gi, _)) in enumerate(zip(circuit.param_names(), circuit.param_slots())):
        sg = exact_shift_gradient(circuit, k, spec, target, shifts, cfg, grid)
        fd = fd_gradient(circuit, k, spec, target, cfg, grid)
        tol = GAUSSIAN_TOL if circuit.gates[gi].is_gaussian else nongaussian_tol(reference_t)
        rows.append(GradCheckRow(name, sg, fd, abs(sg - fd), tol))
    return rows
