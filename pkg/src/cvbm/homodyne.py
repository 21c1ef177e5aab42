"""Homodyne sampling of truncated Fock states by gridded inverse CDF.

Multi-mode states are sampled mode by mode. After drawing x for one mode,
that mode is projected onto a narrow Gaussian wavepacket centred on the
outcome (one grid cell wide), a stand-in for the improper |x><x|. The
remaining modes are then sampled from the conditional state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridMassDeficit, TruncationLeakage
from .fock import FockState, hermite_functions, quadrature_moments

MASS_TOL = 1e-3
_CHUNK = 512
_PROJ_HALFWIDTH = 8  # grid cells either side of the outcome kept in the projector


@dataclass(frozen=True)
class GridSpec:
    x_max: float
    points: int = 4096

    def __post_init__(self):
        if not self.x_max > 0:
            raise ValueError("x_max must be positive")
        if self.points < 256:
            raise ValueError("grid needs at least 256 points")

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(-self.x_max, self.x_max, self.points)


def default_grid(state: FockState, mode: int, points: int = 4096) -> GridSpec:
    mean, var = quadrature_moments(state, mode)
    return GridSpec(6.0 * np.sqrt(var) + abs(mean), points)


def _cdf(density: np.ndarray, dx: float) -> np.ndarray:
    """Cumulative trapezoid along the last axis, starting at 0."""
    inc = 0.5 * (density[..., 1:] + density[..., :-1]) * dx
    return np.concatenate([np.zeros(density.shape[:-1] + (1,)), np.cumsum(inc, axis=-1)], axis=-1)


def _invert(cdf: np.ndarray, grid: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Rowwise inverse CDF with linear interpolation inside each cell.

    ``cdf`` is (k, P), ``u`` is (k,) with values in [0, cdf[:, -1]].
    """
    idx = np.sum(cdf < u[:, None], axis=1)
    idx = np.clip(idx, 1, grid.size - 1)
    rows = np.arange(cdf.shape[0])
    lo, hi = cdf[rows, idx - 1], cdf[rows, idx]
    width = hi - lo
    frac = np.where(width > 0, (u - lo) / np.where(width > 0, width, 1.0), 0.5)
    return grid[idx - 1] + frac * (grid[idx] - grid[idx - 1])


def _projector_weights(x: np.ndarray, grid: np.ndarray, herm: np.ndarray) -> np.ndarray:
    """Overlaps <g_x|m> of a narrow Gaussian packet at each outcome with each
    Fock level, shape (len(x), D)."""
    dx = grid[1] - grid[0]
    centre = np.rint((x - grid[0]) / dx).astype(int)
    offs = np.arange(-_PROJ_HALFWIDTH, _PROJ_HALFWIDTH + 1)
    idx = np.clip(centre[:, None] + offs[None, :], 0, grid.size - 1)
    # amplitude packet whose |g|^2 has standard deviation of one cell
    g = np.exp(-((grid[idx] - x[:, None]) ** 2) / (4 * dx * dx))
    return np.einsum("sw,msw->sm", g, herm[:, idx])


def _batch_density(psi: np.ndarray, herm: np.ndarray) -> np.ndarray:
    """Mode-0 density for a batch of states ``psi`` of shape (k, D, rest)."""
    k, d, rest = psi.shape
    if rest <= 2:
        # amplitudes <x_p| psi_k, r> as two real matmuls (BLAS, no complex einsum)
        flat = np.moveaxis(psi, 2, 1).reshape(k * rest, d)
        re = (flat.real @ herm).reshape(k, rest, -1)
        im = (flat.imag @ herm).reshape(k, rest, -1)
        return np.sum(re**2 + im**2, axis=1)
    # reduced density matrices, then sum_{m<=m'} Re(rho) h_m h_m' as one real matmul
    rho = np.einsum("kmr,knr->kmn", psi, psi.conj()).real
    iu, ju = np.triu_indices(d)
    weight = np.where(iu == ju, 1.0, 2.0)
    prods = herm[iu] * herm[ju]
    return (rho[:, iu, ju] * weight) @ prods


def sample_fock(state: FockState, rng: np.random.Generator, count: int,
                grids: list[GridSpec] | None = None) -> np.ndarray:
    """Draw ``count`` joint x-quadrature samples, shape (count, n_modes)."""
    if count < 1:
        raise ValueError("count must be >= 1")
    n, d, hbar = state.n_modes, state.cutoff, state.config.hbar
    norm2 = state.norm2
    if norm2 < state.config.norm_floor:
        raise TruncationLeakage(norm2, state.config.norm_floor, "homodyne sampling")
    if grids is None:
        grids = [default_grid(state, k) for k in range(n)]
    out = np.empty((count, n))

    # first mode: one shared density for all shots
    g0 = grids[0].grid
    dx0 = g0[1] - g0[0]
    h0 = hermite_functions(d, g0, hbar)
    psi = state.amplitudes.reshape(d, -1) / np.sqrt(norm2)
    dens = _batch_density(psi[None], h0)[0]
    cdf = _cdf(dens, dx0)
    if cdf[-1] < 1.0 - MASS_TOL:
        raise GridMassDeficit(float(cdf[-1]), 1.0)
    u = rng.uniform(0.0, cdf[-1], size=count)
    out[:, 0] = np.interp(u, cdf, g0)
    if n == 1:
        return out

    for start in range(0, count, _CHUNK):
        sl = slice(start, min(start + _CHUNK, count))
        k = sl.stop - sl.start
        # conditional states after the first outcome: (k, D, D^(n-1))
        w = _projector_weights(out[sl, 0], g0, h0)
        cond = w @ psi
        for mode in range(1, n):
            cond = cond / np.sqrt(np.sum(np.abs(cond) ** 2, axis=1, keepdims=True))
            gm = grids[mode].grid
            dxm = gm[1] - gm[0]
            hm = hermite_functions(d, gm, hbar)
            cur = cond.reshape(k, d, -1)
            dens = _batch_density(cur, hm)
            cdf = _cdf(dens, dxm)
            if cdf[:, -1].min() < 1.0 - MASS_TOL:
                raise GridMassDeficit(float(cdf[:, -1].min()), 1.0)
            u = rng.uniform(0.0, 1.0, size=k) * cdf[:, -1]
            xs = _invert(cdf, gm, u)
            out[sl, mode] = xs
            if mode < n - 1:
                wm = _projector_weights(xs, gm, hm)
                cond = np.einsum("km,kmr->kr", wm, cur)
    return out
