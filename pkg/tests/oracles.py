"""Independent reference computations.

Nothing here imports the package's numerical code: gate matrices come from
plain matrix exponentials in a generously padded Fock space, densities from
textbook closed forms, and the MMD from explicit double loops.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import expm
from scipy.special import eval_hermite

HBAR = 2.0


def annihilation(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim)), 1).astype(complex)


def padded_block(generator_fn, dim: int, pad: int = 80) -> np.ndarray:
    """Top-left dim x dim block of expm(G) with G built on dim + pad levels."""
    big = dim + pad
    return expm(generator_fn(annihilation(big)))[:dim, :dim]


def displacement(alpha: complex, dim: int, pad: int = 80) -> np.ndarray:
    return padded_block(lambda a: alpha * a.conj().T - np.conj(alpha) * a, dim, pad)


def squeezing(r: float, phi: float, dim: int, pad: int = 80) -> np.ndarray:
    z = r * np.exp(1j * phi)
    return padded_block(lambda a: 0.5 * (np.conj(z) * a @ a - z * a.conj().T @ a.conj().T), dim, pad)


def cubic_phase(gamma: float, dim: int, pad: int = 150, hbar: float = HBAR) -> np.ndarray:
    """exp(i gamma x^3 / (3 hbar)) through the eigenbasis of a large truncated x."""
    big = dim + pad
    a = annihilation(big)
    x = np.sqrt(hbar / 2) * (a + a.conj().T)
    w, v = np.linalg.eigh(x)
    u = (v * np.exp(1j * gamma * w**3 / (3 * hbar))) @ v.conj().T
    return u[:dim, :dim]


def beamsplitter(theta: float, phi: float, dim: int) -> np.ndarray:
    """D^2 x D^2 block (index n_a * D + n_b) of the two-mode beamsplitter,
    from a Kronecker-product generator on 2D levels per mode."""
    big = 2 * dim
    a1 = np.kron(annihilation(big), np.eye(big))
    a2 = np.kron(np.eye(big), annihilation(big))
    gen = theta * (np.exp(1j * phi) * a1.conj().T @ a2 - np.exp(-1j * phi) * a1 @ a2.conj().T)
    u = expm(gen)
    idx = [na * big + nb for na in range(dim) for nb in range(dim)]
    return u[np.ix_(idx, idx)]


def poisson_mass(alpha: complex, levels: int) -> float:
    lam = abs(alpha) ** 2
    return sum(math.exp(-lam) * lam**n / math.factorial(n) for n in range(levels))


def hermite_function(n: int, x: np.ndarray, hbar: float = HBAR) -> np.ndarray:
    """<x|n> from the physicists' Hermite polynomial (fine for small n)."""
    u = np.asarray(x) / np.sqrt(hbar)
    norm = 1.0 / math.sqrt(2.0**n * math.factorial(n)) * (math.pi * hbar) ** -0.25
    return norm * eval_hermite(n, u) * np.exp(-u**2 / 2)


def normal_pdf(x, mean: float, var: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.exp(-(x - mean) ** 2 / (2 * var)) / np.sqrt(2 * np.pi * var)


def squeezed_overlap(x: float, y: float) -> float:
    """<S(x)0|S(y)0> for real squeezing magnitudes with a common angle."""
    return 1.0 / math.sqrt(math.cosh(x - y))


def rbf(x, y, sigma: float) -> float:
    d2 = sum((float(a) - float(b)) ** 2 for a, b in zip(x, y))
    return math.exp(-d2 / (2 * sigma * sigma))


def mmd_double_loop(X, Y, sigma: float) -> float:
    m, n = len(X), len(Y)
    xx = sum(rbf(X[i], X[j], sigma) for i in range(m) for j in range(m) if i != j)
    yy = sum(rbf(Y[i], Y[j], sigma) for i in range(n) for j in range(n) if i != j)
    xy = sum(rbf(X[i], Y[j], sigma) for i in range(m) for j in range(n))
    return xx / (m * (m - 1)) + yy / (n * (n - 1)) - 2 * xy / (m * n)


def loss_by_dilation(rho: np.ndarray, transmissivity: float) -> np.ndarray:
    """Pure loss as a beamsplitter to a vacuum ancilla, ancilla traced out.

    The ancilla can absorb at most dim - 1 photons, so the padded two-mode
    beamsplitter on dim levels per mode is exact on this support.
    """
    dim = rho.shape[0]
    theta = math.acos(math.sqrt(transmissivity))
    u = beamsplitter(theta, 0.0, dim)
    vac = np.zeros((dim, dim))
    vac[0, 0] = 1.0
    joint = u @ np.kron(rho, vac) @ u.conj().T
    return np.einsum("aibi->ab", joint.reshape(dim, dim, dim, dim))


def gaussian_rbf_cross(sigma: float, m1: float, v1: float, m2: float, v2: float) -> float:
    """E exp(-(x-y)^2 / 2 sigma^2) for independent x ~ N(m1, v1), y ~ N(m2, v2)."""
    s = sigma**2 + v1 + v2
    return math.sqrt(sigma**2 / s) * math.exp(-(m1 - m2) ** 2 / (2 * s))


def gaussian_mmd(sigma: float, p: tuple[float, float], q: tuple[float, float]) -> float:
    """Population MMD^2 between two 1-D normals given as (mean, variance)."""
    return (gaussian_rbf_cross(sigma, *p, *p) + gaussian_rbf_cross(sigma, *q, *q)
            - 2 * gaussian_rbf_cross(sigma, *p, *q))
