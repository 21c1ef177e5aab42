"""MMD kernels: the classical Gaussian RBF and two quantum kernels built from
single-mode feature states.

Quantum feature maps encode each coordinate separately and take the tensor
product, so the n-mode overlap is the product of per-mode overlaps:

* ``Squeezed``:   x -> S(r = x, phi = 0)|0>
* ``CubicPhase``: x -> V(gamma = x)|0>

Feature states are truncated, not renormalized. A feature whose squared norm
falls below ``norm_floor`` raises ``TruncationLeakage``; anything above it is
used as is, and ``feature_norms`` exposes the loss for monitoring.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.spatial.distance import cdist, pdist

from .errors import TruncationLeakage
from .fock import FockConfig, cubic_phase_vacuum, squeezed_vacuum

KERNEL_KINDS = ("GaussianRBF", "CubicPhase", "Squeezed")
COMBINERS = ("ModulusSquared", "RealPart")
QUANTIZE = 1e-12
_CACHE_LIMIT = 200_000


@dataclass(frozen=True)
class KernelSpec:
    """``sigma=None`` means "median heuristic": call ``resolve`` with the pooled
    data before evaluating."""

    kind: str = "GaussianRBF"
    sigma: float | None = None
    cutoff: int = 15
    combiner: str = "ModulusSquared"
    hbar: float = 2.0
    norm_floor: float = 1e-3

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise ValueError(f"kernel kind must be one of {KERNEL_KINDS}, got {self.kind!r}")
        if self.combiner not in COMBINERS:
            raise ValueError(f"combiner must be one of {COMBINERS}, got {self.combiner!r}")
        if self.sigma is not None and not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if int(self.cutoff) != self.cutoff or self.cutoff < 2:
            raise ValueError(f"cutoff must be an integer >= 2, got {self.cutoff}")
        if not 0 <= self.norm_floor <= 1:
            raise ValueError("norm_floor must lie in [0, 1]")

    @property
    def is_quantum(self) -> bool:
        return self.kind != "GaussianRBF"

    def resolve(self, pooled) -> "KernelSpec":
        """Fix an unset RBF bandwidth from data; a no-op otherwise."""
        if self.kind != "GaussianRBF" or self.sigma is not None:
            return self
        return replace(self, sigma=median_bandwidth(pooled))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "sigma": self.sigma, "cutoff": self.cutoff,
                "combiner": self.combiner, "hbar": self.hbar, "norm_floor": self.norm_floor}


def median_bandwidth(samples, max_points: int = 2000) -> float:
    """Median pairwise Euclidean distance; 1.0 for degenerate inputs.

    Large inputs are thinned to ``max_points`` evenly spaced rows first.
    """
    x = _as_matrix(samples)
    if x.shape[0] > max_points:
        x = x[np.linspace(0, x.shape[0] - 1, max_points).astype(int)]
    if x.shape[0] < 2:
        return 1.0
    med = float(np.median(pdist(x)))
    return med if med > 0 else 1.0


def _as_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim == 0:
        return a.reshape(1, 1)
    if a.ndim == 1:
        return a[:, None]
    return a


class _FeatureCache:
    """Single-mode feature vectors keyed by the quantized encoded value.

    Populated from one thread before any Gram tile is computed; cleared
    wholesale when it grows past ``_CACHE_LIMIT`` entries.
    """

    def __init__(self):
        self._store: dict[tuple, dict[int, np.ndarray]] = {}

    def get(self, kind: str, values: np.ndarray, config: FockConfig) -> np.ndarray:
        table = self._store.setdefault((kind, config), {})
        keys = np.rint(values / QUANTIZE).astype(np.int64)
        missing = np.array(sorted({int(k) for k in keys if int(k) not in table}), dtype=np.int64)
        if missing.size:
            if len(table) + missing.size > _CACHE_LIMIT:
                table.clear()
            fresh = _build_features(kind, missing * QUANTIZE, config)
            for k, row in zip(missing.tolist(), fresh):
                row.setflags(write=False)
                table[k] = row
        return np.stack([table[int(k)] for k in keys]) if keys.size else \
            np.empty((0, config.cutoff), dtype=complex)

    def clear(self) -> None:
        self._store.clear()


_cache = _FeatureCache()


def clear_feature_cache() -> None:
    _cache.clear()


def _build_features(kind: str, values: np.ndarray, config: FockConfig) -> np.ndarray:
    if kind == "Squeezed":
        return squeezed_vacuum(values, 0.0, config.cutoff).reshape(-1, config.cutoff)
    if kind == "CubicPhase":
        return cubic_phase_vacuum(values, config).reshape(-1, config.cutoff)
    raise ValueError(f"{kind} has no feature map")


def _fock_config(spec: KernelSpec) -> FockConfig:
    return FockConfig(cutoff=int(spec.cutoff), hbar=spec.hbar, norm_floor=1.0)


def features(spec: KernelSpec, column) -> np.ndarray:
    """Feature vectors for one coordinate column, shape (len(column), cutoff)."""
    column = np.asarray(column, dtype=float).reshape(-1)
    feats = _cache.get(spec.kind, column, _fock_config(spec))
    if feats.shape[0]:
        norms = np.sum(np.abs(feats) ** 2, axis=1)
        worst = int(np.argmin(norms))
        if norms[worst] < spec.norm_floor:
            raise TruncationLeakage(float(norms[worst]), spec.norm_floor,
                                    f"{spec.kind} feature of x={column[worst]:.6g} at cutoff {spec.cutoff}")
    return feats


def feature_norms(spec: KernelSpec, X) -> np.ndarray:
    """Squared norm of each sample's n-mode feature state (1 without leakage)."""
    X = _as_matrix(X)
    if not spec.is_quantum:
        return np.ones(X.shape[0])
    out = np.ones(X.shape[0])
    for k in range(X.shape[1]):
        out *= np.sum(np.abs(features(spec, X[:, k])) ** 2, axis=1)
    return out


def gram(spec: KernelSpec, X, Y) -> np.ndarray:
    """Kernel matrix with entry (i, j) = kappa(X_i, Y_j)."""
    X, Y = _as_matrix(X), _as_matrix(Y)
    if X.shape[1] != Y.shape[1]:
        raise ValueError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    if spec.kind == "GaussianRBF":
        if spec.sigma is None:
            raise ValueError("RBF bandwidth unset; call KernelSpec.resolve first")
        return np.exp(-cdist(X, Y, "sqeuclidean") / (2.0 * spec.sigma**2))
    ov = np.ones((X.shape[0], Y.shape[0]), dtype=complex)
    for k in range(X.shape[1]):
        ov *= features(spec, X[:, k]).conj() @ features(spec, Y[:, k]).T
    if spec.combiner == "ModulusSquared":
        return ov.real**2 + ov.imag**2
    return ov.real


def kernel_value(spec: KernelSpec, x, y) -> float:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    return float(gram(spec, x[None, :], y[None, :])[0, 0])
