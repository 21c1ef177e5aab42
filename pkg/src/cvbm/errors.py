"""Exception types shared across the simulator and trainer."""


class CVBMError(Exception):
    """Base class for all package errors."""


class TruncationLeakage(CVBMError):
    """State norm fell below the configured floor after a Fock-space operation."""

    def __init__(self, norm: float, floor: float, context: str = ""):
        self.norm = norm
        self.floor = floor
        msg = f"squared norm {norm:.6g} below norm_floor {floor:g}"
        if context:
            msg = f"{context}: {msg}"
        super().__init__(msg)


class NonGaussianGate(CVBMError):
    """A cubic-phase or Kerr gate was sent to the phase-space backend."""


class CorruptedState(CVBMError):
    """Covariance block could not be factorized for sampling."""


class GridMassDeficit(CVBMError):
    """The sampling grid misses too much probability mass."""

    def __init__(self, mass: float, expected: float):
        self.mass = mass
        self.expected = expected
        super().__init__(f"grid mass {mass:.6g} short of state norm {expected:.6g}")


class InsufficientSamples(CVBMError):
    """The unbiased MMD estimator needs at least two samples per set."""


class NonFinite(CVBMError):
    """Loss or gradient became NaN/inf during training."""

    def __init__(self, what: str, iteration: int):
        self.what = what
        self.iteration = iteration
        super().__init__(f"non-finite {what} at iteration {iteration}")


class FormatError(CVBMError):
    """Malformed dataset or config file."""
