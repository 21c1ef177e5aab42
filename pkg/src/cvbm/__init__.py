"""Continuous-variable Born machines: CV circuit simulation (Gaussian phase
space and truncated Fock space), homodyne sampling, MMD losses with classical
and quantum kernels, and shift-rule training."""

from .circuit import GRADCHECK_SHIFTS, TRAINING_SHIFTS, Circuit, ShiftConfig, run, sample, shifted_circuits
from .errors import (CorruptedState, CVBMError, FormatError, GridMassDeficit, InsufficientSamples,
                     NonFinite, NonGaussianGate, TruncationLeakage)
from .fock import FockConfig, FockState
from .gates import BSgate, Dgate, Gate, Kgate, Rgate, Sgate, Vgate
from .gaussian import GaussianState, LossChannel
from .kernels import KernelSpec, gram, kernel_value
from .mmd_loss import GradientEstimate, MmdEstimate, mmd, mmd_gradient
from .trainer import TrainConfig, TrainLogEntry, evaluate, initialize, train

__all__ = [
    "BSgate", "Circuit", "CorruptedState", "CVBMError", "Dgate", "FockConfig", "FockState",
    "FormatError", "GRADCHECK_SHIFTS", "TRAINING_SHIFTS", "Gate", "GaussianState", "GradientEstimate",
    "GridMassDeficit", "InsufficientSamples", "KernelSpec", "Kgate", "LossChannel", "MmdEstimate",
    "NonFinite", "NonGaussianGate", "Rgate", "Sgate", "ShiftConfig", "TrainConfig",
    "TrainLogEntry", "TruncationLeakage", "Vgate", "evaluate", "gram", "initialize",
    "kernel_value", "mmd", "mmd_gradient", "run", "sample", "shifted_circuits", "train",
]
