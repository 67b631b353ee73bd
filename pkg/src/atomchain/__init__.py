"""Spin chains of moving atoms: free-fermion dynamics, a dense oracle and gate protocols."""
from . import dynamics, exact, fermion, model, protocols
from .errors import (AtomChainError, BracketError, CapacityError, ConfigError, DegenerateGroundStateError,
                     InhomogeneousFrameError, NotFermionizableError, NumericalError, OutOfRangeError,
                     StiffnessError, UnsafePathError)
from .model import ChainConfig, CouplingFrame, Schedule

__version__ = "0.1.0"

__all__ = [
    "dynamics", "exact", "fermion", "model", "protocols", "ChainConfig", "CouplingFrame", "Schedule",
    "AtomChainError", "BracketError", "CapacityError", "ConfigError", "DegenerateGroundStateError",
    "InhomogeneousFrameError", "NotFermionizableError", "NumericalError", "OutOfRangeError", "StiffnessError",
    "UnsafePathError", "__version__",
]
