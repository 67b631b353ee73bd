"""Exception hierarchy shared by the simulation modules."""


class AtomChainError(Exception):
    """Base class for all errors raised by atomchain."""


class OutOfRangeError(AtomChainError, ValueError):
    """A time or parameter lies outside the admissible range."""


class NotFermionizableError(AtomChainError, ValueError):
    """A frame or schedule with J^z != 0 was handed to the free-fermion engine."""


class DegenerateGroundStateError(AtomChainError, ValueError):
    """The frame has a (near) zero-energy mode, so its vacuum is not unique."""


class CapacityError(AtomChainError, ValueError):
    """The dense oracle was asked for more sites than it is configured for."""


class NumericalError(AtomChainError, ArithmeticError):
    """A linear-algebra routine failed or a structural invariant was lost."""


class StiffnessError(NumericalError):
    """The requested step size underflowed."""


class UnsafePathError(AtomChainError, ValueError):
    """A gate path violates the level-crossing constraint J^z < W/(N-1)."""


class InhomogeneousFrameError(AtomChainError, ValueError):
    """An operation defined for homogeneous chains got site-dependent couplings."""


class ConfigError(AtomChainError, ValueError):
    """An experiment configuration failed validation."""


class BracketError(AtomChainError, RuntimeError):
    """A root search could not bracket the target within its cap."""
