class JCSusyError(Exception):
    """Base class for every error raised by the toolkit."""


class ParameterDomainError(JCSusyError, ValueError):
    """Parameters fall outside the domain of the requested construction."""


class OutOfEnvelopeError(JCSusyError, OverflowError):
    """Oscillator function requested outside its representable range."""


class NonHermitianError(JCSusyError, ValueError):
    pass


class DimensionMismatchError(JCSusyError, ValueError):
    pass


class StateAnnihilatedError(JCSusyError, ValueError):
    """The intertwiner maps the given state to zero."""


class DeferredToGridError(JCSusyError, ValueError):
    """Seed check needs nonphysical seeds; run it in src.core.darboux_grid instead."""


class SingularSeedMatrixError(JCSusyError, ValueError):
    pass


class ConfigError(JCSusyError, ValueError):
    pass
