"""Exception hierarchy shared by all modules."""


class EPDTError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(EPDTError, ValueError):
    """A model or solver parameter is outside its admissible range."""


class NegativeDiscriminant(EPDTError, ValueError):
    """delta = (mu-1)^2 - 4 nu^2 is negative; the blow-up theory does not apply."""


class EmptyRange(EPDTError, ValueError):
    """p is not below the critical exponent, so no lifespan bound is available."""


class DomainError(EPDTError, ValueError):
    """A special function or envelope was evaluated outside its domain."""


class NotFound(EPDTError, RuntimeError):
    pass


class SignConditionViolated(EPDTError, ValueError):
    """Cauchy data violate u1 + (mu-1-sqrt(delta))/2 u0 >= 0 on some node."""


class StepUnderflow(EPDTError, RuntimeError):
    pass


class InsufficientSamples(EPDTError, ValueError):
    pass


class InsufficientData(EPDTError, ValueError):
    pass


class GridError(EPDTError, ValueError):
    """The spatial domain cannot contain the support cone up to T_max."""
