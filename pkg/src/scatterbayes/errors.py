"""Exception hierarchy shared by all modules."""


class ScatterError(Exception):
    """Base class for every error raised by this package."""


class ConfigurationError(ScatterError, ValueError):
    """Invalid user-supplied configuration (bad names, sizes, parameters)."""


class DomainError(ScatterError, ValueError):
    """An input lies outside the domain an operation supports."""


class NumericalError(ScatterError, ArithmeticError):
    """Non-finite values or an ill-conditioned linear system."""


class ChainError(ScatterError, RuntimeError):
    """The Markov chain cannot continue (NaN potential, too many failures)."""
