"""Exception hierarchy shared by all cohsim modules."""


class CohsimError(Exception):
    """Base class for every error raised by cohsim."""


class DomainError(CohsimError, ValueError):
    """Non-finite or otherwise unusable numeric input."""


class ParameterError(CohsimError, ValueError):
    """Invalid configuration value (grid size, rate, window, ...)."""


class ChainError(CohsimError, ValueError):
    """Structurally malformed optical element chain."""


class StreamError(CohsimError, ValueError):
    """Malformed tag stream, e.g. timestamps out of order."""


class EstimateError(CohsimError, ArithmeticError):
    """An estimator is undefined for the supplied counts."""


class ConfigError(CohsimError, ValueError):
    """Scenario configuration failed strict parsing."""
