"""Exception types raised across the package."""


class SpecnormError(Exception):
    """Base class for all package errors."""


class InvalidSpec(SpecnormError, ValueError):
    pass


class GenerationFailed(SpecnormError, RuntimeError):
    pass


class Acyclic(SpecnormError, RuntimeError):
    """A finite regular graph of degree >= 3 always has a cycle; seeing this is a bug."""


class OddIndex(SpecnormError, ValueError):
    pass


class OddN(SpecnormError, ValueError):
    pass


class ConvergenceFailure(SpecnormError, RuntimeError):
    pass


class NoUntemperedSpectrum(SpecnormError, ValueError):
    pass


class ResolutionTooLow(SpecnormError, ValueError):
    pass


class QuadratureFailure(SpecnormError, RuntimeError):
    pass


class ConfigError(SpecnormError, ValueError):
    pass


class ResourceBudgetExceeded(SpecnormError, RuntimeError):
    pass
