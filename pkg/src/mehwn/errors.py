"""Exception types shared across the package."""


class ParameterError(ValueError):
    """An argument violates an operation's domain (negative density, bad range, ...)."""


class ConfigError(ValueError):
    """A configuration file or flag set cannot be parsed or validated."""


class DivergentSeriesError(ArithmeticError):
    """A series bound was requested under the 'error' policy but provably diverges."""


class EstimationError(RuntimeError):
    """A statistical estimate could not be produced (e.g. no reachable pairs)."""


class ModelViolationError(RuntimeError):
    """The cluster-to-component coupling was broken (cluster straddles components)."""
