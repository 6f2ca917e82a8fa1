class SuperlinearError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(SuperlinearError, ValueError):
    """Input violates a documented invariant (arity, positivity, ids...)."""


class ParseError(SuperlinearError, ValueError):
    """Input file could not be parsed; message carries the position."""


class InfeasibleCorrelationError(SuperlinearError, ValueError):
    """Correlation vector yields a negative contrast variance."""


class DegenerateVarianceError(ValidationError):
    """A standard deviation of zero makes the normalization undefined."""
