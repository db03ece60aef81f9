"""Exception hierarchy shared across the package."""


class GraphembError(Exception):
    """Base class for all errors raised by this package."""


class DataError(GraphembError):
    """Invalid input data: malformed files, mismatched shapes or universes,
    out-of-range parameters."""


class NumericalError(GraphembError):
    """Numerical failure: non-convergence, divergence, or loss of precision
    beyond documented guards."""
