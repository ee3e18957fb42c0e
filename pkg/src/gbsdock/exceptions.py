"""Error taxonomy shared across the package.

Two roots: bad inputs or parameters raise :class:`ValidationError`, and
computations that break down numerically raise :class:`NumericalError`.
The CLI maps them to exit codes 2 and 3 respectively.
"""


class ValidationError(ValueError):
    """Inputs, parameters, or file contents violate a documented contract."""


class NumericalError(ArithmeticError):
    """A computation left its guaranteed numerical envelope."""


class EncodingError(ValidationError):
    """Requested device encoding is infeasible (e.g. a mode would need
    tanh(r) >= 1)."""


class DegenerateDistributionError(ValidationError):
    """A sampling distribution has no probability mass to draw from."""


class InstanceGenerationError(NumericalError):
    """Random instance generation exhausted its retry budget."""
