"""Exception hierarchy shared across the package.

Two families matter to callers: problems with inputs or configuration
(``ValidationError``) and problems arising during numerical work
(``NumericalError``). The CLI maps them to exit codes 1 and 2.
"""


class FairregError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(FairregError, ValueError):
    """Bad input data, schema, configuration, or dimension mismatch."""


class NumericalError(FairregError, RuntimeError):
    """A numerical procedure failed (singular system, divergence, non-finite values)."""


class SingularSystemError(NumericalError):
    """The normal equations are singular; a positive ridge weight fixes this."""
