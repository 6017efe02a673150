"""Exception hierarchy shared by all modules.

Configuration problems derive from :class:`ValueError`; numerical failures
derive from :class:`ArithmeticError`.  The CLI maps the two families onto
distinct exit codes.
"""


class EitCoolError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(EitCoolError, ValueError):
    """A scenario document does not match the schema.

    ``path`` is the dotted/indexed location of the offending field.
    """

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class ValidationError(EitCoolError, ValueError):
    """A parameter value violates a physical invariant."""


class PreconditionError(EitCoolError, ValueError):
    """An analytic formula was called outside its domain of validity."""


class UnknownPresetError(EitCoolError, KeyError, ValueError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class ResourceError(EitCoolError, ValueError):
    """Requested problem size exceeds the configured limit."""


class NumericalError(EitCoolError, ArithmeticError):
    """Generic numerical failure (drift, inconsistent results)."""


class NonUniqueSteadyStateError(NumericalError):
    """The Liouvillian kernel is not one-dimensional."""


class NearSingularSolveError(NumericalError):
    def __init__(self, message, condition):
        self.condition = condition
        super().__init__(f"{message} (condition estimate {condition:.3e})")


class HeatingRegimeError(NumericalError):
    """Heating dominates (A+ >= A-); no steady cooling limit exists."""
