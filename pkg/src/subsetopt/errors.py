"""Exception hierarchy.

Two branches matter to callers: :class:`ValidationError` covers bad inputs
caught before any search starts, :class:`ComputationError` covers numerical
failures during evaluation.  The CLI maps them to exit codes 2 and 1.
"""


class SubsetOptError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(SubsetOptError, ValueError):
    pass


class ComputationError(SubsetOptError, ArithmeticError):
    #: set by the engine to the offending solution when an evaluation fails
    solution = None


# -- input / data -----------------------------------------------------------

class ParseError(ValidationError):
    pass


class EmptyInput(ValidationError):
    pass


class DuplicateId(ValidationError):
    pass


class UnknownId(ValidationError):
    pass


class OverlapError(ValidationError):
    pass


class SizeError(ValidationError):
    pass


class ConfigError(ValidationError):
    pass


class InvalidInitPop(ValidationError):
    pass


# -- criteria ---------------------------------------------------------------

class UnknownCriterion(ValidationError):
    pass


class MissingParameter(ValidationError):
    pass


class UnsupportedCriterion(ValidationError):
    pass


class DuplicateName(ValidationError):
    pass


class ShadowingBuiltin(ValidationError):
    pass


class TooLarge(ValidationError):
    pass


# -- numerics ---------------------------------------------------------------

class NotPositiveDefinite(ComputationError):
    pass


class ConvergenceFailure(ComputationError):
    pass


class DegenerateTarget(ComputationError):
    pass


class MonomorphicData(ComputationError):
    pass


class DegenerateVariance(ComputationError):
    pass
