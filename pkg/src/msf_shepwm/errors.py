"""Exception hierarchy.

Validation problems derive from :class:`ValidationError` (a ``ValueError``),
solver failures from :class:`OptimizationError` and file/trace problems from
:class:`IngestError`.  The CLI maps the three families to distinct exit codes.
"""


class MsfShepwmError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(MsfShepwmError, ValueError):
    pass


class DuplicateOrder(ValidationError):
    pass


class MissingFundamental(ValidationError):
    pass


class NonPositiveWeight(ValidationError):
    pass


class NonPositiveFrequency(ValidationError):
    pass


class UnknownPreset(ValidationError):
    pass


class NotQuarterSymmetric(ValidationError):
    pass


class LevelOverflow(ValidationError):
    pass


class UnsortedEdges(ValidationError):
    pass


class AngleOutOfRange(ValidationError):
    pass


class DeadTimeTooLong(ValidationError):
    pass


class EmptySelectedSet(ValidationError):
    pass


class ZeroDCPower(ValidationError):
    pass


class ConfigError(ValidationError):
    """Bad or missing configuration field.  ``field`` names the culprit."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class ShootThrough(MsfShepwmError):
    """Both transistors of one half bridge on in the same cycle (a bug)."""


class OptimizationError(MsfShepwmError):
    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class MaxIterations(OptimizationError):
    pass


class InfeasibleThresholds(OptimizationError):
    pass


class IngestError(MsfShepwmError, ValueError):
    pass


class MalformedRow(IngestError):
    pass


class NonMonotoneTime(IngestError):
    pass


class TooShort(IngestError):
    pass


class NonIntegerPeriods(IngestError):
    pass
