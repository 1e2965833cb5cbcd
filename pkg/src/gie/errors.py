"""Exception hierarchy.

Every error carries the CLI exit code of its family: 2 for configuration
problems, 3 for physics-domain failures, 4 for numerical failures.
"""


class GIEError(Exception):
    exit_code = 1


class ConfigError(GIEError, ValueError):
    exit_code = 2


class NonPositiveInput(ConfigError):
    pass


class PhysicsDomainError(GIEError, ValueError):
    exit_code = 3


class EpsilonOutOfRange(PhysicsDomainError):
    pass


class DegenerateMeasurement(PhysicsDomainError):
    pass


class LogDomain(PhysicsDomainError):
    pass


class NotEntangled(PhysicsDomainError):
    pass


class NumericError(GIEError, ArithmeticError):
    exit_code = 4


class NotPSD(NumericError):
    pass


class ComplexBranch(NumericError):
    pass


class SingularCovariance(NumericError):
    pass


class StepSizeUnderflow(NumericError):
    pass


class PositivityLost(NumericError):
    pass


class NegativeVariance(NumericError):
    pass


class RegimeWarning(UserWarning):
    """A formula is being used outside the regime it was derived for."""
