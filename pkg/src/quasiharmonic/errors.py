"""Exception hierarchy shared by every module of the package."""


class OscillatorError(Exception):
    """Base class for all errors raised by quasiharmonic."""


class InvalidParams(OscillatorError, ValueError):
    pass


class NonPositiveAlpha(InvalidParams):
    pass


class NonPositiveDim(InvalidParams):
    pass


class DimensionMismatch(OscillatorError, ValueError):
    pass


class OutOfDomain(OscillatorError, ValueError):
    """A position lies outside the guarded disc 1 - |lambda| r^2 > 0."""


class NegativeEnergy(OscillatorError, ValueError):
    pass


class ConstraintViolation(OscillatorError, ValueError):
    """Solution constants do not satisfy the relation required by their regime."""


class NonPositiveM(ConstraintViolation):
    pass


class NotUnboundedRegime(ConstraintViolation):
    pass


class BorderConstraint(ConstraintViolation):
    pass


class InconsistentConstants(ConstraintViolation):
    pass


class Aperiodic(OscillatorError):
    pass


class NotOscillatory(OscillatorError):
    pass


class PolarOrigin(OscillatorError, ValueError):
    pass


class TangentPole(OscillatorError, ValueError):
    pass


class NotSeparableForm(OscillatorError, ValueError):
    pass


class IntegrationError(OscillatorError):
    pass


class DomainEscape(IntegrationError):
    def __init__(self, message, last_time):
        super().__init__(message)
        self.last_time = last_time


class StepUnderflow(IntegrationError):
    pass
