"""Exception hierarchy shared by all deadbeat modules."""


class DeadbeatError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInput(DeadbeatError):
    """Malformed argument: wrong shape, non-finite entries, bad index."""


class NumericalFailure(DeadbeatError):
    """A numerical routine failed or an internal cross-check did not hold."""


class SingularA(DeadbeatError):
    """The primal gain algorithm needs an invertible A; try the dual algorithm."""


class Uncontrollable(DeadbeatError):
    """The pair (A, B) does not admit a scalar-input deadbeat gain."""


class UnsupportedInputWidth(DeadbeatError):
    """Gain synthesis is implemented for single-input systems only."""


class NotControllable(DeadbeatError):
    """No class level yields a nonempty intersection; tracking is impossible."""


class DomainViolation(DeadbeatError):
    """A state or input left the system's admissible domain."""


class DivergedAtStep(DeadbeatError):
    """Simulation aborted because a state overflowed or left the domain."""

    def __init__(self, step: int, message: str | None = None):
        self.step = step
        super().__init__(message or f"simulation diverged at step {step}")
