"""Exception hierarchy shared by every module."""


class ArithDynError(Exception):
    """Base class; the CLI maps any subclass to exit code 2."""


class AllZero(ArithDynError, ValueError):
    pass


class BoundTooLarge(ArithDynError):
    pass


class FactorizationBudgetExceeded(ArithDynError):
    pass


class DomainViolation(ArithDynError, ValueError):
    pass


class DegenerateImage(ArithDynError):
    pass


class DegreeOverflow(ArithDynError):
    pass


class PrecisionUnreachable(ArithDynError):
    pass


class InsufficientTrace(ArithDynError):
    pass


class MissingDecomposition(ArithDynError):
    pass


class NotComplete(ArithDynError):
    pass


class IncompatibleEndo(ArithDynError):
    pass


class NotPermutation(ArithDynError):
    pass


class NotNef(ArithDynError):
    pass


class EmptyPolytope(ArithDynError):
    pass


class ConjugacyFailure(ArithDynError):
    pass


class SpecError(ArithDynError, ValueError):
    """Malformed system descriptor or campaign spec."""


class OrbitError(ArithDynError):
    """An evaluation error raised while iterating, tagged with the iterate index."""

    def __init__(self, iterate, cause):
        super().__init__(f"iterate {iterate}: {type(cause).__name__}: {cause}")
        self.iterate = iterate
        self.cause = cause
