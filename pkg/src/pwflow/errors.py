"""Exception hierarchy shared by all modules."""


class PwflowError(Exception):
    """Base class for every error raised by this package."""


class DomainError(PwflowError, ValueError):
    """Evaluation outside the domain of a function."""


class DivisionByZero(PwflowError, ZeroDivisionError):
    pass


class NotPiecewiseConstant(PwflowError, ValueError):
    pass


class NotMonotone(PwflowError, ValueError):
    pass


class NotInvertible(PwflowError, ValueError):
    """Raised for increasing pieces of degree >= 2, whose inverse is not polynomial."""


class InvalidParameter(PwflowError, ValueError):
    pass


class SolverError(PwflowError):
    """Base for failures while deriving a progress function."""


class NoProgress(SolverError):
    """The process starves: no resource supply while demand is positive."""


class NonTermination(SolverError):
    pass


class StepTooCoarse(SolverError):
    pass


class CyclicDependency(PwflowError):
    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__("cyclic dependency: " + " -> ".join(self.cycle))


class UnknownParameter(PwflowError, KeyError):
    def __str__(self):
        return f"unknown parameter path: {self.args[0]!r}"


class ValidationError(PwflowError):
    """Carries a list of violations found while loading a model."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))
