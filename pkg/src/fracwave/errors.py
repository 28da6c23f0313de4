"""Exception hierarchy.

Every failure mode surfaced by the library derives from :class:`FracwaveError`
so the CLI can map library failures to exit codes in one place.
"""


class FracwaveError(Exception):
    pass


# model validation
class ModelError(FracwaveError, ValueError):
    pass


class DuplicateOrder(ModelError):
    pass


class NonMonotoneOrders(ModelError):
    pass


class StabilityViolation(ModelError):
    pass


class NonPositiveLambda(ModelError):
    pass


class NegativeCoefficient(ModelError):
    pass


class MissingEigenvalue(ModelError):
    pass


class ExcitationError(ModelError):
    pass


# evaluation
class BranchCut(FracwaveError, ValueError):
    pass


class PoleHit(FracwaveError, ZeroDivisionError):
    pass


class InvalidAlpha(FracwaveError, ValueError):
    pass


class NoConvergence(FracwaveError, ArithmeticError):
    pass


class NearDefective(FracwaveError, ArithmeticError):
    def __init__(self, msg, condition=None):
        super().__init__(msg)
        self.condition = condition


# forward solver
class IrrationalOrder(FracwaveError, ValueError):
    def __init__(self, msg, best_error=None):
        super().__init__(msg)
        self.best_error = best_error


class SystemTooLarge(FracwaveError, ValueError):
    pass


# laplace analysis
class GridTooCoarse(FracwaveError, ValueError):
    pass


class NewtonDiverged(FracwaveError, ArithmeticError):
    def __init__(self, msg, last_iterate=None):
        super().__init__(msg)
        self.last_iterate = last_iterate


class RightHalfPlanePole(FracwaveError, ArithmeticError):
    pass


class ZeroDerivative(FracwaveError, ArithmeticError):
    pass


# reconstruction
class DataZero(FracwaveError, ValueError):
    pass


class DenominatorZero(FracwaveError, ValueError):
    pass


class Diverged(FracwaveError, ArithmeticError):
    def __init__(self, msg, report=None):
        super().__init__(msg)
        self.report = report


class WindowTooNarrow(FracwaveError, ValueError):
    pass


class SignLoss(FracwaveError, ArithmeticError):
    def __init__(self, msg, report=None):
        super().__init__(msg)
        self.report = report


class NonUniformGrid(FracwaveError, ValueError):
    pass


# harness
class ConfigError(FracwaveError, ValueError):
    pass
