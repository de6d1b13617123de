"""Exception hierarchy shared by all modules."""


class RobustLinOptError(Exception):
    """Base class for every error raised by this package."""


# geometry
class InvalidPolytope(RobustLinOptError, ValueError):
    pass


class DimensionMismatch(InvalidPolytope):
    pass


class VertexOutsideHalfspace(InvalidPolytope):
    pass


class EmptyInterior(InvalidPolytope):
    pass


class NormExceedsOne(InvalidPolytope):
    pass


class SolverNonConvergence(RobustLinOptError, RuntimeError):
    pass


class DegenerateAxis(RobustLinOptError, ValueError):
    pass


class CertificateViolation(RobustLinOptError, ValueError):
    """The inscribed ellipsoid does not satisfy the containment guarantee."""


class UnsupportedFamily(RobustLinOptError, ValueError):
    pass


# environment
class ProtocolViolation(RobustLinOptError, RuntimeError):
    pass


class ActionOutsideDecisionSet(RobustLinOptError, ValueError):
    pass


class BudgetViolation(RobustLinOptError, RuntimeError):
    """A corruption function exceeded its declared magnitude."""


class BoundaryOutOfRange(RobustLinOptError, ValueError):
    pass


class GeneratorExhausted(RobustLinOptError, RuntimeError):
    pass


# learners
class HorizonExhausted(RobustLinOptError, RuntimeError):
    pass


class ZeroExpectedCount(RobustLinOptError, ValueError):
    pass


class SingularGram(RobustLinOptError, ArithmeticError):
    pass


# harness
class MissingLedger(RobustLinOptError, ValueError):
    pass


class ConfigError(RobustLinOptError, ValueError):
    """Invalid experiment configuration; ``field`` names the offending entry."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field
