"""Exception hierarchy for curveflow.

Every error raised by the library derives from :class:`CurveFlowError` so callers
(and the CLI) can tell validation problems from numerical failures.
"""


class CurveFlowError(Exception):
    pass


class ValidationError(CurveFlowError, ValueError):
    """Bad user input: shapes, configuration values, parameters."""


class NumericalError(CurveFlowError, ArithmeticError):
    """A numerical step failed or an invariant was violated."""


class DegenerateSegment(NumericalError):
    pass


class DimensionMismatch(ValidationError):
    pass


class BadShapeParams(ValidationError):
    pass


class NonpositiveGamma(ValidationError):
    pass


class NotPositiveDefinite(NumericalError):
    pass


class BadSubstrate(ValidationError):
    pass


class SingularMatrix(NumericalError):
    pass


class ResidualTooLarge(NumericalError):
    pass


class FixedPointDiverged(NumericalError):
    pass


class NonpositiveEnergy(NumericalError):
    pass


class EnergyIncreased(NumericalError):
    pass


class OrientationHazard(NumericalError):
    pass


class NoRoot(NumericalError):
    pass


class SelfIntersecting(ValidationError):
    pass


class ClippingFailure(NumericalError):
    pass


class ZeroInitialArea(ValidationError):
    pass


class ConfigError(ValidationError):
    pass


class MissingSnapshots(ValidationError):
    pass
