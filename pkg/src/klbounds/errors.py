"""Exception hierarchy shared by every module of the package."""


class KLBoundsError(Exception):
    """Base class for all errors raised by klbounds."""


class MassLeak(KLBoundsError):
    """Grid does not carry (almost) all probability mass of a density."""


class TailDominated(KLBoundsError):
    """Truncated moment integral has a tail error above tolerance."""


class DegenerateVariance(KLBoundsError):
    pass


class GridMismatch(KLBoundsError):
    pass


class NumericBlowup(KLBoundsError):
    pass


class SupportViolation(KLBoundsError):
    """A reference density vanishes where it must stay positive."""


class AbsoluteContinuityViolation(KLBoundsError):
    """p > 0 where q = 0 numerically, so KL(p||q) is infinite."""


class CrossCheckFailure(KLBoundsError):
    pass


class NonNormalizedGenerator(KLBoundsError):
    pass


class RangeError(KLBoundsError, ValueError):
    pass


class ZeroReferenceMass(KLBoundsError):
    pass


class NotStandardized(KLBoundsError):
    pass


class L2TooLarge(KLBoundsError):
    pass


class LinfTooLarge(KLBoundsError):
    pass


class CramerRaoViolation(KLBoundsError):
    pass


class NoFeasibleParams(KLBoundsError):
    pass


class AliasingDetected(KLBoundsError):
    pass


class NonPositiveValue(KLBoundsError, ValueError):
    pass


class AlphaNotLessThanOne(KLBoundsError, ValueError):
    pass


class ConfigError(KLBoundsError):
    pass


class ReportParseError(KLBoundsError):
    pass
