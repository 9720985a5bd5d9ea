"""Exception types raised by the solvers."""


class FastDiffError(Exception):
    pass


class ConfigError(FastDiffError, ValueError):
    """Invalid or incomplete problem configuration."""


class IntegrationFailure(FastDiffError):
    """Adaptive step control collapsed below the machine floor."""


class MonotonicityViolation(FastDiffError):
    pass


class OutOfRange(FastDiffError, ValueError):
    pass


class InsufficientRange(OutOfRange):
    pass


class NewtonDivergence(FastDiffError):
    pass


class PositivityLoss(FastDiffError):
    pass


class GridMismatch(FastDiffError, ValueError):
    pass


class DegenerateFit(FastDiffError):
    pass
