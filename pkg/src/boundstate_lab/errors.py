"""Exception hierarchy shared by all modules."""


class BoundstateLabError(Exception):
    """Base class for every error raised by the package."""


class ValidationError(BoundstateLabError, ValueError):
    """Input outside its documented range."""


class ToleranceFailure(BoundstateLabError):
    """A numerical check missed its stated tolerance."""


# fockspace
class CapExceeded(ValidationError):
    pass


class NoBoundState(BoundstateLabError):
    pass


class OffGrid(ValidationError):
    pass


class SeparationViolated(ValidationError):
    pass


class IncompatibleBoost(ValidationError):
    pass


# wick
class UnboundVariable(ValidationError):
    pass


class ParseError(ValidationError):
    pass


# atoms
class GridTooCoarse(ToleranceFailure):
    pass


class QuadratureNotConverged(ToleranceFailure):
    pass


# processes
class NotDownhill(ValidationError):
    pass


class ResonanceHit(BoundstateLabError):
    pass


class ZeroMomentumTransfer(ValidationError):
    pass


class BasisTooSmall(ToleranceFailure):
    pass


# vdw
class SeparationTooSmall(ValidationError):
    pass


class DegenerateDenominator(BoundstateLabError):
    pass
