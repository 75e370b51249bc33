"""Exception hierarchy shared by all fcrystal modules."""


class FCrystalError(Exception):
    """Base class for all errors raised by this package."""


class NotPrime(FCrystalError):
    pass


class HenselFailure(FCrystalError):
    """Internal error: a Hensel lift failed to converge."""


class ContextMismatch(FCrystalError):
    pass


class DimensionMismatch(FCrystalError):
    pass


class SingularAtPrecision(FCrystalError):
    """The determinant is indistinguishable from 0 at the working precision."""


class PrecisionExhausted(FCrystalError):
    """The working precision is too small to certify the requested quantity.

    ``needed`` carries the smallest precision known to be sufficient, when
    the caller can compute one.
    """

    def __init__(self, message, needed=None):
        super().__init__(message)
        self.needed = needed


class NonIntegralRescale(FCrystalError):
    pass


class NotIsoclinic(FCrystalError):
    pass


class SlopeOrderViolated(FCrystalError):
    pass


class NotACycle(FCrystalError):
    pass


class RankTooSmall(FCrystalError):
    pass


class BadParameters(FCrystalError):
    pass


class ParseError(FCrystalError):
    pass


class BadFlags(FCrystalError):
    pass


class CheckFailed(FCrystalError):
    def __init__(self, message, failures=()):
        super().__init__(message)
        self.failures = list(failures)
