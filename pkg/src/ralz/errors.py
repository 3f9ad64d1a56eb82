class RalzError(Exception):
    """Base class for all errors raised by this package."""


class AlphabetError(RalzError, ValueError):
    pass


class MalformedStreamError(RalzError):
    pass


class TruncatedStreamError(MalformedStreamError):
    pass


class CapacityError(RalzError):
    pass


class SpannerIntegrityError(RalzError):
    pass


class ParameterError(RalzError, ValueError):
    pass


class PositionError(RalzError, IndexError):
    """Requested position lies outside ``[1, n]``."""


class NoRandomAccessError(RalzError):
    """Raised for plain LZ78 streams, which carry no navigation data."""


class WeakEpsilonWarning(UserWarning):
    """Epsilon is below the range where the overhead bound holds w.h.p."""
