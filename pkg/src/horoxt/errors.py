"""Exception types raised across the package."""


class HoroxtError(Exception):
    """Base class for all errors raised by horoxt."""


class DomainError(HoroxtError, ValueError):
    """Argument outside the domain of a function."""


class FlowRangeError(HoroxtError, OverflowError):
    """Flow time too large for double precision exponentials."""


class ChartError(HoroxtError, ValueError):
    """Matrix lies on the null set where a chart is undefined."""


class CapacityError(HoroxtError, RuntimeError):
    """Enumeration would exceed the configured point cap."""


class HorizonError(HoroxtError, RuntimeError):
    """No hit found before the search horizon was exhausted."""


class ConvergenceError(HoroxtError, RuntimeError):
    """An iterative procedure failed to converge."""
