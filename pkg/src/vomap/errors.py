"""Exception hierarchy shared by every module in :mod:`vomap`."""


class VomapError(Exception):
    """Base class for all package errors."""


class DomainError(VomapError, ValueError):
    """An argument lies outside the domain the operation is defined on."""


class CapacityError(VomapError):
    """A request would exceed the configured memory budget."""


class AnalysisError(VomapError):
    """A stability analysis could not produce a trustworthy answer."""


class BracketingError(AnalysisError):
    """Bisection endpoints do not straddle the stability threshold."""


class PoleError(VomapError, ZeroDivisionError):
    """A characteristic function was evaluated at one of its poles."""
