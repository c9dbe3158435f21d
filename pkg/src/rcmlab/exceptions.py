"""Exceptions raised by the laboratory services."""


class LabError(Exception):
    """Base class for every error raised by rcmlab."""

    pass


class DomainError(LabError, ValueError):
    """Raised when a site, edge or set lies outside an operation's domain."""

    pass


class ConfigurationError(LabError):
    """Raised for invalid experiment configuration or undersized windows."""

    pass


class SolverError(LabError):
    """Raised when a linear solve or a series expansion does not converge."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class EstimationError(LabError):
    """Raised when a Monte Carlo estimate cannot be formed."""

    pass


class EllipticityError(LabError):
    """Raised when a dynamic conductance leaves its declared bounds."""

    pass


class InterfaceError(LabError):
    """Raised when the interface simulation produces non-finite heights."""

    pass


class SnapshotError(LabError):
    """Raised when an environment snapshot cannot be read."""

    pass
