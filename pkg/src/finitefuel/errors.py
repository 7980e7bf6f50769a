"""Exception hierarchy shared by the solver, oracles and CLI."""


class FiniteFuelError(Exception):
    """Base class for all package errors."""


class DomainError(FiniteFuelError, ValueError):
    """An argument lies outside the domain of a closed-form expression."""


class RegimeError(FiniteFuelError):
    """Parameters or fuel level outside the range handled by the new boundaries."""

    def __init__(self, message, regime=None):
        super().__init__(message)
        self.regime = regime


class ValidationError(FiniteFuelError):
    """A solved object failed an audit; ``location`` holds the worst offender."""

    def __init__(self, message, location=None, violation=None):
        super().__init__(message)
        self.location = location
        self.violation = violation


class BreakpointError(DomainError):
    """Second-order quantity requested exactly at a breakpoint."""


class ConvergenceError(FiniteFuelError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ResolutionError(FiniteFuelError):
    """Grid too coarse to resolve the requested feature."""
