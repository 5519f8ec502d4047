"""Exception hierarchy shared across the package."""


class ModBergmanError(Exception):
    """Base class for all package errors."""


class DomainError(ModBergmanError, ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class NonConvergenceError(ModBergmanError, ArithmeticError):
    """An iterative or series computation did not meet its tolerance."""


class HypothesisViolation(ModBergmanError):
    """A computation was requested whose standing hypothesis fails."""


class ZeroOnContour(ModBergmanError):
    """A zero of the integrand's denominator lies on (or too close to) a contour."""


class InconsistencyError(ModBergmanError, ArithmeticError):
    """Quadrature produced a result that violates a structural identity."""
