"""Numerics for the modified Bergman spaces A^p_{a,b} on the unit ball of C^n."""

__version__ = "0.1.0"

from .ball import BallPoint, SpaceParams, UnitVector
from .errors import (
    DomainError,
    HypothesisViolation,
    InconsistencyError,
    ModBergmanError,
    NonConvergenceError,
    ZeroOnContour,
)

__all__ = [
    "BallPoint",
    "SpaceParams",
    "UnitVector",
    "DomainError",
    "HypothesisViolation",
    "InconsistencyError",
    "ModBergmanError",
    "NonConvergenceError",
    "ZeroOnContour",
    "__version__",
]
