"""Unit-ball geometry: parameters, points, Moebius involutions, monomial moments.

Points are plain complex numpy arrays whose last axis has length n; most
functions broadcast over leading axes so a whole quadrature grid can be
pushed through at once.  ``BallPoint`` is the validated single-point form
used at API boundaries.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import DomainError

# construction margin keeping 1 - <zeta, z> away from 0 in double precision
BOUNDARY_MARGIN = 1e-14


@dataclass(frozen=True)
class SpaceParams:
    a: float
    b: float
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        if not self.a > -1:
            raise DomainError(f"need a > -1, got a={self.a}")
        if not self.b > -self.n:
            raise DomainError(f"need b > -n, got b={self.b}, n={self.n}")

    def as_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "n": self.n}


class BallPoint:
    """A point of the open unit ball in C^n."""

    __slots__ = ("coords",)

    def __init__(self, coords: Sequence[complex]):
        arr = np.atleast_1d(np.asarray(coords, dtype=complex)).copy()
        if arr.ndim != 1:
            raise DomainError("BallPoint coordinates must be one-dimensional")
        if not np.linalg.norm(arr) < 1.0 - BOUNDARY_MARGIN:
            raise DomainError(f"point {arr} is not inside the unit ball")
        arr.setflags(write=False)
        self.coords = arr

    @property
    def n(self) -> int:
        return self.coords.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.coords))

    def __array__(self, dtype=None, copy=None):
        return self.coords if dtype is None else self.coords.astype(dtype)

    def __repr__(self):
        return f"BallPoint({self.coords.tolist()})"

    def __eq__(self, other):
        return isinstance(other, BallPoint) and np.array_equal(self.coords, other.coords)

    def __hash__(self):
        return hash(self.coords.tobytes())


class UnitVector(BallPoint):
    """A point of the unit sphere, |xi| = 1 to 1e-12."""

    def __init__(self, coords: Sequence[complex]):
        arr = np.atleast_1d(np.asarray(coords, dtype=complex)).copy()
        if arr.ndim != 1 or abs(np.linalg.norm(arr) - 1.0) > 1e-12:
            raise DomainError(f"{arr} is not a unit vector")
        arr.setflags(write=False)
        self.coords = arr

    def __repr__(self):
        return f"UnitVector({self.coords.tolist()})"


def as_coords(z) -> np.ndarray:
    if isinstance(z, BallPoint):
        return z.coords
    return np.atleast_1d(np.asarray(z, dtype=complex))


def inner(z, w) -> np.ndarray | complex:
    """<z, w> = sum_j z_j conj(w_j), broadcast over leading axes."""
    z = as_coords(z)
    w = as_coords(w)
    if z.shape[-1] != w.shape[-1]:
        raise DomainError(f"dimension mismatch: {z.shape[-1]} vs {w.shape[-1]}")
    # real arithmetic keeps <w, z> = conj(<z, w>) exact; complex multiply may fuse
    re = np.sum(z.real * w.real + z.imag * w.imag, axis=-1)
    im = np.sum(z.imag * w.real - z.real * w.imag, axis=-1)
    out = re + 1j * im
    return complex(out) if np.ndim(out) == 0 else out


def norm_sq(z) -> np.ndarray | float:
    z = as_coords(z)
    out = np.sum(z.real**2 + z.imag**2, axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def moebius(z, zeta) -> np.ndarray:
    """The involution phi_z exchanging 0 and z; broadcasts over ``zeta``."""
    z = as_coords(z)
    zeta = as_coords(zeta)
    if z.shape[-1] != zeta.shape[-1]:
        raise DomainError("dimension mismatch")
    s = norm_sq(z)
    if s == 0.0:
        return -zeta
    ip = np.asarray(inner(zeta, z))[..., None]
    proj = ip / s * z
    rest = zeta - proj
    return (z - proj - math.sqrt(1.0 - s) * rest) / (1.0 - ip)


def moebius_jacobian(z, zeta) -> np.ndarray | float:
    """Real Jacobian determinant of phi_z at zeta."""
    z = as_coords(z)
    n = z.shape[-1]
    return one_minus_phi_sq(z, zeta, zeta_sq=0.0) ** (n + 1)


def one_minus_phi_sq(z, zeta, zeta_sq=None) -> np.ndarray | float:
    """(1 - |z|^2)(1 - |zeta|^2) / |1 - <zeta, z>|^2.

    Passing ``zeta_sq=0`` drops the (1 - |zeta|^2) factor, which is how the
    Jacobian reuses this expression.
    """
    z = as_coords(z)
    zeta = as_coords(zeta)
    ip = inner(zeta, z)
    zs = norm_sq(zeta) if zeta_sq is None else zeta_sq
    return (1.0 - norm_sq(z)) * (1.0 - zs) / np.abs(1.0 - ip) ** 2


# ---------------------------------------------------------------- multi-indices

def check_multi_index(alpha: Sequence[int], n: int | None = None) -> tuple[int, ...]:
    alpha = tuple(int(x) for x in alpha)
    if any(x < 0 for x in alpha):
        raise DomainError(f"multi-index entries must be nonnegative: {alpha}")
    if n is not None and len(alpha) != n:
        raise DomainError(f"multi-index {alpha} has wrong length for n={n}")
    return alpha


def multi_indices(n: int, max_degree: int) -> Iterator[tuple[int, ...]]:
    """All alpha in N^n with |alpha| <= max_degree, graded then lexicographic."""
    for k in range(max_degree + 1):
        for combo in itertools.combinations_with_replacement(range(n), k):
            alpha = [0] * n
            for j in combo:
                alpha[j] += 1
            yield tuple(alpha)


def _ln_factorial_multi(alpha: Sequence[int]) -> float:
    return sum(math.lgamma(x + 1) for x in alpha)


def monomial(z, alpha: Sequence[int]) -> np.ndarray:
    z = as_coords(z)
    out = np.ones(z.shape[:-1], dtype=complex)
    for j, e in enumerate(alpha):
        if e:
            out = out * z[..., j] ** e
    return out


def monomial_sphere_moment(alpha: Sequence[int], n: int) -> float:
    """Integral of |xi^alpha|^2 over the unit sphere with unnormalized surface measure."""
    alpha = check_multi_index(alpha, n)
    k = sum(alpha)
    return 2.0 * math.exp(n * math.log(math.pi) + _ln_factorial_multi(alpha) - math.lgamma(k + n))


def ln_monomial_norm_sq(alpha: Sequence[int], p: SpaceParams) -> float:
    """log of the dmu_{a,b} integral of |z^alpha|^2."""
    n, a, b = p.n, p.a, p.b
    k = sum(alpha)
    return (
        math.lgamma(n)
        + _ln_factorial_multi(alpha)
        + math.lgamma(a + b + n + 1)
        + math.lgamma(k + b + n)
        - math.lgamma(k + n)
        - math.lgamma(b + n)
        - math.lgamma(k + a + b + n + 1)
    )


def monomial_ball_moment(alpha: Sequence[int], gamma: Sequence[int], p: SpaceParams) -> float:
    """Integral of z^alpha conj(z)^gamma against dmu_{a,b}."""
    alpha = check_multi_index(alpha, p.n)
    gamma = check_multi_index(gamma, p.n)
    if alpha != gamma:
        return 0.0
    return math.exp(ln_monomial_norm_sq(alpha, p))
