"""Reproducing kernel of the weighted Bergman space and its building blocks.

The kernel is a function of one complex variable xi = <z, w>:

    K(xi) = 2F1(n, a+b+n+1; b+n; xi) = Q(xi) / (1 - xi)^{a+n+1},
    Q(xi) = 2F1(b, -(a+1); b+n; xi).

The closed form is the production path; the series form is kept as an
independent check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .ball import SpaceParams, as_coords, check_multi_index, inner, ln_monomial_norm_sq, monomial
from .errors import DomainError
from .specfun import (
    DEFAULT_CONTROL,
    HypParams,
    SeriesControl,
    hyp_pfq,
    hyp_pfq_conditioned,
    hyp_pfq_derivative,
    ln_beta,
)

# below this distance from xi = 1 only the closed form is evaluated
NEAR_ONE = 1e-3
# series cross-checks with a larger term-to-sum ratio cannot reach 1e-9
MAX_SERIES_CONDITION = 1e5


def q_params(p: SpaceParams) -> HypParams:
    return HypParams([p.b, -(p.a + 1.0)], [p.b + p.n])


def kernel_params(p: SpaceParams) -> HypParams:
    return HypParams([float(p.n), p.a + p.b + p.n + 1.0], [p.b + p.n])


def q_ab(xi, p: SpaceParams, ctrl: SeriesControl = DEFAULT_CONTROL):
    """The factor Q_{a,b}(xi), valid on the closed unit disk."""
    return hyp_pfq(q_params(p), xi, ctrl)


def q_ab_derivative(xi, p: SpaceParams, ctrl: SeriesControl = DEFAULT_CONTROL):
    return hyp_pfq_derivative(q_params(p), xi, 1, ctrl)


def q_at_one_closed_form(p: SpaceParams) -> float:
    """Gauss summation value Gamma(b+n) Gamma(a+n+1) / (Gamma(n) Gamma(a+b+n+1))."""
    a, b, n = p.a, p.b, p.n
    return math.exp(
        math.lgamma(b + n) + math.lgamma(a + n + 1) - math.lgamma(n) - math.lgamma(a + b + n + 1)
    )


def kernel_values(xi, p: SpaceParams, ctrl: SeriesControl = DEFAULT_CONTROL):
    """K(xi) through the closed form, vectorized over xi in the open disk."""
    xi = np.asarray(xi, dtype=complex)
    if np.any(np.abs(xi) >= 1.0):
        raise DomainError("kernel requires |xi| < 1")
    # evaluate in the upper half plane so that K(conj xi) = conj K(xi) exactly
    lower = xi.imag < 0
    up = np.where(lower, np.conj(xi), xi)
    out = q_ab(up, p, ctrl) * (1.0 - up) ** (-(p.a + p.n + 1.0))
    out = np.where(lower, np.conj(out), out)
    return complex(out) if np.ndim(out) == 0 else out


def kernel_derivative_values(xi, p: SpaceParams, ctrl: SeriesControl = DEFAULT_CONTROL):
    """K'(xi) from the closed form: Q'/(1-xi)^s + s Q/(1-xi)^{s+1}, s = a+n+1."""
    xi = np.asarray(xi, dtype=complex)
    if np.any(np.abs(xi) >= 1.0):
        raise DomainError("kernel requires |xi| < 1")
    s = p.a + p.n + 1.0
    one = 1.0 - xi
    out = (q_ab_derivative(xi, p, ctrl) + s * q_ab(xi, p, ctrl) / one) * one ** (-s)
    return complex(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class KernelEval:
    value: complex
    via_series: complex | None
    via_closed: complex
    agreement: float | None
    series_condition: float | None = None

    @property
    def checked(self) -> bool:
        """False when no series route was accurate enough for the cross-check."""
        return self.via_series is not None


def _kernel_series(xi: complex, p: SpaceParams, ctrl: SeriesControl) -> tuple[complex, float]:
    """The kernel series at xi, or its Pfaff transform when that is better conditioned.

    Pfaff: 2F1(n, a+b+n+1; b+n; xi) = (1-xi)^{-n} 2F1(n, -(a+1); b+n; xi/(xi-1)).
    """
    best = hyp_pfq_conditioned(kernel_params(p), xi, ctrl)
    w = xi / (xi - 1.0)
    if abs(w) < 1.0:
        hp = HypParams([float(p.n), -(p.a + 1.0)], [p.b + p.n])
        val, cond = hyp_pfq_conditioned(hp, w, ctrl)
        if cond < best[1]:
            best = (val * (1.0 - xi) ** (-p.n), cond)
    return best


def kernel_scalar(xi: complex, p: SpaceParams, ctrl: SeriesControl = DEFAULT_CONTROL) -> KernelEval:
    xi = complex(xi)
    if abs(xi) >= 1.0:
        raise DomainError("kernel requires |xi| < 1")
    closed = complex(kernel_values(xi, p, ctrl))
    if abs(1.0 - xi) < NEAR_ONE:
        return KernelEval(closed, None, closed, None)
    series, cond = _kernel_series(xi, p, ctrl)
    if cond > MAX_SERIES_CONDITION:
        return KernelEval(closed, None, closed, None, cond)
    agreement = abs(series - closed) / max(abs(closed), 1e-300)
    return KernelEval(closed, series, closed, agreement, cond)


def kernel(z, w, p: SpaceParams, ctrl: SeriesControl = DEFAULT_CONTROL):
    """The reproducing kernel evaluated as K(<z, w>); broadcasts over leading axes."""
    return kernel_values(inner(z, w), p, ctrl)


def kernel_derivs(t, p: SpaceParams, ctrl: SeriesControl = DEFAULT_CONTROL):
    """(K, K', K'') as real values at t in [0, 1); t may be an array."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0) or np.any(t_arr >= 1):
        raise DomainError("kernel_derivs requires 0 <= t < 1")
    hp = kernel_params(p)
    k0 = np.real(hyp_pfq(hp, t_arr, ctrl))
    k1 = np.real(hyp_pfq_derivative(hp, t_arr, 1, ctrl))
    k2 = np.real(hyp_pfq_derivative(hp, t_arr, 2, ctrl))
    if t_arr.ndim == 0:
        return float(k0), float(k1), float(k2)
    return k0, k1, k2


def ln_basis_scale(alpha: Sequence[int], p: SpaceParams) -> float:
    """log of the factor turning z^alpha into the unit vector e_alpha."""
    return -0.5 * ln_monomial_norm_sq(alpha, p)


def basis_fn(alpha: Sequence[int], p: SpaceParams) -> Callable[[np.ndarray], np.ndarray]:
    """The orthonormal basis function e_alpha as a vectorized callable."""
    alpha = check_multi_index(alpha, p.n)
    scale = math.exp(ln_basis_scale(alpha, p))

    def e_alpha(z):
        return scale * monomial(as_coords(z), alpha)

    e_alpha.alpha = alpha
    return e_alpha


def truncated_kernel(w, z, p: SpaceParams, max_degree: int) -> complex:
    """sum over |alpha| <= max_degree of e_alpha(w) conj(e_alpha(z)), graded by degree.

    Summing by degree uses sum_{|alpha|=k} k!/alpha! w^alpha conj(z)^alpha = <w, z>^k,
    so the cost is linear in max_degree rather than in the number of multi-indices.
    """
    xi = complex(inner(w, z))
    n, a, b = p.n, p.a, p.b
    total = 0j
    for k in range(max_degree + 1):
        ln_c = (
            math.lgamma(k + n) + math.lgamma(b + n) + math.lgamma(k + a + b + n + 1)
            - math.lgamma(n) - math.lgamma(a + b + n + 1) - math.lgamma(k + b + n)
            - math.lgamma(k + 1)
        )
        total += math.exp(ln_c) * xi**k
    return total


def sup_bound_constant(r0: float, p: SpaceParams) -> float:
    """The constant c(r0) in sup_{|z|<=r0} |f|^p <= n B(a+1, b+n) / c(r0) ||f||_p^p."""
    if not 0.0 < r0 < 1.0:
        raise DomainError("r0 must lie in (0, 1)")
    a, b, n = p.a, p.b, p.n
    r1 = 0.5 * min(r0, 1.0 - r0)
    # lower bounds of (1-|w|^2)^a and |w|^{2b} on the ball B(z0, r1), |z0| = r0
    fa = (1.0 - (r0 + r1) ** 2) ** a if a >= 0 else (1.0 - (r0 - r1) ** 2) ** a
    fb = (r0 - r1) ** (2 * b) if b >= 0 else (r0 + r1) ** (2 * b)
    return r1 ** (2 * n) * fa * fb


def sup_bound_factor(r0: float, p: SpaceParams) -> float:
    """n B(a+1, b+n) / c(r0)."""
    return p.n * math.exp(ln_beta(p.a + 1, p.b + p.n)) / sup_bound_constant(r0, p)
