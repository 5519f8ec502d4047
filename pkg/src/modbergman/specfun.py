"""Scalar special functions and generalized hypergeometric series.

All series are summed by forward term recurrence.  Evaluation is
vectorized over the argument: ``z`` may be a Python scalar or any
array-like of complex numbers, and the result has the same shape.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, NonConvergenceError


@dataclass(frozen=True)
class SeriesControl:
    """Truncation policy shared by every series in the package."""

    max_terms: int = 200_000
    rel_tol: float = 1e-15
    abs_floor: float = 1e-300

    def __post_init__(self):
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")
        if not 0.0 < self.rel_tol < 1.0:
            raise ValueError("rel_tol must lie in (0, 1)")
        if self.abs_floor <= 0.0:
            raise ValueError("abs_floor must be positive")


DEFAULT_CONTROL = SeriesControl()


@dataclass(frozen=True)
class HypParams:
    numerators: tuple[float, ...]
    denominators: tuple[float, ...]

    def __init__(self, numerators: Sequence[float], denominators: Sequence[float]):
        object.__setattr__(self, "numerators", tuple(float(c) for c in numerators))
        object.__setattr__(self, "denominators", tuple(float(d) for d in denominators))
        n_term = self.terminating_index()
        for d in self.denominators:
            m = _nonpositive_integer(d)
            if m is not None and (n_term is None or n_term > m):
                raise DomainError(
                    f"denominator {d} is a nonpositive integer and the series "
                    "does not terminate before it"
                )

    def terminating_index(self) -> int | None:
        """Last index with a nonzero term, or None for an infinite series."""
        idx = [m for m in map(_nonpositive_integer, self.numerators) if m is not None]
        return min(idx) if idx else None

    def shifted(self, k: int) -> "HypParams":
        return HypParams([c + k for c in self.numerators], [d + k for d in self.denominators])

    @property
    def gauss_excess(self) -> float:
        """sum(denominators) - sum(numerators); governs convergence on |z| = 1."""
        return sum(self.denominators) - sum(self.numerators)


def _nonpositive_integer(x: float) -> int | None:
    if x <= 0 and float(x).is_integer():
        return int(-x)
    return None


def ln_gamma(x: float) -> float:
    if x <= 0:
        raise DomainError(f"ln_gamma requires x > 0, got {x}")
    return math.lgamma(x)


def beta(s: float, t: float) -> float:
    if s <= 0 or t <= 0:
        raise DomainError(f"beta requires positive arguments, got ({s}, {t})")
    return math.exp(math.lgamma(s) + math.lgamma(t) - math.lgamma(s + t))


def ln_beta(s: float, t: float) -> float:
    if s <= 0 or t <= 0:
        raise DomainError(f"beta requires positive arguments, got ({s}, {t})")
    return math.lgamma(s) + math.lgamma(t) - math.lgamma(s + t)


def pochhammer(c: float, k: int) -> float:
    """Rising factorial (c)_k = c (c+1) ... (c+k-1)."""
    if k < 0:
        raise ValueError("k must be a nonnegative integer")
    if isinstance(c, int):
        out = 1
        for j in range(k):
            out *= c + j
        return float(out)
    out = 1.0
    for j in range(k):
        out *= c + j
    return out


def series_coefficients(p: HypParams, count: int) -> np.ndarray:
    """First ``count`` coefficients prod (c)_k / prod (d)_k / k!."""
    coef = np.empty(count)
    t = 1.0
    for k in range(count):
        coef[k] = t
        num = 1.0
        for c in p.numerators:
            num *= c + k
        den = float(k + 1)
        for d in p.denominators:
            den *= d + k
        t = t * num / den if num != 0.0 else 0.0
    return coef


# partial sums are doubled this many times for the |z| = 1 extrapolation
_RICHARDSON_LEVELS = 7
_RICHARDSON_BASE = 512
_RICHARDSON_TOL = 1e-10
_BLOCK = 64


def hyp_pfq(p: HypParams, z, ctrl: SeriesControl = DEFAULT_CONTROL):
    """Generalized hypergeometric series pFq(numerators; denominators; z).

    Terminating series are summed exactly up to the terminating index.  For
    |z| < 1 the recurrence runs until three consecutive terms fall below
    ``ctrl.rel_tol`` times the partial sum.  On the unit circle the series is
    accepted only when it has one more numerator than denominators and
    positive Gauss excess; the point z = 1 itself is summed with Richardson
    extrapolation of the partial sums, because the terms decay only
    algebraically there.
    """
    z_arr = np.asarray(z, dtype=complex)
    flat = z_arr.ravel()
    out = np.empty(flat.shape, dtype=complex)

    n_term = p.terminating_index()
    if n_term is not None:
        coef = series_coefficients(p, n_term + 1)
        out[:] = np.polyval(coef[::-1], flat)
        return _reshape(out, z_arr)

    mod = np.abs(flat)
    if np.any(mod > 1.0 + 1e-12):
        raise DomainError("non-terminating series evaluated outside the closed unit disk")
    on_circle = mod >= 1.0 - 1e-12
    if np.any(on_circle):
        if len(p.numerators) != len(p.denominators) + 1 or p.gauss_excess <= 0:
            raise DomainError(
                "series on |z| = 1 needs q = s + 1 numerators and positive Gauss excess"
            )
    at_one = on_circle & (np.abs(flat - 1.0) <= 1e-12)
    if np.any(at_one):
        out[at_one] = _sum_at_one(p, ctrl)
    rest = ~at_one
    if np.any(rest):
        out[rest] = _sum_recurrence(p, flat[rest], ctrl)
    return _reshape(out, z_arr)


def hyp_pfq_conditioned(p: HypParams, z: complex, ctrl: SeriesControl = DEFAULT_CONTROL) -> tuple[complex, float]:
    """(pFq(z), sum |t_k| / |sum t_k|) for a scalar z with |z| < 1.

    The ratio bounds the amplification of rounding errors in the terms, so
    roughly ratio * eps is the attainable relative accuracy.
    """
    z = complex(z)
    n_term = p.terminating_index()
    if n_term is not None:
        terms = series_coefficients(p, n_term + 1) * z ** np.arange(n_term + 1)
        total = complex(np.sum(terms))
        return total, float(np.sum(np.abs(terms))) / max(abs(total), 1e-300)
    if abs(z) >= 1.0:
        raise DomainError("conditioned summation needs |z| < 1")
    val, mag = _sum_recurrence(p, np.array([z]), ctrl, with_abs=True)
    return complex(val[0]), float(mag[0]) / max(abs(val[0]), 1e-300)


def _reshape(out: np.ndarray, z_arr: np.ndarray):
    if z_arr.ndim == 0:
        return complex(out[0])
    return out.reshape(z_arr.shape)


def _ratios(p: HypParams, k0: int, count: int) -> np.ndarray:
    k = np.arange(k0, k0 + count, dtype=float)
    r = 1.0 / (k + 1.0)
    for c in p.numerators:
        r = r * (c + k)
    for d in p.denominators:
        r = r / (d + k)
    return r


def _sum_recurrence(p: HypParams, z: np.ndarray, ctrl: SeriesControl, with_abs: bool = False):
    m = z.size
    result = np.empty(m, dtype=complex)
    abs_result = np.empty(m)
    active = np.arange(m)
    t = np.ones(m, dtype=complex)
    s = np.ones(m, dtype=complex)
    s_abs = np.ones(m)
    # tail-test outcome for the two most recent terms of each element
    prev = np.zeros((m, 2), dtype=bool)
    k = 0
    while active.size:
        if k >= ctrl.max_terms:
            raise NonConvergenceError(
                f"hypergeometric series not converged after {ctrl.max_terms} terms "
                f"for {active.size} argument(s), e.g. z={z[active[0]]}"
            )
        count = min(_BLOCK, ctrl.max_terms - k)
        za = z[active]
        step = _ratios(p, k, count)[None, :] * za[:, None]
        terms = t[active, None] * np.cumprod(step, axis=1)
        sums = s[active, None] + np.cumsum(terms, axis=1)
        mag = np.abs(terms)
        abs_sums = s_abs[active, None] + np.cumsum(mag, axis=1)
        small = (mag <= ctrl.rel_tol * np.abs(sums)) | (mag <= ctrl.abs_floor)
        ext = np.concatenate([prev[active], small], axis=1)
        run3 = ext[:, 2:] & ext[:, 1:-1] & ext[:, :-2]
        hit = run3.any(axis=1)
        first = np.argmax(run3, axis=1)
        if np.any(hit):
            idx = np.nonzero(hit)[0]
            result[active[idx]] = sums[idx, first[idx]]
            abs_result[active[idx]] = abs_sums[idx, first[idx]]
        keep = ~hit
        t[active[keep]] = terms[keep, -1]
        s[active[keep]] = sums[keep, -1]
        s_abs[active[keep]] = abs_sums[keep, -1]
        prev[active[keep]] = ext[keep, -2:]
        active = active[keep]
        k += count
    return (result, abs_result) if with_abs else result


def _sum_at_one(p: HypParams, ctrl: SeriesControl) -> complex:
    sigma = p.gauss_excess
    base = _RICHARDSON_BASE
    levels = _RICHARDSON_LEVELS
    while base * 2**levels > ctrl.max_terms and levels > 2:
        levels -= 1
    k_max = base * 2**levels
    if k_max > ctrl.max_terms:
        raise NonConvergenceError("max_terms too small for the z = 1 extrapolation")
    coef = series_coefficients(p, k_max)
    partial = np.cumsum(coef)
    sizes = [base * 2**i for i in range(levels + 1)]
    table = [[partial[k - 1]] for k in sizes]
    for i in range(1, levels + 1):
        for j in range(1, i + 1):
            f = 2.0 ** (sigma + j - 1)
            table[i].append((f * table[i][j - 1] - table[i - 1][j - 1]) / (f - 1.0))
    best = table[levels][levels]
    err = abs(best - table[levels][levels - 1])
    if not err <= _RICHARDSON_TOL * max(abs(best), 1.0) + ctrl.abs_floor:
        raise NonConvergenceError(
            f"z = 1 extrapolation unstable (estimated error {err:.3e}, excess {sigma})"
        )
    return complex(best)


def hyp_pfq_derivative(p: HypParams, z, order: int = 1, ctrl: SeriesControl = DEFAULT_CONTROL):
    """d^order/dz^order of pFq via the parameter-shift identity."""
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    factor = 1.0
    for j in range(order):
        for c in p.numerators:
            factor *= c + j
        for d in p.denominators:
            factor /= d + j
    if factor == 0.0:
        z_arr = np.asarray(z, dtype=complex)
        return 0j if z_arr.ndim == 0 else np.zeros(z_arr.shape, dtype=complex)
    return factor * hyp_pfq(p.shifted(order), z, ctrl)


def hyp2f1(a: float, b: float, c: float, z, ctrl: SeriesControl = DEFAULT_CONTROL):
    return hyp_pfq(HypParams([a, b], [c]), z, ctrl)
