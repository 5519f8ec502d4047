"""Quadrature on the unit ball by polar factorization.

A rule is the tensor product of a radial Gauss-Jacobi rule (absorbing the
weight r^{2b+2n-1} (1-r^2)^a) and a rule on the unit sphere.  Integrands are
vectorized callables: they receive an array of points of shape (..., n) and
return an array of shape (...).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np
from scipy.special import roots_jacobi

from .ball import SpaceParams
from .errors import DomainError, NonConvergenceError
from .specfun import ln_beta

Integrand = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class CircleNodes:
    """Equally spaced nodes on the unit circle (n = 1 only)."""

    count: int = 256


@dataclass(frozen=True)
class ProductSphere:
    """Deterministic product rule on S^{2n-1}: simplex Gauss-Jacobi x phase trapezoid."""

    simplex_nodes: int = 8
    phase_nodes: int = 24


@dataclass(frozen=True)
class SeededSphereSample:
    """Normalized complex Gaussian samples with equal weights."""

    count: int = 100_000
    seed: int = 0


SpherePlan = Union[CircleNodes, ProductSphere, SeededSphereSample]


def sphere_measure(n: int) -> float:
    """Total surface measure 2 pi^n / (n-1)! of the unit sphere in C^n."""
    return 2.0 * math.pi**n / math.factorial(n - 1)


def normalization(p: SpaceParams) -> float:
    """Constant making |z|^{2b} (1-|z|^2)^a dlambda a probability measure."""
    return math.exp(math.lgamma(p.n) - p.n * math.log(math.pi) - ln_beta(p.a + 1, p.b + p.n))


def radial_rule(p: SpaceParams, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes r_i and weights w_i with sum w_i g(r_i) ~ int_0^1 g(r) r^{2b+2n-1} (1-r^2)^a dr.

    Exact for g polynomial in r^2 of degree <= 2m - 1.
    """
    if m < 1:
        raise DomainError("radial rule needs at least one node")
    alpha = p.a
    beta_ = p.b + p.n - 1
    y, wy = roots_jacobi(m, alpha, beta_)
    x = 0.5 * (1.0 + y)
    # x = r^2 maps the weight to x^{b+n-1} (1-x)^a dx / 2
    w = wy * 2.0 ** (-(alpha + beta_ + 1)) * 0.5
    if not (np.all(np.isfinite(x)) and np.all(x > 0) and np.all(x < 1) and np.all(w > 0)):
        raise NonConvergenceError(f"Gauss-Jacobi rule failed for (alpha, beta)=({alpha}, {beta_})")
    return np.sqrt(x), w


def sphere_rule(n: int, plan: SpherePlan) -> tuple[np.ndarray, np.ndarray]:
    """Unit vectors of shape (S, n) and weights summing to the sphere measure."""
    total = sphere_measure(n)
    if isinstance(plan, CircleNodes):
        if n != 1:
            raise DomainError("CircleNodes is only valid for n = 1")
        theta = 2.0 * math.pi * np.arange(plan.count) / plan.count
        pts = np.exp(1j * theta)[:, None]
        return pts, np.full(plan.count, total / plan.count)
    if isinstance(plan, SeededSphereSample):
        rng = np.random.default_rng(plan.seed)
        g = rng.standard_normal((plan.count, n)) + 1j * rng.standard_normal((plan.count, n))
        pts = g / np.linalg.norm(g, axis=1, keepdims=True)
        return pts, np.full(plan.count, total / plan.count)
    if isinstance(plan, ProductSphere):
        return _product_sphere(n, plan, total)
    raise TypeError(f"unknown sphere plan {plan!r}")


def _product_sphere(n: int, plan: ProductSphere, total: float):
    # (|xi_1|^2, ..., |xi_n|^2) is uniform on the simplex; build it by stick
    # breaking with u_j ~ Beta(1, n - j), then attach independent uniform phases
    k = plan.simplex_nodes
    s = np.zeros((1, 0))
    rem = np.ones(1)
    w = np.ones(1)
    for j in range(1, n):
        y, wy = roots_jacobi(k, float(n - j - 1), 0.0)
        u = 0.5 * (1.0 + y)
        wu = wy / wy.sum()
        s = np.concatenate([np.repeat(s, k, axis=0), np.outer(rem, u).reshape(-1, 1)], axis=1)
        w = np.outer(w, wu).ravel()
        rem = np.outer(rem, 1.0 - u).ravel()
    s = np.concatenate([s, rem[:, None]], axis=1)
    m = plan.phase_nodes
    phase = np.exp(2j * math.pi * np.arange(m) / m)
    grids = np.meshgrid(*([phase] * n), indexing="ij")
    ph = np.stack([g.ravel() for g in grids], axis=1)
    pts = np.sqrt(s)[:, None, :] * ph[None, :, :]
    weights = np.repeat(w, ph.shape[0]) / ph.shape[0]
    return pts.reshape(-1, n), weights * total


def default_plan(n: int) -> SpherePlan:
    if n == 1:
        return CircleNodes(256)
    if n == 2:
        return ProductSphere(8, 24)
    return ProductSphere(4, 8)


@dataclass(frozen=True)
class QuadratureRule:
    params: SpaceParams
    radial_nodes: np.ndarray
    radial_weights: np.ndarray
    sphere_plan: SpherePlan
    sphere_points: np.ndarray = field(repr=False)
    sphere_weights: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def points(self) -> np.ndarray:
        """Grid of shape (S, R, n): sphere node x radial node."""
        return self.sphere_points[:, None, :] * self.radial_nodes[None, :, None]

    def weights_mu(self) -> np.ndarray:
        """Grid weights of shape (S, R) for the probability measure dmu_{a,b}."""
        w = self.sphere_weights[:, None] * self.radial_weights[None, :]
        return w * normalization(self.params)

    def weights_lebesgue(self) -> np.ndarray:
        """Grid weights of shape (S, R) for Lebesgue measure on the ball."""
        r = self.radial_nodes
        a, b = self.params.a, self.params.b
        rad = self.radial_weights / (r ** (2 * b) * (1.0 - r * r) ** a)
        return self.sphere_weights[:, None] * rad[None, :]

    @property
    def is_monte_carlo(self) -> bool:
        return isinstance(self.sphere_plan, SeededSphereSample)

    @property
    def size(self) -> int:
        return self.sphere_points.shape[0] * self.radial_nodes.size


def build_rule(p: SpaceParams, radial: int = 64, plan: SpherePlan | None = None) -> QuadratureRule:
    plan = default_plan(p.n) if plan is None else plan
    r, w = radial_rule(p, radial)
    sp, sw = sphere_rule(p.n, plan)
    return QuadratureRule(p, r, w, plan, sp, sw)


def _check(rule: QuadratureRule, p: SpaceParams | None):
    if p is not None and p != rule.params:
        raise DomainError(f"rule was built for {rule.params}, not {p}")


def _apply(f: Integrand, rule: QuadratureRule) -> np.ndarray:
    vals = np.asarray(f(rule.points))
    if vals.shape != (rule.sphere_points.shape[0], rule.radial_nodes.size):
        vals = np.broadcast_to(vals, (rule.sphere_points.shape[0], rule.radial_nodes.size))
    return vals


def integrate_mu(f: Integrand, p: SpaceParams, rule: QuadratureRule) -> complex:
    """Integral of f against the probability measure dmu_{a,b}."""
    _check(rule, p)
    return complex(np.sum(_apply(f, rule) * rule.weights_mu()))


def integrate_mu_with_error(f: Integrand, p: SpaceParams, rule: QuadratureRule) -> tuple[complex, float]:
    """As integrate_mu, plus a standard-error estimate (0 for deterministic rules)."""
    _check(rule, p)
    vals = _apply(f, rule) * rule.weights_mu()
    value = complex(np.sum(vals))
    if not rule.is_monte_carlo:
        return value, 0.0
    per_sample = np.sum(vals, axis=1) * vals.shape[0]
    return value, float(np.std(per_sample, ddof=1) / math.sqrt(vals.shape[0]))


def integrate_lebesgue(f: Integrand, n: int, rule: QuadratureRule) -> complex:
    """Integral of f against Lebesgue measure on B_n using the rule's grid.

    The rule's radial weight is divided out at the nodes, so integrands that
    carry the factor |z|^{2b} (1-|z|^2)^a of the rule are integrated with
    full Gauss accuracy.
    """
    if n != rule.n:
        raise DomainError("dimension mismatch between rule and integrand")
    return complex(np.sum(_apply(f, rule) * rule.weights_lebesgue()))


def inner_product(f: Integrand, g: Integrand, p: SpaceParams, rule: QuadratureRule) -> complex:
    """<f, g> in L^2(dmu_{a,b})."""
    pts = rule.points
    return complex(np.sum(np.asarray(f(pts)) * np.conj(np.asarray(g(pts))) * rule.weights_mu()))
