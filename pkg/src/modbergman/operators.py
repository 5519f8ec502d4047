"""Integral operators on the weighted ball: projection, Berezin transform,
the growth integrals I_s and J_s, and mean oscillation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .ball import SpaceParams, as_coords, inner, moebius, norm_sq
from .errors import DomainError, HypothesisViolation, InconsistencyError
from .kernel import kernel_values, q_ab
from .quadrature import (
    CircleNodes,
    QuadratureRule,
    build_rule,
    integrate_lebesgue,
    integrate_mu,
    radial_rule,
)
from .specfun import DEFAULT_CONTROL, HypParams, SeriesControl, beta, hyp_pfq

Func = Callable[[np.ndarray], np.ndarray]


def project(f: Func, z, p: SpaceParams, rule: QuadratureRule) -> complex:
    """Bergman projection: integral of f(w) K(<z, w>) dmu(w)."""
    z = as_coords(z)
    return integrate_mu(lambda w: f(w) * kernel_values(inner(z, w), p), p, rule)


def berezin_weights(z, p: SpaceParams, rule: QuadratureRule) -> np.ndarray:
    """Grid weights |K(<w, z>)|^2 / K(|z|^2) dmu(w); they sum to 1."""
    z = as_coords(z)
    k = kernel_values(inner(rule.points, z), p)
    kzz = np.real(kernel_values(norm_sq(z), p))
    return np.abs(k) ** 2 / kzz * rule.weights_mu()


def berezin(f: Func, z, p: SpaceParams, rule: QuadratureRule) -> complex:
    """Berezin transform by direct quadrature; accurate while the kernel peak
    at z is resolved by the grid (|z| up to about 0.9 with default rules)."""
    w = berezin_weights(z, p, rule)
    return complex(np.sum(np.asarray(f(rule.points)) * w))


def mobius_rule(p: SpaceParams, radial: int = 64, plan=None) -> QuadratureRule:
    """Grid for the pulled-back Berezin integral: radial weight (1-r^2)^a only."""
    return build_rule(SpaceParams(p.a, 0.0, p.n), radial, plan)


def berezin_mobius(f: Func, z, p: SpaceParams, rule: QuadratureRule) -> complex:
    """Berezin transform after the substitution w = phi_z(zeta).

    The result is
        C / Q(|z|^2) * int f(phi_z(zeta)) |Q(<phi_z(zeta), z>)|^2 |phi_z(zeta)|^{2b}
                       (1 - |zeta|^2)^a dlambda(zeta),
    whose integrand stays bounded as z approaches the sphere, so it is the
    method of choice near the boundary.  The sum is divided by the same
    quadrature of f = 1 (exactly 1 in theory), which cancels most of the
    error from the nonsmooth factor |phi_z(zeta)|^{2b}.  ``rule`` must come
    from :func:`mobius_rule`.
    """
    if rule.params != SpaceParams(p.a, 0.0, p.n):
        raise DomainError("berezin_mobius needs a rule built by mobius_rule(p)")
    z = as_coords(z)
    w = moebius(z, rule.points)
    qw = q_ab(inner(w, z), p)
    r2 = norm_sq(w)
    grid = rule.sphere_weights[:, None] * rule.radial_weights[None, :]
    weight = np.abs(qw) ** 2 * r2**p.b * grid
    return complex(np.sum(np.asarray(f(w)) * weight) / np.sum(weight))


def berezin_boundary_gap(
    f: Func,
    xi,
    radii: Sequence[float],
    p: SpaceParams,
    rule: QuadratureRule | None = None,
) -> list[float]:
    """|B f(r xi) - f(xi)| for each r, using the pulled-back integral."""
    xi = as_coords(xi)
    if abs(np.linalg.norm(xi) - 1.0) > 1e-12:
        raise DomainError("xi must be a unit vector")
    rule = mobius_rule(p) if rule is None else rule
    target = complex(np.asarray(f(xi[None, :]))[0])
    return [abs(berezin_mobius(f, r * xi, p, rule) - target) for r in radii]


# ---------------------------------------------------------------- growth integrals

def i_s(z, s: float, p: SpaceParams, ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    """I_s(z) through its 3F2 closed form."""
    a, b, n = p.a, p.b, p.n
    g = (a + n + 1 + s) / 2.0
    hp = HypParams([g, g, b + n], [float(n), a + b + n + 1])
    t = norm_sq(as_coords(z))
    if t >= 1.0:
        raise DomainError("I_s needs |z| < 1")
    prefactor = math.pi**n / math.factorial(n - 1) * beta(a + 1, b + n)
    return prefactor * float(np.real(hyp_pfq(hp, t, ctrl)))


def i_s_quadrature(z, s: float, p: SpaceParams, rule: QuadratureRule) -> float:
    """I_s(z) from the defining integral, as an independent check."""
    z = as_coords(z)
    a, b, n = p.a, p.b, p.n

    def integrand(w):
        r2 = norm_sq(w)
        return (1 - r2) ** a * r2**b / np.abs(1 - inner(z, w)) ** (a + n + 1 + s)

    return float(np.real(integrate_lebesgue(integrand, n, rule)))


@lru_cache(maxsize=256)
def _q_zero_free(p: SpaceParams) -> bool:
    from .zeros import has_zero_in_closed_disk

    return not has_zero_in_closed_disk(p)


def j_s_rule(p_weight: SpaceParams, radial: int = 192, angular: int = 512) -> QuadratureRule:
    """Default grid for J_s: Gauss-Jacobi radial nodes for the (c, d) weight."""
    plan = CircleNodes(angular) if p_weight.n == 1 else None
    return build_rule(p_weight, radial, plan)


def j_s(
    z,
    s: float,
    p_kernel: SpaceParams,
    p_weight: tuple[float, float] | SpaceParams,
    rule: QuadratureRule | None = None,
) -> float:
    """J_s(z) = int |Q(<z,w>)| (1-|w|^2)^c |w|^{2d} / |1 - <z,w>|^{c+n+1+s} dlambda(w).

    Refuses to run unless Q_{a,b} is zero-free on the closed unit disk.  For
    n = 1 the angular nodes of each ring are redistributed by a circle
    automorphism that clusters them at the peak direction arg z, which keeps
    the trapezoid rule accurate as |z| -> 1.
    """
    n = p_kernel.n
    if not isinstance(p_weight, SpaceParams):
        p_weight = SpaceParams(p_weight[0], p_weight[1], n)
    if p_weight.n != n:
        raise DomainError("kernel and weight parameters must share n")
    if not _q_zero_free(p_kernel):
        raise HypothesisViolation(f"Q_{{a,b}} has a zero in the closed disk for {p_kernel}")
    z = as_coords(z)
    rule = j_s_rule(p_weight) if rule is None else rule
    if rule.params != p_weight:
        raise DomainError("rule must be built for the weight parameters (c, d)")
    c = p_weight.a
    expo = c + n + 1 + s

    def integrand(w):
        ip = inner(w, z)
        return np.abs(q_ab(ip, p_kernel)) / np.abs(1 - ip) ** expo

    if n == 1 and isinstance(rule.sphere_plan, CircleNodes):
        return _j_s_circle(integrand, z, rule)
    grid = rule.sphere_weights[:, None] * rule.radial_weights[None, :]
    return float(np.sum(np.asarray(integrand(rule.points)) * grid))


def _j_s_circle(integrand: Func, z: np.ndarray, rule: QuadratureRule) -> float:
    m = rule.sphere_points.shape[0]
    u = 2.0 * math.pi * np.arange(m) / m
    rho = rule.radial_nodes * abs(z[0])
    # clustering strength: ring scale sqrt(1 - rho) balances the peak at u = 0
    # against the trough it creates at u = pi when the exponent is not 2
    lam = 1.0 - np.sqrt(1.0 - rho)
    eu = np.exp(1j * u)[:, None]
    e_theta = (eu + lam) / (1.0 + lam * eu)
    dtheta = (1.0 - lam**2) / np.abs(1.0 + lam * eu) ** 2
    phase = z[0] / abs(z[0]) if abs(z[0]) > 0 else 1.0
    pts = (rule.radial_nodes[None, :] * e_theta * phase)[..., None]
    vals = np.asarray(integrand(pts)) * dtheta
    return float(np.sum(vals * (2 * math.pi / m) * rule.radial_weights[None, :]))


def growth_radii(k_min: int = 4, k_max: int = 10) -> np.ndarray:
    """Radii with |z|^2 = 1 - 2^{-k}, k = k_min..k_max."""
    k = np.arange(k_min, k_max + 1)
    return np.sqrt(1.0 - 2.0 ** (-k.astype(float)))


@dataclass
class GrowthReport:
    s: float | None
    values: list[tuple[float, float]]
    regime: str
    exponent: float | None
    fit_quality: float
    residuals: dict[str, float] = field(default_factory=dict)
    ambiguous: bool = False

    def label(self) -> str:
        if self.regime == "power":
            return f"Power({self.exponent:.3g})"
        return self.regime.capitalize()


# exponents within this band of 0 are represented by the logarithmic model
_LOG_BAND = 0.1
_TAIL = 4


def _fit_offset(t: np.ndarray, v: np.ndarray, g: np.ndarray) -> tuple[float, float, np.ndarray]:
    x = np.stack([np.ones_like(t), g], axis=1)
    scale = 1.0 / np.abs(v)
    coef, *_ = np.linalg.lstsq(x * scale[:, None], v * scale, rcond=None)
    rel = (x @ coef - v) / v
    return float(np.sqrt(np.mean(rel**2))), float(np.max(np.abs(rel))), coef


def classify_growth(radii: Sequence[float], values: Sequence[float], s: float | None = None) -> GrowthReport:
    """Asymptotic regime of a sampled positive function as |z| -> 1.

    Each candidate A + B g(t), t = |z|^2, is fitted by relative least squares
    over the last four radii: g = log(1/(1-t)) (Logarithmic), (1-t)^{-e} with
    e >= 0.1 (Power(e)), or (1-t)^{e} with e >= 0.1 (Bounded, approaching a
    finite limit).  The smallest relative residual wins; the report is
    flagged ambiguous when the runner-up is within 10%.
    """
    r = np.asarray(radii, dtype=float)
    v = np.asarray(values, dtype=float)
    if r.size < 5 or r.size != v.size:
        raise DomainError("classify_growth needs at least 5 radii with one value each")
    if np.any(np.diff(r) <= 0):
        raise DomainError("radii must increase toward 1")
    pairs = list(zip(r.tolist(), v.tolist()))
    tail = slice(-_TAIL, None)
    t, vt = r[tail] ** 2, v[tail]
    if np.ptp(vt) <= 1e-12 * np.max(np.abs(vt)):
        return GrowthReport(s, pairs, "bounded", None, 0.0, {"bounded": 0.0})

    fits: dict[str, tuple[float, float, float | None]] = {}
    rms, worst, _ = _fit_offset(t, vt, np.log(1.0 / (1.0 - t)))
    fits["logarithmic"] = (rms, worst, None)
    for name, sign in (("power", -1.0), ("bounded", 1.0)):
        res = minimize_scalar(
            lambda e: _fit_offset(t, vt, (1.0 - t) ** (sign * e))[0],
            bounds=(_LOG_BAND, 3.0),
            method="bounded",
            options={"xatol": 1e-6},
        )
        rms, worst, _ = _fit_offset(t, vt, (1.0 - t) ** (sign * res.x))
        fits[name] = (rms, worst, float(res.x))
    order = sorted(fits, key=lambda k: fits[k][0])
    best, second = order[0], order[1]
    ambiguous = fits[second][0] <= 1.1 * fits[best][0]
    exponent = fits[best][2] if best == "power" else None
    return GrowthReport(
        s,
        pairs,
        best,
        exponent,
        fits[best][1],
        {k: fits[k][0] for k in fits},
        ambiguous,
    )


def i_s_growth(s: float, p: SpaceParams, direction=None, ks=(4, 10)) -> GrowthReport:
    radii = growth_radii(*ks)
    xi = np.eye(p.n, dtype=complex)[0] if direction is None else as_coords(direction)
    vals = [i_s(r * xi, s, p) for r in radii]
    return classify_growth(radii, vals, s)


def j_s_growth(s: float, p_kernel: SpaceParams, p_weight, rule=None, ks=(4, 10)) -> GrowthReport:
    radii = growth_radii(*ks)
    xi = np.eye(p_kernel.n, dtype=complex)[0]
    vals = [j_s(r * xi, s, p_kernel, p_weight, rule) for r in radii]
    return classify_growth(radii, vals, s)


# ---------------------------------------------------------------- mean oscillation

# variances below -_VAR_SLACK are treated as quadrature failure
_VAR_SLACK = 1e-12


def mean_oscillation(f: Func, z, p: SpaceParams, rule: QuadratureRule) -> float:
    """MO(f)(z) = sqrt(B|f|^2(z) - |Bf(z)|^2)."""
    w = berezin_weights(z, p, rule)
    vals = np.asarray(f(rule.points))
    mean = np.sum(vals * w)
    var = float(np.sum(np.abs(vals) ** 2 * w) - abs(mean) ** 2)
    if var < -_VAR_SLACK:
        raise InconsistencyError(f"negative variance {var:.3e} in mean oscillation")
    return math.sqrt(max(var, 0.0))


def mean_oscillation_double(f: Func, z, p: SpaceParams, rule: QuadratureRule) -> float:
    """MO(f)(z)^2 from the symmetric double integral over a tensor grid."""
    w = berezin_weights(z, p, rule).ravel()
    vals = np.asarray(f(rule.points)).ravel()
    diff = np.abs(vals[:, None] - vals[None, :]) ** 2
    return float(0.5 * w @ diff @ w)


def bmo_norm_estimate(f: Func, sample, p: SpaceParams, rule: QuadratureRule) -> float:
    """max of MO(f) over the sample: a lower bound for the BMO norm."""
    pts = [as_coords(z) for z in sample]
    if not pts:
        raise DomainError("sample must be nonempty")
    return max(mean_oscillation(f, z, p, rule) for z in pts)


def conditions_C(kernel_params: tuple[float, float], target_params: tuple[float, float], p: float, n: int = 1) -> bool:
    """The parameter inequalities for L^p boundedness of the projection."""
    a, b = kernel_params
    c, d = target_params
    if not (a > -1 and c > -1 and b > -n and d > -n and p >= 1):
        raise DomainError("conditions_C: parameters outside their admissible ranges")
    if not c + 1 < p * (a + 1):
        return False
    if p > 1:
        return d + n < p * (b + n)
    return d <= b


def moment_matrix(p: SpaceParams, max_bidegree: int = 2) -> np.ndarray:
    """Matrix of int w^j conj(w)^k conj(w^alpha) w^gamma dmu for n = 1.

    Rows index test pairs (alpha, gamma), columns index monomials w^j conj(w)^k,
    all exponents <= max_bidegree.  A nonsingular matrix means no nonzero
    polynomial of that bidegree is annihilated by these Berezin moments.
    """
    from .ball import monomial_ball_moment

    if p.n != 1:
        raise DomainError("moment_matrix is implemented for n = 1")
    idx = [(j, k) for j in range(max_bidegree + 1) for k in range(max_bidegree + 1)]
    mat = np.zeros((len(idx), len(idx)))
    for row, (al, ga) in enumerate(idx):
        for col, (j, k) in enumerate(idx):
            # w^{j+ga} conj(w)^{k+al}
            mat[row, col] = monomial_ball_moment((j + ga,), (k + al,), p)
    return mat
