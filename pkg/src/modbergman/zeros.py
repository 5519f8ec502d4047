"""Zeros of Q_{a,b} in the closed unit disk.

Terminating cases are solved as polynomials (Aberth-Ehrlich); the general
case is handled by argument-principle counting on circles and on annular
sectors, with Newton refinement inside boxes holding a single zero.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.special import hyp2f1 as _scipy_hyp2f1

from .ball import SpaceParams
from .errors import DomainError, NonConvergenceError, ZeroOnContour
from .kernel import q_ab, q_ab_derivative, q_params

ComplexFn = Callable[[np.ndarray], np.ndarray]

# deterministic radius nudges tried when a zero sits on the contour
_NUDGE = 1e-4
_NUDGE_ATTEMPTS = 8
_MAX_NODES = 2**16
# distance (Newton estimate |Q/Q'|) below which a zero counts as on the contour
_CONTOUR_CLEARANCE = 1e-6
# start angle for subdivision, chosen away from the real axis
_THETA0 = 0.1234567 * math.pi


@dataclass(frozen=True)
class PolyC:
    """Polynomial sum_k c_k (z - center)^k with complex coefficients, ascending."""

    coefficients: tuple[complex, ...]
    center: complex = 0j

    def __init__(self, coefficients: Sequence[complex], center: complex = 0j):
        c = [complex(x) for x in coefficients]
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        if not c or (len(c) == 1 and c[0] == 0):
            raise DomainError("the zero polynomial has no well-defined roots")
        object.__setattr__(self, "coefficients", tuple(c))
        object.__setattr__(self, "center", complex(center))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def max_coef(self) -> float:
        return max(abs(c) for c in self.coefficients)

    def __call__(self, z):
        w = np.asarray(z, dtype=complex) - self.center
        return np.polyval(np.array(self.coefficients[::-1]), w)

    def derivative(self):
        if self.degree == 0:
            return _ZeroPoly()
        return PolyC([k * c for k, c in enumerate(self.coefficients)][1:], self.center)


class _ZeroPoly:
    degree = -1

    def __call__(self, z):
        return np.zeros(np.shape(z), dtype=complex)


@dataclass
class RootReport:
    roots: list[complex]
    residuals: list[float]
    disk_count: int | None
    method: str
    disk_radius: float = 1.0
    flags: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.flags

    def inside(self, radius: float | None = None) -> list[complex]:
        r = self.disk_radius if radius is None else radius
        return [z for z in self.roots if abs(z) < r]


@dataclass(frozen=True)
class LemniscateSpec:
    tau: float

    def __post_init__(self):
        if not self.tau > 0:
            raise DomainError("tau must be positive")

    @property
    def level(self) -> float:
        t = self.tau
        return math.exp(t * math.log(t) - (1 + t) * math.log(1 + t))

    @property
    def node(self) -> float:
        """Self-intersection point tau/(tau+1); the loop lies in Re z > node."""
        return self.tau / (self.tau + 1.0)

    def modulus(self, z):
        z = np.asarray(z, dtype=complex)
        return np.abs(z) ** self.tau * np.abs(z - 1.0)


# ---------------------------------------------------------------- polynomials

def _exact_coefficients(p: SpaceParams) -> list[Fraction]:
    # the float parameters are dyadic rationals, so this is exact
    b, m, d = Fraction(p.b), -(Fraction(p.a) + 1), Fraction(p.b) + p.n
    out = [Fraction(1)]
    j = 0
    while True:
        num = (b + j) * (m + j)
        if num == 0:
            return out
        out.append(out[-1] * num / ((d + j) * (j + 1)))
        j += 1


@lru_cache(maxsize=128)
def q_poly_coeffs(p: SpaceParams, center: float | None = 0.0) -> PolyC:
    """Coefficients of Q_{a,b} about ``center`` when its series terminates.

    The expansion is computed in exact rational arithmetic and rounded once.
    ``center=None`` selects the centroid of the roots, -c_{d-1} / (d c_d); in
    that basis the coefficients no longer cancel catastrophically, which the
    monomial basis does for high-degree cases whose roots lie near 1.
    """
    if q_params(p).terminating_index() is None:
        raise DomainError(f"Q_{{a,b}} does not terminate for {p}")
    c = _exact_coefficients(p)
    deg = len(c) - 1
    if center is None:
        center = float(-c[deg - 1] / (deg * c[deg])) if deg else 0.0
    x0 = Fraction(center)
    if x0 == 0:
        return PolyC([float(x) for x in c])
    shifted = [sum(c[j] * math.comb(j, k) * x0 ** (j - k) for j in range(k, deg + 1)) for k in range(deg + 1)]
    return PolyC([float(x) for x in shifted], float(x0))


def _aberth(coef: np.ndarray, max_iter: int) -> tuple[np.ndarray, bool]:
    deg = coef.size - 1
    c = coef[::-1]
    dc = np.polyder(c)
    # initial radius from the geometric mean of root moduli
    rad = abs(coef[0] / coef[-1]) ** (1.0 / deg) if coef[0] != 0 else 1.0
    rad = rad if rad > 0 else 1.0
    k = np.arange(deg)
    z = rad * np.exp(1j * (2 * math.pi * k / deg + 0.4)) * (1 + 0.01 * np.cos(3 * k))
    active = np.ones(deg, dtype=bool)
    for _ in range(max_iter):
        idx = np.nonzero(active)[0]
        za = z[idx]
        pz = np.polyval(c, za)
        dpz = np.polyval(dc, za)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = pz / dpz
            diff = za[:, None] - z[None, :]
            diff[np.arange(idx.size), idx] = np.inf
            corr = ratio / (1.0 - ratio * np.sum(1.0 / diff, axis=1))
        corr = np.where(np.isfinite(corr), corr, 0.0)
        z[idx] = za - corr
        # a root is frozen once |p| is at the rounding level of Horner's rule
        bound = np.polyval(np.abs(c), np.abs(za))
        small = np.abs(corr) <= 1e-15 * np.maximum(np.abs(z[idx]), 1e-300)
        active[idx] = ~(small | (np.abs(pz) <= 4 * np.finfo(float).eps * bound))
        if not active.any():
            return z, True
    return z, False


def _newton_polish(poly: PolyC, z: complex, steps: int = 3) -> complex:
    dp = poly.derivative()
    best, best_res = z, abs(poly(z))
    for _ in range(steps):
        d = dp(best)
        if d == 0:
            break
        cand = best - poly(best) / d
        res = abs(poly(cand))
        if res >= best_res:
            break
        best, best_res = complex(cand), res
    return best


def poly_roots(q: PolyC, max_iter: int = 500) -> RootReport:
    """All roots of q by Aberth-Ehrlich iteration plus Newton polishing."""
    if q.degree < 1:
        raise DomainError("poly_roots needs degree >= 1")
    coef = np.array(q.coefficients, dtype=complex)
    flags: list[str] = []
    if q.degree == 1:
        roots = np.array([-coef[0] / coef[1]])
    else:
        roots, converged = _aberth(coef, max_iter)
        if not converged:
            flags.append(f"aberth iteration cap {max_iter} reached")
    roots = roots + q.center
    roots = [_newton_polish(q, complex(r)) for r in roots]
    residuals = [float(abs(q(r))) for r in roots]
    if max(residuals) > 1e-9 * q.max_coef:
        flags.append("residual above 1e-9 x max coefficient")
    dq = q.derivative()
    try:
        count, radius = _count_with_nudge(lambda z: q(z), lambda z: dq(z), 1.0)
    except (ZeroOnContour, NonConvergenceError) as exc:
        flags.append(f"disk count failed: {exc}")
        count, radius = None, 1.0
    report = RootReport(roots, residuals, count, "PolynomialSolve", radius, flags)
    if count is not None and count != len(report.inside()):
        flags.append(f"winding count {count} disagrees with {len(report.inside())} roots inside")
    return report


# ---------------------------------------------------------------- argument principle

def _q_funcs(p: SpaceParams) -> tuple[ComplexFn, ComplexFn]:
    try:
        poly = q_poly_coeffs(p, None)
    except DomainError:
        return (lambda z: q_ab(z, p)), (lambda z: q_ab_derivative(z, p))
    dpoly = poly.derivative()
    return poly, dpoly


def winding_on_circle(f: ComplexFn, df: ComplexFn, radius: float, nodes: int = 256) -> int:
    """Zeros of f inside |z| = radius by the trapezoid rule on f'/f z dtheta.

    Nodes double until the raw value is within 0.1 of an integer and agrees
    with the previous level.
    """
    if radius <= 0:
        raise DomainError("radius must be positive")
    prev = None
    m = max(int(nodes), 8)
    while m <= _MAX_NODES:
        z = radius * np.exp(1j * (_THETA0 + 2 * math.pi * np.arange(m) / m))
        fz = np.asarray(f(z))
        dfz = np.asarray(df(z))
        with np.errstate(divide="ignore", invalid="ignore"):
            dist = np.abs(fz) / np.abs(dfz)
        if np.any(dist < _CONTOUR_CLEARANCE * max(radius, 1.0)) or np.any(fz == 0):
            raise ZeroOnContour(f"zero within {_CONTOUR_CLEARANCE} of |z| = {radius}")
        raw = np.mean(dfz / fz * z)
        k = round(raw.real)
        if abs(raw - k) < 0.1:
            if prev == k:
                return int(k)
            prev = k
        else:
            prev = None
        m *= 2
    # the trapezoid error decays like exp(-m d) for a zero at distance d, so
    # failure at the cap means a zero lies within about 1e-4 of the contour
    raise ZeroOnContour(f"winding number not integral with {_MAX_NODES} nodes at radius {radius}")


def _count_with_nudge(f: ComplexFn, df: ComplexFn, radius: float, nodes: int = 256,
                      max_radius: float | None = None) -> tuple[int, float]:
    """Winding count at radius, nudged by multiples of 1e-4 off a contour zero.

    Nudged radii at or beyond ``max_radius`` are skipped, so a count meant for
    the open unit disk never picks up zeros on the circle itself.
    """
    last: Exception | None = ZeroOnContour(f"no admissible radius near {radius}")
    for j in range(_NUDGE_ATTEMPTS + 1):
        # 0, +1, -1, +2, -2, ... nudges
        step = (j + 1) // 2 * (1 if j % 2 else -1)
        r = radius + step * _NUDGE
        if step and max_radius is not None and r >= max_radius:
            continue
        try:
            return winding_on_circle(f, df, r, nodes), r
        except ZeroOnContour as exc:
            last = exc
    raise last  # type: ignore[misc]


def count_zeros_disk(p: SpaceParams, radius: float, nodes: int = 256) -> int:
    """Number of zeros of Q_{a,b} in |z| < radius (argument principle)."""
    f, df = _q_funcs(p)
    return _count_with_nudge(f, df, radius, nodes, max_radius=1.0 if radius < 1.0 else None)[0]


def _sector_edges(r0, r1, t0, t1, m):
    """Closed counterclockwise boundary of an annular sector; r0 = 0 gives a pie slice."""
    s = np.linspace(0.0, 1.0, m, endpoint=False)
    outer = r1 * np.exp(1j * (t0 + (t1 - t0) * s))
    left = (r1 + (r0 - r1) * s) * np.exp(1j * t1)
    right = (r0 + (r1 - r0) * s) * np.exp(1j * t0)
    if r0 == 0.0:
        return np.concatenate([outer, left, right])
    inner = r0 * np.exp(1j * (t1 + (t0 - t1) * s))
    return np.concatenate([outer, left, inner, right])


def _sector_count(f: ComplexFn, df: ComplexFn, box) -> int:
    """Winding number of f around an annular sector by phase unwrapping."""
    r0, r1, t0, t1 = box
    m = 32
    while m <= _MAX_NODES // 4:
        z = _sector_edges(r0, r1, t0, t1, m)
        fz = np.asarray(f(z))
        dfz = np.asarray(df(z))
        scale = max(r1 - r0, r1 * (t1 - t0), 1e-300)
        with np.errstate(divide="ignore", invalid="ignore"):
            dist = np.abs(fz) / np.abs(dfz)
        if np.any(fz == 0) or np.any(dist < 1e-9 * scale):
            raise ZeroOnContour("zero on a subdivision edge")
        steps = np.angle(np.roll(fz, -1) / fz)
        if np.max(np.abs(steps)) < 0.5:
            return int(round(steps.sum() / (2 * math.pi)))
        m *= 2
    raise ZeroOnContour("phase unwrapping did not resolve a subdivision edge")


def _newton(f: ComplexFn, df: ComplexFn, z: complex, iters: int = 60) -> complex | None:
    for _ in range(iters):
        d = complex(df(z))
        if d == 0:
            return None
        step = complex(f(z)) / d
        z = z - step
        if not np.isfinite(z) or abs(z) > 1.5:
            return None
        if abs(step) <= 1e-15 * max(abs(z), 1.0):
            return z
    return z


def _in_box(z: complex, box, slack: float) -> bool:
    r0, r1, t0, t1 = box
    r = abs(z)
    if not (r0 - slack <= r <= r1 + slack):
        return False
    t = (math.atan2(z.imag, z.real) - t0) % (2 * math.pi) + t0
    return t0 - slack <= t <= t1 + slack or (r < slack)


_SPLIT_FRACTIONS = (0.5, 0.4621, 0.5377, 0.4133, 0.5871)


def find_zeros_disk(p: SpaceParams, radius: float = 1.0 - 1e-6, depth_cap: int = 40) -> RootReport:
    """Zeros of Q_{a,b} in |z| < radius by recursive quadrisection of polar boxes."""
    f, df = _q_funcs(p)
    flags: list[str] = []
    total, radius = _count_with_nudge(f, df, radius, max_radius=1.0 if radius < 1.0 else None)
    roots: list[complex] = []
    if total:
        top = (0.0, radius, _THETA0, _THETA0 + 2 * math.pi)
        stack = [(top, total, 0)]
        while stack:
            box, cnt, depth = stack.pop()
            r0, r1, t0, t1 = box
            diam = max(r1 - r0, r1 * (t1 - t0))
            if cnt == 1:
                c = 0.5 * (r0 + r1) * np.exp(1j * 0.5 * (t0 + t1))
                z = _newton(f, df, complex(c))
                if z is not None and _in_box(z, box, 1e-9):
                    roots.append(z)
                    continue
            if depth >= depth_cap or diam < 1e-13:
                c = 0.5 * (r0 + r1) * np.exp(1j * 0.5 * (t0 + t1))
                roots.extend([complex(c)] * cnt)
                flags.append(f"unresolved box of size {diam:.2e} holding {cnt} zero(s)")
                continue
            children = _split(f, df, box, cnt)
            if children is None:
                flags.append("subdivision failed: zero on every trial edge")
                continue
            for child, ccount in children:
                if ccount:
                    stack.append((child, ccount, depth + 1))
    roots.sort(key=lambda z: (round(z.real, 12), z.imag))
    residuals = [float(abs(f(z))) for z in roots]
    return RootReport(roots, residuals, total, "ContourSubdivision", radius, flags)


def _split(f, df, box, cnt):
    r0, r1, t0, t1 = box
    for fr in _SPLIT_FRACTIONS:
        rm = r0 + fr * (r1 - r0)
        tm = t0 + (1.0 - fr) * (t1 - t0)
        kids = [
            (r0, rm, t0, tm), (r0, rm, tm, t1),
            (rm, r1, t0, tm), (rm, r1, tm, t1),
        ]
        try:
            counts = [_sector_count(f, df, k) for k in kids]
        except ZeroOnContour:
            continue
        if sum(counts) == cnt and min(counts) >= 0:
            return list(zip(kids, counts))
    return None


# ---------------------------------------------------------------- hypothesis checks

@dataclass(frozen=True)
class ZeroCheck:
    has_zero: bool
    interior_count: int
    boundary_min: float
    boundary_heuristic: bool

    def as_dict(self) -> dict:
        return {
            "has_zero": self.has_zero,
            "interior_count": self.interior_count,
            "boundary_min_abs_q": self.boundary_min,
            "boundary_heuristic": self.boundary_heuristic,
        }


def boundary_min_abs_q(p: SpaceParams, nodes: int = 4096) -> float:
    """min |Q_{a,b}| over equally spaced points of the unit circle."""
    z = np.exp(2j * math.pi * np.arange(nodes) / nodes)
    try:
        vals = q_poly_coeffs(p, None)(z)
    except DomainError:
        # the series converges on |z| = 1 only algebraically; scipy's
        # transformation-based 2F1 is used for this coarse screen
        vals = _scipy_hyp2f1(p.b, -(p.a + 1.0), p.b + p.n, z)
    return float(np.min(np.abs(vals)))


def zero_check(p: SpaceParams) -> ZeroCheck:
    """Interior count at radius 1 - 1e-6 plus the boundary min-|Q| screen."""
    f, df = _q_funcs(p)
    count, _ = _count_with_nudge(f, df, 1.0 - 1e-6, max_radius=1.0)
    bmin = boundary_min_abs_q(p)
    heuristic = bmin < 1e-8
    return ZeroCheck(count > 0 or heuristic, count, bmin, heuristic)


def has_zero_in_closed_disk(p: SpaceParams) -> bool:
    return zero_check(p).has_zero


@dataclass(frozen=True)
class BScan:
    a: float
    n: int
    radius: float
    samples: tuple[tuple[float, int], ...]

    def transition(self) -> tuple[float, float] | None:
        """Adjacent b values where the count changes from 0 to positive, scanning down."""
        ordered = sorted(self.samples, key=lambda s: -s[0])
        for (b_hi, c_hi), (b_lo, c_lo) in zip(ordered, ordered[1:]):
            if c_hi == 0 and c_lo > 0:
                return (b_lo, b_hi)
        return None


def scan_b(a: float, n: int, bs: Sequence[float], radius: float = 0.999) -> BScan:
    """Empirical zero counts of Q_{a,b} in |z| < radius over a grid of b."""
    out = []
    for b in bs:
        out.append((float(b), count_zeros_disk(SpaceParams(a, b, n), radius)))
    return BScan(float(a), int(n), float(radius), tuple(out))


# ---------------------------------------------------------------- lemniscate

def lemniscate_points(spec: LemniscateSpec, count: int = 1024) -> tuple[list[complex], list[float]]:
    """Points of the loop |z^tau (z-1)| = level, Re z > tau/(tau+1).

    Rays leave the node at angles in (-pi/4, pi/4); each one starts inside the
    loop and the first sign change of the level function is bisected.
    Returns the points and the ray angles that failed to bracket.
    """
    if count < 16:
        raise DomainError("lemniscate_points needs count >= 16")
    z0, level = spec.node, spec.level
    angles = -math.pi / 4 + (np.arange(count) + 0.5) * (math.pi / 2) / count
    rho = np.geomspace(1e-6, 4.0, 400)
    pts: list[complex] = []
    skipped: list[float] = []
    for phi in angles:
        e = complex(math.cos(phi), math.sin(phi))
        g = spec.modulus(z0 + rho * e) - level
        idx = np.nonzero((g[:-1] < 0) & (g[1:] >= 0))[0]
        if idx.size == 0:
            skipped.append(float(phi))
            continue
        lo, hi = rho[idx[0]], rho[idx[0] + 1]
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if spec.modulus(z0 + mid * e) - level < 0:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-16 * hi:
                break
        pts.append(z0 + 0.5 * (lo + hi) * e)
    return pts, skipped


@dataclass(frozen=True)
class ClusterStats:
    count: int
    median: float | None
    max: float | None
    count_in_disk: int
    median_in_disk: float | None
    max_in_disk: float | None


def _stats(d: np.ndarray) -> tuple[float | None, float | None]:
    if d.size == 0:
        return None, None
    return float(np.median(d)), float(np.max(d))


def cluster_distance(
    report: RootReport | Sequence[complex], spec: LemniscateSpec, curve_count: int = 1024
) -> ClusterStats:
    """Distances from roots with Re z > tau/(tau+1) to the sampled loop."""
    if curve_count < 512:
        raise DomainError("cluster_distance needs at least 512 curve samples")
    roots = report.roots if isinstance(report, RootReport) else list(report)
    curve, _ = lemniscate_points(spec, curve_count)
    curve = np.asarray(curve)
    qual = np.array([z for z in roots if z.real > spec.node], dtype=complex)
    if qual.size == 0:
        return ClusterStats(0, None, None, 0, None, None)
    d = np.min(np.abs(qual[:, None] - curve[None, :]), axis=1)
    inside = np.abs(qual) <= 1.0
    med, mx = _stats(d)
    med_in, mx_in = _stats(d[inside])
    return ClusterStats(int(qual.size), med, mx, int(inside.sum()), med_in, mx_in)
