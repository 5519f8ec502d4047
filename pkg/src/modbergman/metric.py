"""The Bergman-Poincare metric of the weighted space.

The metric is the Levi form of psi(z) = log K(|z|^2):

    <A(z) xi, xi> = g'(t) |<xi, z>|^2 + g(t) |xi|^2,   g = K'/K,  t = |z|^2.

Distances are only ever reported as upper bounds, from lengths of
optimized polylines.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .ball import SpaceParams, as_coords, inner, norm_sq
from .errors import DomainError
from .kernel import kernel_derivative_values, kernel_derivs, kernel_values
from .operators import berezin, mean_oscillation
from .quadrature import QuadratureRule, integrate_mu
from .specfun import DEFAULT_CONTROL, SeriesControl

Path = Callable[[np.ndarray], np.ndarray]

# step of the 4th-order central difference for curve velocities
FD_STEP = 1e-3
_GL_NODES = 8
# controls of an optimized polyline keep this clearance from the sphere
_CLEARANCE = 1e-6


@dataclass(frozen=True)
class HermitianMatrix:
    entries: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=complex)
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise DomainError("HermitianMatrix needs a square array")
        if not np.allclose(e, e.conj().T, rtol=0, atol=1e-14 * max(1.0, np.abs(e).max())):
            raise DomainError("matrix is not Hermitian")
        object.__setattr__(self, "entries", e)

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.entries)))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)

    def form(self, xi) -> float:
        """sum_{j,k} entries[j][k] xi_j conj(xi_k)."""
        xi = as_coords(xi)
        return float(np.real(xi @ self.entries @ np.conj(xi)))


def _log_derivs(t, p: SpaceParams, ctrl: SeriesControl):
    k0, k1, k2 = kernel_derivs(t, p, ctrl)
    g = k1 / k0
    return g, k2 / k0 - g * g


def hessian(z, p: SpaceParams, ctrl: SeriesControl = DEFAULT_CONTROL) -> HermitianMatrix:
    """entries[j][k] = g'(t) conj(z_j) z_k + g(t) delta_jk."""
    z = as_coords(z)
    if z.size != p.n:
        raise DomainError("point dimension does not match n")
    t = norm_sq(z)
    if t >= 1.0:
        raise DomainError("hessian needs |z| < 1")
    g, dg = _log_derivs(t, p, ctrl)
    m = dg * np.outer(np.conj(z), z)
    m = 0.5 * (m + m.conj().T) + g * np.eye(p.n)
    return HermitianMatrix(m)


def quadratic_form(z, xi, p: SpaceParams, ctrl: SeriesControl = DEFAULT_CONTROL):
    """<A(z) xi, xi>, broadcasting over leading axes of z and xi."""
    z = as_coords(z)
    xi = as_coords(xi)
    t = norm_sq(z)
    g, dg = _log_derivs(t, p, ctrl)
    out = dg * np.abs(inner(xi, z)) ** 2 + g * norm_sq(xi)
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------- curves

class Curve:
    """A curve [0, 1] -> B_n given by samples, optionally with a smooth path.

    Without ``path`` the curve is the polyline through the samples and its
    velocity is exact on each piece.  With ``path`` the velocity comes from
    ``derivative`` when given, else from 4th-order central differences; the
    path must then be defined on a small neighbourhood of [0, 1].
    """

    def __init__(self, ts, points, path: Path | None = None, derivative: Path | None = None):
        ts = np.asarray(ts, dtype=float)
        pts = np.asarray([as_coords(q) for q in points], dtype=complex)
        if ts.ndim != 1 or ts.size < 2 or ts.size != pts.shape[0]:
            raise DomainError("a curve needs at least two samples with matching times")
        if ts[0] != 0.0 or ts[-1] != 1.0 or np.any(np.diff(ts) <= 0):
            raise DomainError("sample times must increase strictly from 0 to 1")
        if np.any(norm_sq(pts) >= 1.0):
            raise DomainError("curve samples must lie in the open ball")
        self.ts = ts
        self.points = pts
        self.path = path
        self._derivative = derivative

    @classmethod
    def from_function(cls, path: Path, samples: int = 16, derivative: Path | None = None) -> "Curve":
        ts = np.linspace(0.0, 1.0, samples + 1)
        pts = np.asarray(path(ts), dtype=complex).reshape(ts.size, -1)
        return cls(ts, pts, path, derivative)

    @classmethod
    def polyline(cls, points) -> "Curve":
        pts = [as_coords(q) for q in points]
        return cls(np.linspace(0.0, 1.0, len(pts)), pts)

    @property
    def n(self) -> int:
        return self.points.shape[1]

    def refined(self, factor: int = 2) -> "Curve":
        """Same path with ``factor`` times as many samples (smooth curves only)."""
        if self.path is None:
            raise DomainError("only curves with a path can be refined")
        return Curve.from_function(self.path, (self.ts.size - 1) * factor, self._derivative)

    def reversed(self) -> "Curve":
        if self.path is None:
            return Curve(1.0 - self.ts[::-1], self.points[::-1])
        path, der = self.path, self._derivative
        rev_der = None if der is None else (lambda t: -np.asarray(der(1.0 - np.asarray(t))))
        return Curve(1.0 - self.ts[::-1], self.points[::-1], lambda t: path(1.0 - np.asarray(t)), rev_der)

    def _piece(self, t: np.ndarray) -> np.ndarray:
        return np.clip(np.searchsorted(self.ts, t, side="right") - 1, 0, self.ts.size - 2)

    def point(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.path is not None:
            return np.asarray(self.path(t), dtype=complex).reshape(t.shape + (self.n,))
        i = self._piece(t)
        s = ((t - self.ts[i]) / (self.ts[i + 1] - self.ts[i]))[..., None]
        return self.points[i] * (1 - s) + self.points[i + 1] * s

    def velocity(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.path is None:
            i = self._piece(t)
            return (self.points[i + 1] - self.points[i]) / (self.ts[i + 1] - self.ts[i])[..., None]
        if self._derivative is not None:
            return np.asarray(self._derivative(t), dtype=complex).reshape(t.shape + (self.n,))
        h = FD_STEP
        f = self.point
        return (8 * (f(t + h) - f(t - h)) - (f(t + 2 * h) - f(t - 2 * h))) / (12 * h)


def _gauss_legendre(m: int):
    x, w = np.polynomial.legendre.leggauss(m)
    return 0.5 * (x + 1.0), 0.5 * w


def curve_length(c: Curve, p: SpaceParams, ctrl: SeriesControl = DEFAULT_CONTROL, nodes: int = _GL_NODES) -> float:
    """Integral of <A(g) g', g'>^{1/2} dt, Gauss-Legendre on each sample interval."""
    x, w = _gauss_legendre(nodes)
    t0, t1 = c.ts[:-1, None], c.ts[1:, None]
    t = t0 + (t1 - t0) * x[None, :]
    weights = (t1 - t0) * w[None, :]
    if c.path is None:
        # evaluate each linear piece from its own endpoints
        a, b = c.points[:-1, None, :], c.points[1:, None, :]
        pts = a + (b - a) * x[None, :, None]
        vel = np.broadcast_to((b - a) / (t1 - t0)[..., None], pts.shape)
    else:
        pts, vel = c.point(t), c.velocity(t)
    q = quadratic_form(pts, vel, p, ctrl)
    return float(np.sum(np.sqrt(np.maximum(q, 0.0)) * weights))


# ---------------------------------------------------------------- distance

@dataclass(frozen=True)
class PathResult:
    length: float
    straight_length: float
    points: np.ndarray

    def curve(self) -> Curve:
        return Curve.polyline(self.points)


def _canonical_key(z: np.ndarray) -> tuple:
    return tuple(np.concatenate([z.real, z.imag]).tolist())


def _polyline_length(pts: np.ndarray, p: SpaceParams, ctrl: SeriesControl) -> float:
    return curve_length(Curve.polyline(pts), p, ctrl)


def optimize_path(z, w, p: SpaceParams, k_control: int = 3, iters: int = 40,
                  ctrl: SeriesControl = DEFAULT_CONTROL) -> PathResult:
    """Best polyline from z to w found by coordinate descent on the controls.

    Endpoints are put in a canonical order first, so swapping z and w gives
    the same optimization and the same length.  The returned points run from
    the original z to the original w.
    """
    z, w = as_coords(z), as_coords(w)
    if norm_sq(z) >= 1.0 or norm_sq(w) >= 1.0:
        raise DomainError("endpoints must lie in the open ball")
    swap = _canonical_key(w) < _canonical_key(z)
    u, v = (w, z) if swap else (z, w)
    straight = _polyline_length(np.stack([u, v]), p, ctrl)
    if np.array_equal(u, v):
        return PathResult(0.0, 0.0, np.stack([z, w]))
    s = np.linspace(0.0, 1.0, k_control + 2)[:, None]
    pts = u[None, :] * (1 - s) + v[None, :] * s
    best = _polyline_length(pts, p, ctrl)
    step = 0.1 * float(np.linalg.norm(u - v))
    n = p.n
    for _ in range(iters):
        if step < 1e-9:
            break
        improved = False
        for i in range(1, k_control + 1):
            for coord in range(2 * n):
                delta = step if coord < n else 1j * step
                for sign in (1.0, -1.0):
                    trial = pts.copy()
                    trial[i, coord % n] += sign * delta
                    if norm_sq(trial[i]) >= (1.0 - _CLEARANCE) ** 2:
                        continue
                    val = _polyline_length(trial, p, ctrl)
                    if val < best:
                        best, pts, improved = val, trial, True
                        break
        if not improved:
            step *= 0.5
    if straight <= best:
        best = straight
        pts = np.stack([u, v])
    if swap:
        pts = pts[::-1]
    return PathResult(best, straight, pts)


def distance_upper(z, w, p: SpaceParams, k_control: int = 3, iters: int = 40,
                   ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Upper bound for d_{a,b}(z, w): length of the best polyline found."""
    return optimize_path(z, w, p, k_control, iters, ctrl).length


# ---------------------------------------------------------------- consistency checks

def projection_residual_check(c: Curve, t: float, p: SpaceParams, rule: QuadratureRule) -> tuple[float, float]:
    """(|| (I - P_g) d/dt kappa_g ||^2, <A(g) g', g'>) at g = c(t).

    The left side is the quadrature of |H - G|^2 with
        H(zeta) = <zeta, g'> K'(<zeta, g>) / K(|g|^2)^{1/2},
        G(zeta) = K(<zeta, g>) K'(|g|^2) <g, g'> / K(|g|^2)^{3/2},
    where G is the component of H along kappa_g.
    """
    g = c.point(np.asarray(t)).reshape(p.n)
    dg = c.velocity(np.asarray(t)).reshape(p.n)
    tt = norm_sq(g)
    k0, k1, _ = kernel_derivs(tt, p)
    along = inner(g, dg)

    def residual(zeta):
        ip = inner(zeta, g)
        h = inner(zeta, dg) * kernel_derivative_values(ip, p) / math.sqrt(k0)
        gg = kernel_values(ip, p) * k1 * along / k0**1.5
        return np.abs(h - gg) ** 2

    lhs = float(np.real(integrate_mu(residual, p, rule)))
    return lhs, float(quadratic_form(g, dg, p))


def berezin_derivative_check(f, c: Curve, t: float, p: SpaceParams, rule: QuadratureRule,
                             h: float = 1e-4) -> tuple[float, float]:
    """(|d/dt B f(g(t))|, 2 MO(f)(g(t)) <A g', g'>^{1/2}); the first should not exceed the second."""
    bp = berezin(f, c.point(np.asarray(t + h)).reshape(p.n), p, rule)
    bm = berezin(f, c.point(np.asarray(t - h)).reshape(p.n), p, rule)
    lhs = abs(bp - bm) / (2 * h)
    g = c.point(np.asarray(t)).reshape(p.n)
    dg = c.velocity(np.asarray(t)).reshape(p.n)
    rhs = 2.0 * mean_oscillation(f, g, p, rule) * math.sqrt(max(quadratic_form(g, dg, p), 0.0))
    return lhs, rhs


# inflation applied to the sampled MO maximum along the path
BMO_INFLATION = 1.1


def lipschitz_check(f, z, w, p: SpaceParams, rule: QuadratureRule, k_control: int = 3,
                    iters: int = 40, mo_samples: int = 64) -> tuple[float, float]:
    """(|B f(z) - B f(w)|, 2 x bmo_upper x distance_upper(z, w)).

    bmo_upper is 1.1 times the largest mean oscillation sampled densely along
    the optimized path, which is all the integrated form of the derivative
    bound needs.
    """
    z, w = as_coords(z), as_coords(w)
    gap = abs(berezin(f, z, p, rule) - berezin(f, w, p, rule))
    res = optimize_path(z, w, p, k_control, iters)
    if res.length == 0.0:
        return gap, 0.0
    curve = res.curve()
    ts = np.linspace(0.0, 1.0, mo_samples + 1)
    pts = curve.point(ts)
    mo = max(mean_oscillation(f, q, p, rule) for q in pts)
    return gap, 2.0 * BMO_INFLATION * mo * res.length
