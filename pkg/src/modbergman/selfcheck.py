"""Quick invariant suite run by ``modbergman selfcheck``."""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .ball import SpaceParams, moebius, multi_indices, norm_sq, one_minus_phi_sq
from .kernel import basis_fn, kernel_scalar, q_ab, q_at_one_closed_form
from .metric import hessian, projection_residual_check, Curve
from .operators import i_s, i_s_growth, i_s_quadrature, project
from .quadrature import build_rule, inner_product
from .zeros import LemniscateSpec, cluster_distance, count_zeros_disk, poly_roots, q_poly_coeffs


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def _q_root() -> tuple[bool, str]:
    p = SpaceParams(10, -1, 2)
    rep = poly_roots(q_poly_coeffs(p, None))
    inside = rep.inside(1.0)
    ok = len(inside) == 1 and abs(inside[0] + 1 / 11) <= 1e-9 and count_zeros_disk(p, 0.99) == 1
    return ok, f"roots in disk {inside}"


def _classical_kernel() -> tuple[bool, str]:
    worst = 0.0
    xs = 0.9 * np.sqrt(np.linspace(0, 1, 10))[:, None] * np.exp(2j * np.pi * np.arange(10) / 10)[None, :]
    for a in (0.0, 0.5, 2.0):
        p = SpaceParams(a, 0.0, 1)
        for xi in xs.ravel():
            ref = (1 - xi) ** (-(a + 2))
            worst = max(worst, abs(kernel_scalar(xi, p).value - ref) / abs(ref))
    return worst <= 1e-10, f"max relative error {worst:.2e}"


def _basis() -> tuple[bool, str]:
    worst = 0.0
    for n in (1, 2):
        for a, b in ((0, 0), (1, -0.5), (0.5, 2)):
            p = SpaceParams(a, b, n)
            rule = build_rule(p, 64)
            fns = [basis_fn(al, p) for al in multi_indices(n, 4)]
            for i, f in enumerate(fns):
                for j in range(i, len(fns)):
                    target = 1.0 if i == j else 0.0
                    worst = max(worst, abs(inner_product(f, fns[j], p, rule) - target))
    return worst <= 1e-8, f"max Gram deviation {worst:.2e}"


def _reproducing() -> tuple[bool, str]:
    rng = np.random.default_rng(7)
    p = SpaceParams(1, 0.5, 1)
    rule = build_rule(p, 64)
    worst = 0.0
    for _ in range(5):
        c = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        f = lambda w, c=c: np.polyval(c[::-1], w[..., 0])
        z = 0.7 * rng.random() * np.exp(2j * np.pi * rng.random())
        fz = np.polyval(c[::-1], z)
        worst = max(worst, abs(project(f, [z], p, rule) - fz) / (1 + abs(fz)))
    return worst <= 1e-7, f"max scaled error {worst:.2e}"


def _q_at_one() -> tuple[bool, str]:
    worst = 0.0
    for a, b, n in ((0.5, 0.3, 1), (1, -0.5, 1), (0.2, 1.7, 2), (2.5, -1.5, 2)):
        p = SpaceParams(a, b, n)
        ref = q_at_one_closed_form(p)
        worst = max(worst, abs(q_ab(1.0, p) - ref) / abs(ref))
    return worst <= 1e-8, f"max relative error {worst:.2e}"


def _growth() -> tuple[bool, str]:
    p = SpaceParams(1, 0.5, 1)
    labels = [i_s_growth(s, p).regime for s in (-0.5, 0.0, 0.5)]
    rule = build_rule(p, 64)
    err = abs(i_s(0.8, 0.5, p) - i_s_quadrature(0.8, 0.5, p, rule)) / i_s(0.8, 0.5, p)
    ok = labels == ["bounded", "logarithmic", "power"] and err <= 1e-6
    return ok, f"regimes {labels}, closed form vs quadrature {err:.2e}"


def _moebius() -> tuple[bool, str]:
    rng = np.random.default_rng(3)
    worst = 0.0
    for n in (1, 2, 3):
        for _ in range(20):
            z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            z *= 0.9 * rng.random() / np.linalg.norm(z)
            w = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            w *= 0.9 * rng.random() / np.linalg.norm(w)
            worst = max(worst, np.max(np.abs(moebius(z, moebius(z, w)) - w)))
            lhs = 1 - norm_sq(moebius(z, w))
            worst = max(worst, abs(lhs - one_minus_phi_sq(z, w)))
    return worst <= 1e-10, f"max deviation {worst:.2e}"


def _metric() -> tuple[bool, str]:
    p = SpaceParams(1, 0.5, 1)
    rule = build_rule(p, 64)
    curve = Curve.from_function(lambda t: (0.5 * np.exp(2j * np.pi * np.asarray(t)))[..., None])
    lhs, rhs = projection_residual_check(curve, 0.3, p, rule)
    rel = abs(lhs - rhs) / rhs
    h = hessian([0.4 + 0.3j], p)
    return rel <= 1e-5 and h.eigenvalues().min() >= -1e-10 * h.trace, f"relative gap {rel:.2e}"


def _lemniscate() -> tuple[bool, str]:
    spec = LemniscateSpec(2.0)
    meds = []
    for m in (10, 20, 50):
        rep = poly_roots(q_poly_coeffs(SpaceParams(m - 1, 2 * m + 1, 1), None))
        meds.append(cluster_distance(rep, spec).median)
    ok = all(x > y for x, y in zip(meds, meds[1:]))
    return ok, "medians " + ", ".join(f"{m:.3e}" for m in meds)


CHECKS: list[tuple[str, Callable[[], tuple[bool, str]]]] = [
    ("q_root_minus_one_eleventh", _q_root),
    ("classical_kernel", _classical_kernel),
    ("orthonormal_basis", _basis),
    ("reproducing_property", _reproducing),
    ("q_at_one", _q_at_one),
    ("growth_regimes", _growth),
    ("moebius_identities", _moebius),
    ("metric_consistency", _metric),
    ("lemniscate_clustering", _lemniscate),
]


def run_all() -> list[CheckResult]:
    out = []
    for name, fn in CHECKS:
        t0 = time.perf_counter()
        try:
            ok, detail = fn()
        except Exception as exc:  # a crash is a failed check, not a crashed suite
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(CheckResult(name, bool(ok), detail, time.perf_counter() - t0))
    return out
