import math

import mpmath
import numpy as np
import pytest

from modbergman.ball import SpaceParams
from modbergman.errors import DomainError, ZeroOnContour
from modbergman.kernel import q_ab
from modbergman.zeros import (
    LemniscateSpec,
    PolyC,
    RootReport,
    cluster_distance,
    count_zeros_disk,
    find_zeros_disk,
    has_zero_in_closed_disk,
    lemniscate_points,
    poly_roots,
    q_poly_coeffs,
    scan_b,
    winding_on_circle,
    zero_check,
)


def pair_up(xs, ys, tol):
    ys = list(ys)
    for x in xs:
        j = int(np.argmin([abs(x - y) for y in ys]))
        assert abs(x - ys[j]) <= tol
        ys.pop(j)
    assert not ys


def test_polyc_basics():
    q = PolyC([1, 2, 0, 0])
    assert q.degree == 1 and q.max_coef == 2
    assert q(3) == 7
    assert q.derivative()(5) == 2
    shifted = PolyC([1, 1], center=2)
    assert shifted(3) == 2
    with pytest.raises(DomainError):
        PolyC([0, 0])


def test_q_poly_coeffs_examples():
    for a in (0.0, 3.0, 10.0, 2.5):
        q = q_poly_coeffs(SpaceParams(a, -1, 2))
        assert q.degree == 1
        assert q.coefficients == (1, a + 1)
    assert q_poly_coeffs(SpaceParams(1.5, 0, 3)).coefficients == (1,)
    for m in (3, 10):
        assert q_poly_coeffs(SpaceParams(m - 1, 2 * m + 1, 1)).degree == m
    # b = -1 with n = 3 terminates first at degree 1, a nonnegative integer a at degree a + 1
    assert q_poly_coeffs(SpaceParams(0.7, -1, 3)).degree == 1
    assert q_poly_coeffs(SpaceParams(4, 0.3, 2)).degree == 5
    with pytest.raises(DomainError):
        q_poly_coeffs(SpaceParams(0.5, 0.5, 1))


def test_q_poly_matches_series():
    for p in (SpaceParams(4, 0.3, 2), SpaceParams(2.2, -2, 3), SpaceParams(7, 15, 1)):
        for center in (0.0, None):
            q = q_poly_coeffs(p, center)
            for z in (0.3, -0.7j, 0.5 + 0.5j):
                ref = complex(mpmath.hyp2f1(p.b, -(p.a + 1), p.b + p.n, z))
                assert abs(q(z) - ref) <= 1e-12 * max(1.0, q.max_coef)


def test_poly_roots_examples():
    rep = poly_roots(PolyC([1, 11]))
    assert rep.roots == [pytest.approx(-1 / 11, abs=1e-15)]
    assert rep.disk_count == 1 and rep.ok and rep.method == "PolynomialSolve"
    rep = poly_roots(PolyC([-1, 0, 1]))
    pair_up(rep.roots, [1, -1], 1e-12)
    # both roots sit on the unit circle, so the count uses a nudged radius
    assert rep.disk_count == 2 and rep.disk_radius != 1.0
    with pytest.raises(DomainError):
        poly_roots(PolyC([3]))


def test_poly_roots_against_mpmath():
    rng = np.random.default_rng(1)
    for _ in range(5):
        c = rng.standard_normal(9) + 1j * rng.standard_normal(9)
        rep = poly_roots(PolyC(c))
        ref = [complex(r) for r in mpmath.polyroots(c[::-1].tolist(), maxsteps=200, extraprec=60)]
        pair_up(rep.roots, ref, 1e-10)


def test_degree_50_lemniscate_polynomial():
    q = q_poly_coeffs(SpaceParams(49, 101, 1), None)
    rep = poly_roots(q)
    assert len(rep.roots) == 50 and rep.ok
    assert max(rep.residuals) <= 1e-9 * q.max_coef
    mpmath.mp.dps = 80
    try:
        exact = [mpmath.mpf(1)]
        for j in range(50):
            exact.append(exact[-1] * (mpmath.mpf(101) + j) * (-50 + j) / ((102 + j) * (j + 1)))
        ref = [complex(r) for r in mpmath.polyroots(exact[::-1], maxsteps=500, extraprec=400)]
    finally:
        mpmath.mp.dps = 15
    pair_up(rep.roots, ref, 1e-8)


def terminating_sets(count, seed):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        n = int(rng.integers(1, 4))
        if n > 1 and rng.random() < 0.3:
            b = -float(rng.integers(1, n))
            a = float(np.round(rng.uniform(-0.9, 20), 3))
        else:
            a = float(rng.integers(0, 61))
            b = float(np.round(rng.uniform(-n + 0.05, 30), 3))
        p = SpaceParams(a, b, n)
        if q_poly_coeffs(p).degree >= 1:
            out.append(p)
    return out


@pytest.mark.parametrize("p", terminating_sets(20, 5), ids=str)
def test_count_matches_roots(p):
    rep = poly_roots(q_poly_coeffs(p, None))
    assert rep.ok, rep.flags
    assert rep.disk_count == len(rep.inside())
    radius = 0.9
    if min(abs(abs(z) - radius) for z in rep.roots) > 1e-3:
        assert count_zeros_disk(p, radius) == len(rep.inside(radius))


@pytest.mark.parametrize("a", [0, 1, 5, 20, 40, 60])
@pytest.mark.parametrize("b,n", [(-0.5, 1), (3.0, 2), (-1.9, 2), (12.5, 3)])
def test_residual_invariant(a, b, n):
    q = q_poly_coeffs(SpaceParams(a, b, n), None)
    if q.degree == 0:
        return
    rep = poly_roots(q)
    assert sum(rep.residuals) <= 1e-8 * q.degree * q.max_coef
    # real coefficients: the root set is closed under conjugation
    pair_up(rep.roots, [np.conj(z) for z in rep.roots], 1e-9 * max(1.0, max(map(abs, rep.roots))))


def test_count_zeros_examples():
    assert count_zeros_disk(SpaceParams(2, 0, 1), 0.99) == 0
    assert count_zeros_disk(SpaceParams(10, -1, 2), 0.99) == 1
    assert count_zeros_disk(SpaceParams(10, -1, 2), 0.05) == 0


def test_winding_detects_contour_zero():
    q = PolyC([-0.25, 0, 1])
    with pytest.raises(ZeroOnContour):
        winding_on_circle(q, q.derivative(), 0.5)
    assert winding_on_circle(q, q.derivative(), 0.6) == 2
    with pytest.raises(DomainError):
        winding_on_circle(q, q.derivative(), 0.0)


@pytest.mark.parametrize("p", [SpaceParams(10, -1, 2), SpaceParams(10, -1.9, 2), SpaceParams(6, -0.5, 1),
                               SpaceParams(3, -2.7, 3)], ids=str)
def test_find_zeros_matches_poly_roots(p):
    radius = 0.999
    sub = find_zeros_disk(p, radius)
    ref = poly_roots(q_poly_coeffs(p, None)).inside(radius)
    assert sub.ok and sub.method == "ContourSubdivision"
    assert sub.disk_count == len(sub.roots)
    pair_up(sub.roots, ref, 1e-8)


def test_find_zeros_empty_and_nonterminating():
    assert find_zeros_disk(SpaceParams(3.5, 0, 2)).roots == []
    p = SpaceParams(10.5, -1.9, 2)
    rep = find_zeros_disk(p, 0.999)
    assert rep.ok and len(rep.roots) == rep.disk_count >= 1
    for z in rep.roots:
        assert abs(q_ab(z, p)) <= 1e-8
    assert zero_check(p).interior_count == len(rep.roots)


def test_has_zero_in_closed_disk():
    assert not has_zero_in_closed_disk(SpaceParams(1, 0, 1))
    assert has_zero_in_closed_disk(SpaceParams(10, -1, 2))
    assert not has_zero_in_closed_disk(SpaceParams(10, -0.01, 2))
    zc = zero_check(SpaceParams(10, -1, 2))
    assert zc.interior_count == 1 and zc.as_dict()["has_zero"]


def test_boundary_zero_heuristic():
    # a = 0, b = -1, n = 2 gives Q = 1 + z, with its zero on the circle
    zc = zero_check(SpaceParams(0, -1, 2))
    assert zc.has_zero and zc.boundary_heuristic and zc.interior_count == 0


def test_scan_b_transition():
    scan = scan_b(10, 2, [-0.01, -0.5, -1.0, -1.5, -1.9])
    counts = dict(scan.samples)
    assert counts[-0.01] == 0 and counts[-1.9] >= 1
    lo, hi = scan.transition()
    assert -1.9 <= lo < hi <= -0.01


def test_lemniscate_spec():
    spec = LemniscateSpec(2.0)
    assert spec.level == pytest.approx(4 / 27, rel=1e-15)
    assert spec.node == pytest.approx(2 / 3)
    assert spec.modulus(2 / 3) == pytest.approx(spec.level, rel=1e-15)
    with pytest.raises(DomainError):
        LemniscateSpec(0.0)


@pytest.mark.parametrize("tau", [0.5, 1.0, 2.0, 3.7])
def test_lemniscate_points_on_curve(tau):
    spec = LemniscateSpec(tau)
    pts, skipped = lemniscate_points(spec, 256)
    assert not skipped and len(pts) == 256
    pts = np.array(pts)
    assert np.max(np.abs(spec.modulus(pts) - spec.level)) <= 1e-10
    assert np.all(pts.real > spec.node)


def test_lemniscate_real_crossing():
    spec = LemniscateSpec(2.0)
    pts = np.array(lemniscate_points(spec, 1024)[0])
    near_axis = pts[np.argmin(np.abs(pts.imag))]
    # x^3 - x^2 = 4/27 has its crossing right of the node at x = 1.1184
    real_roots = [r.real for r in np.roots([1, -1, 0, -4 / 27]) if abs(r.imag) < 1e-12 and r.real > 1]
    assert near_axis.real == pytest.approx(real_roots[0], abs=1e-3)
    assert real_roots[0] == pytest.approx(1.11843, abs=1e-5)
    with pytest.raises(DomainError):
        lemniscate_points(spec, 8)


def test_cluster_distance_examples():
    spec = LemniscateSpec(2.0)
    on_curve = lemniscate_points(spec, 700)[0]
    st = cluster_distance(on_curve, spec)
    curve = np.array(lemniscate_points(spec, 1024)[0])
    gap = np.max(np.abs(np.diff(curve)))
    assert st.median <= gap and st.count == 700
    empty = cluster_distance(RootReport([-0.5, 0.1j], [0, 0], 2, "PolynomialSolve"), spec)
    assert empty.count == 0 and empty.median is None
    with pytest.raises(DomainError):
        cluster_distance([], spec, curve_count=100)


def test_cluster_distance_decreases():
    spec = LemniscateSpec(2.0)
    meds = []
    for m in (20, 50):
        rep = poly_roots(q_poly_coeffs(SpaceParams(m - 1, 2 * m + 1, 1), None))
        st = cluster_distance(rep, spec)
        assert st.count_in_disk <= st.count
        meds.append(st.median)
    assert meds[1] < meds[0]
