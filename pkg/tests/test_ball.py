import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from modbergman.ball import (
    BallPoint,
    SpaceParams,
    UnitVector,
    inner,
    monomial_ball_moment,
    monomial_sphere_moment,
    moebius,
    moebius_jacobian,
    multi_indices,
    one_minus_phi_sq,
)
from modbergman.errors import DomainError
from modbergman.quadrature import build_rule, integrate_mu, radial_rule


def random_point(rng, n, rmax=0.95):
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v) * rmax * rng.random() ** (1 / (2 * n))


def test_space_params_validation():
    SpaceParams(-0.5, -1.5, 2)
    for bad in [(-1, 0, 1), (0, -1, 1), (0, 0, 0), (0, 0, 1.5)]:
        with pytest.raises(DomainError):
            SpaceParams(*bad)


def test_ball_point_validation():
    assert BallPoint([0.5, 0.5j]).n == 2
    with pytest.raises(DomainError):
        BallPoint([1.0])
    with pytest.raises(DomainError):
        BallPoint([1 - 1e-15])
    UnitVector([0.6, 0.8j])
    with pytest.raises(DomainError):
        UnitVector([0.6, 0.7])


def test_inner_examples():
    z = np.array([0.3 + 0.1j, -0.2j])
    assert abs(inner(z, z).imag) <= 1e-16 and inner(z, z).real == pytest.approx(0.14)
    assert inner([0.5, 0], [0, 0.5]) == 0
    assert inner([0.5j, 0], [0.5, 0]) == 0.25j
    with pytest.raises(DomainError):
        inner([0.1], [0.1, 0.2])


def test_moebius_special_values():
    rng = np.random.default_rng(0)
    for n in (1, 2, 3):
        z, w = random_point(rng, n), random_point(rng, n)
        assert np.allclose(moebius(np.zeros(n), w), -w)
        assert np.allclose(moebius(z, np.zeros(n)), z, atol=1e-15)
        assert np.allclose(moebius(z, z), 0, atol=1e-15)


def test_moebius_involution_and_identity():
    rng = np.random.default_rng(1)
    for _ in range(100):
        n = int(rng.integers(1, 4))
        z, w = random_point(rng, n), random_point(rng, n)
        phi = moebius(z, w)
        assert np.max(np.abs(moebius(z, phi) - w)) <= 1e-10
        assert abs(1 - np.sum(np.abs(phi) ** 2) - one_minus_phi_sq(z, w)) <= 1e-12
        assert np.linalg.norm(phi) < 1


@settings(max_examples=50)
@given(st.floats(0, 0.9), st.floats(0, 2 * math.pi), st.floats(0, 0.9), st.floats(0, 2 * math.pi))
def test_one_minus_phi_sq_symmetric_positive(r, t, s, u):
    z, w = np.array([r * np.exp(1j * t)]), np.array([s * np.exp(1j * u)])
    v = one_minus_phi_sq(z, w)
    assert v > 0
    assert v == pytest.approx(one_minus_phi_sq(w, z), rel=1e-14)


def test_one_minus_phi_sq_examples():
    w = np.array([0.3 + 0.4j])
    assert one_minus_phi_sq(np.zeros(1), w) == pytest.approx(1 - 0.25)
    assert one_minus_phi_sq(w, w) == pytest.approx(1.0)


def test_jacobian_examples():
    z, w = np.array([0.3, 0.2j]), np.array([0.1j, -0.4])
    assert moebius_jacobian(np.zeros(2), w) == pytest.approx(1.0)
    assert moebius_jacobian(z, np.zeros(2)) == pytest.approx((1 - 0.13) ** 3)


def test_jacobian_finite_difference_n1():
    rng = np.random.default_rng(5)
    for _ in range(10):
        z, w = random_point(rng, 1, 0.8), random_point(rng, 1, 0.8)
        h = 1e-6
        d = (moebius(z, w + h) - moebius(z, w - h))[0] / (2 * h)
        assert moebius_jacobian(z, w) == pytest.approx(abs(d) ** 2, rel=1e-6)


def test_multi_indices_graded():
    idx = list(multi_indices(2, 2))
    assert idx == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]


def test_sphere_moments():
    for k in range(5):
        assert monomial_sphere_moment((k,), 1) == pytest.approx(2 * math.pi)
    assert monomial_sphere_moment((1, 0), 2) == pytest.approx(math.pi**2)
    assert monomial_sphere_moment((0, 0), 2) == pytest.approx(2 * math.pi**2)


def test_ball_moments():
    p = SpaceParams(0.5, -0.5, 2)
    assert monomial_ball_moment((0, 0), (0, 0), p) == pytest.approx(1.0, rel=1e-14)
    assert monomial_ball_moment((1, 0), (0, 1), p) == 0.0
    q = SpaceParams(0, 0, 1)
    rule = build_rule(q, 32)
    quad = integrate_mu(lambda w: np.abs(w[..., 0]) ** 2, q, rule).real
    assert monomial_ball_moment((1,), (1,), q) == pytest.approx(quad, rel=1e-10)


def test_ball_moment_decreasing_in_degree():
    p = SpaceParams(1, 0, 1)
    vals = [monomial_ball_moment((k,), (k,), p) for k in range(7)]
    assert all(x > y for x, y in zip(vals, vals[1:]))


def test_ball_moment_factorization():
    # radial Gauss rule times the exact sphere moment
    for p in (SpaceParams(1, -0.5, 1), SpaceParams(0.5, 2, 2)):
        r, w = radial_rule(p, 40)
        norm = math.exp(math.lgamma(p.n) - p.n * math.log(math.pi)) / math.exp(
            math.lgamma(p.a + 1) + math.lgamma(p.b + p.n) - math.lgamma(p.a + p.b + p.n + 1))
        for alpha in multi_indices(p.n, 3):
            k = sum(alpha)
            val = norm * np.sum(w * r ** (2 * k)) * monomial_sphere_moment(alpha, p.n)
            assert val == pytest.approx(monomial_ball_moment(alpha, alpha, p), rel=1e-10)


def test_large_degree_no_overflow():
    p = SpaceParams(2, 1, 3)
    v = monomial_ball_moment((300, 200, 100), (300, 200, 100), p)
    assert 0 < v < 1
