import math

import numpy as np
import pytest

from metivier import specfun
from metivier.quadrature import gauss_legendre


def test_hermite_values():
    assert specfun.hermite_h(0, 0.0) == pytest.approx(np.pi ** -0.25)
    assert specfun.hermite_h(1, 0.0) == pytest.approx(0.0, abs=1e-15)


def test_hermite_l2_norm_by_quadrature():
    t, w = gauss_legendre(200, -14.0, 14.0)
    for k in (0, 2, 7):
        val = np.sum(w * specfun.hermite_h(k, t) ** 2)
        assert val == pytest.approx(1.0, abs=1e-10)


def test_hermite_range_error():
    with pytest.raises(ValueError):
        specfun.hermite_h(-1, 0.0)
    with pytest.raises(ValueError):
        specfun.hermite_h(10**7, 0.0)


def test_hermite_fn_product():
    assert specfun.hermite_fn([0, 0], np.zeros(2)) == pytest.approx(np.pi ** -0.5)
    assert specfun.hermite_fn([1, 0], np.zeros(2)) == pytest.approx(0.0, abs=1e-15)


def test_hermite_fn_orthonormality():
    t = np.linspace(-12, 12, 4001)
    h = t[1] - t[0]
    for a in range(5):
        for b in range(5):
            ip = np.sum(specfun.hermite_h(a, t) * specfun.hermite_h(b, t)) * h
            assert ip == pytest.approx(1.0 if a == b else 0.0, abs=1e-8)


def test_laguerre_closed_forms():
    x = np.linspace(0.0, 10.0, 33)
    n = 3
    assert np.allclose(specfun.laguerre(0, n - 1, x), 1.0)
    assert np.allclose(specfun.laguerre(1, n - 1, x), n - x)
    # closed forms for k <= 3 vs recurrence
    nu = 1.5
    l2 = (nu + 1) * (nu + 2) / 2 - (nu + 2) * x + x ** 2 / 2
    assert np.allclose(specfun.laguerre(2, nu, x), l2, atol=1e-12)
    l3 = ((nu + 1) * (nu + 2) * (nu + 3) / 6 - (nu + 2) * (nu + 3) / 2 * x
          + (nu + 3) / 2 * x ** 2 - x ** 3 / 6)
    assert np.allclose(specfun.laguerre(3, nu, x), l3, atol=1e-12)


def test_laguerre_at_zero_binomial_oracle():
    for nu in (0, 1, 3):
        for k in range(21):
            assert specfun.laguerre(k, nu, 0.0) == pytest.approx(
                math.comb(k + nu, k), rel=1e-10)


def test_laguerre_derivative_recursion_fd(rng):
    # r d/dr L_k^{n-1}(r) = k L_k(r) - (k+n-1) L_{k-1}(r)
    n = 2
    h = 1e-6
    for _ in range(100):
        k = int(rng.integers(1, 31))
        r = float(rng.uniform(0.1, 20.0))
        lhs = r * (specfun.laguerre(k, n - 1, r + h) - specfun.laguerre(k, n - 1, r - h)) / (2 * h)
        rhs = k * specfun.laguerre(k, n - 1, r) - (k + n - 1) * specfun.laguerre(k - 1, n - 1, r)
        assert lhs == pytest.approx(rhs, rel=1e-6, abs=1e-6)


def test_phi_values_and_radiality():
    assert specfun.laguerre_fn(0, 1, np.zeros(2)) == pytest.approx(1.0)
    z = np.array([0.3, -0.4])
    assert specfun.laguerre_fn(0, 1, z) == pytest.approx(np.exp(-0.25 * 0.25))
    for k in (0, 2, 5):
        for n in (1, 2):
            assert specfun.laguerre_fn(k, n, np.zeros(2 * n)) == pytest.approx(
                specfun.phi_k_zero(k, n), rel=1e-12)
    # two z with equal norm give equal values exactly
    z1 = np.array([3.0, 4.0])
    z2 = np.array([5.0, 0.0])
    assert specfun.laguerre_fn(7, 1, z1) == specfun.laguerre_fn(7, 1, z2)


def test_phi_regime_guard():
    with pytest.raises(ValueError):
        specfun.phi_k_radial(2000, 1, 130.0)


def test_phi_sup_scaling():
    cn, ratios = specfun.phi_sup_constant(2, range(2, 41))
    assert np.max(np.abs(ratios / cn - 1.0)) <= 0.10
    assert cn == pytest.approx(1.0 / math.factorial(1), rel=0.05)


def test_special_hermite_diagonal_sum():
    # sum_{|a|=k} Phi_aa(z) = (2 pi)^{-n/2} phi_k(z), n = 1
    pts = np.array([[0.0, 0.0], [0.7, -0.3], [1.2, 0.8], [-0.5, 1.4]])
    for k in range(4):
        lhs = specfun.special_hermite([k], [k], pts)
        rhs = (2 * np.pi) ** -0.5 * specfun.laguerre_fn(k, 1, pts)
        rel = np.max(np.abs(lhs - rhs)) / np.max(np.abs(rhs))
        assert rel <= 1e-6


def test_special_hermite_normalization():
    # <Phi_ab, Phi_ab> = 1 by 2D grid quadrature
    t = np.linspace(-9, 9, 301)
    h = t[1] - t[0]
    X, Y = np.meshgrid(t, t, indexing="ij")
    z = np.stack([X, Y], axis=-1)
    for (a, b) in ((0, 0), (1, 0), (2, 1)):
        vals = specfun.special_hermite([a], [b], z.reshape(-1, 2)).reshape(X.shape)
        ip = np.sum(np.abs(vals) ** 2) * h * h
        assert ip == pytest.approx(1.0, abs=1e-6)
    v00 = specfun.special_hermite([0], [0], np.zeros(2))
    assert v00.real > 0 and abs(v00.imag) < 1e-12


def test_special_hermite_degree_guard():
    with pytest.raises(ValueError):
        specfun.special_hermite([7], [0], np.zeros(2))


def test_phi_mu_derivative_cases(rng):
    # k = 0: only the -r^2/4 term survives
    mu = np.array([0.8])
    r = 1.1
    val = specfun.phi_mu_derivative(0, 1, mu, 0, r)
    expect = -(mu[0] / np.linalg.norm(mu)) * 0.25 * r * r * specfun.phi_k_radial(
        0, 1, np.sqrt(np.linalg.norm(mu)) * r)
    assert val == pytest.approx(expect, rel=1e-12)
    # k = 3, n = 1 closed form vs finite difference
    mu = np.array([0.7])
    closed = specfun.phi_mu_derivative(3, 1, mu, 0, 1.3)
    fd = specfun.phi_mu_derivative_fd(3, 1, mu, 0, 1.3)
    assert closed == pytest.approx(fd, abs=1e-6)
    # odd dependence on mu_j
    m2 = np.array([0.4, 0.6])
    d1 = specfun.phi_mu_derivative(2, 1, m2, 1, 0.9)
    m2f = m2.copy()
    m2f[1] = -m2f[1]
    d2 = specfun.phi_mu_derivative(2, 1, m2f, 1, 0.9)
    assert d1 == pytest.approx(-d2, rel=1e-12)


def test_phi_l2_norm_checks():
    # n = 1: ||phi_k^{|mu|}||_2 is k-independent (= sqrt(2 pi / |mu|))
    vals = [specfun.phi_l2_norm(k, 1, 1.0) for k in range(1, 61)]
    assert np.max(np.abs(np.array(vals) / vals[0] - 1.0)) <= 1e-12
    # bounded normalized ratio over k and |mu|
    for mu_abs in (0.25, 1.0, 4.0):
        ratios = [specfun.phi_l2_norm_check(k, 2, [mu_abs]) for k in range(1, 61)]
        assert max(ratios) / min(ratios) <= 3.0
    # |mu| scaling slope is exactly -n/2
    mus = np.geomspace(0.25, 4.0, 7)
    for n in (1, 2):
        norms = [specfun.phi_l2_norm(5, n, m) for m in mus]
        slope = np.polyfit(np.log(mus), np.log(norms), 1)[0]
        assert slope == pytest.approx(-0.5 * n, abs=0.02)
    # quadrature oracle agreement (k = 0 gaussian integral and k = 7)
    for (k, n, mu_abs) in ((0, 1, 0.7), (7, 1, 1.3), (3, 2, 0.5)):
        assert specfun.phi_l2_norm(k, n, mu_abs) == pytest.approx(
            specfun.phi_l2_norm_quadrature(k, n, mu_abs), rel=1e-9)
