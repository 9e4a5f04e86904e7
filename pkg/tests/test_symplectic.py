import numpy as np
import pytest

from metivier.groups import DegeneracyError, MetivierStructure, heisenberg
from metivier.quadrature import sphere_samples
from metivier.symplectic import (
    det_bound_scan,
    factorize,
    factorize_direction,
    j_of_mu,
    standard_symplectic,
)


def test_j_of_mu_basics(heis, quat):
    assert np.allclose(j_of_mu(heis, [0.0]), 0.0)
    lam = 1.7
    assert np.allclose(j_of_mu(heis, [lam]), lam * standard_symplectic(1))
    assert np.allclose(j_of_mu(quat, [1.0, 0.0, 0.0]), quat.J[0])
    # linearity
    rng = np.random.default_rng(0)
    a, b = rng.normal(size=3), rng.normal(size=3)
    assert np.allclose(j_of_mu(quat, a + b), j_of_mu(quat, a) + j_of_mu(quat, b))


def test_factorize_standard(heis2):
    J = standard_symplectic(2)
    fac = factorize(J)
    assert fac.residual <= 1e-14
    assert np.allclose(fac.sigma, 1.0)
    assert abs(abs(fac.detA) - 1.0) <= 1e-12


def test_factorize_scaled_pfaffian_oracle():
    # det J = (prod sigma)^2 and |detA| = prod sigma = c^n for J = c J_2n
    c = 2.5
    fac = factorize(c * standard_symplectic(2))
    assert np.allclose(fac.sigma, c, rtol=1e-12)
    assert abs(fac.detA) == pytest.approx(c ** 2, rel=1e-12)
    assert fac.residual <= 1e-12
    assert fac.detA ** 2 == pytest.approx(np.prod(fac.sigma) ** 2, rel=1e-10)


def test_quaternionic_sampled_residuals(quat):
    worst = 0.0
    for eta in sphere_samples(3, 100):
        fac = factorize_direction(quat, eta)
        worst = max(worst, fac.residual)
        assert abs(fac.detA ** 2 - np.linalg.det(fac.J_eta)) <= 1e-8
    assert worst <= 1e-10


def test_random_skew_factorizations(rng):
    for _ in range(25):
        M = rng.normal(size=(6, 6))
        J = M - M.T
        if abs(np.linalg.det(J)) < 1e-4:
            continue
        fac = factorize(J)
        assert fac.residual <= 1e-10
        assert fac.detA ** 2 == pytest.approx(np.linalg.det(J), rel=1e-8)
        assert np.all(fac.sigma > 0)
        assert np.all(np.diff(fac.sigma) <= 1e-12)  # descending


def test_sigma_homogeneity(quat, rng):
    mu = rng.normal(size=3)
    f1 = factorize(j_of_mu(quat, mu), eps_nd=1e-12)
    for t in (0.3, 2.0, 7.5):
        ft = factorize(j_of_mu(quat, t * mu), eps_nd=1e-12)
        assert np.allclose(ft.sigma, t * f1.sigma, rtol=1e-10)


def test_orthogonal_conjugation_residual(rng):
    M = rng.normal(size=(4, 4))
    J = M - M.T
    Q, _ = np.linalg.qr(rng.normal(size=(4, 4)))
    f1 = factorize(J)
    f2 = factorize(Q.T @ J @ Q)
    assert f2.residual <= 100 * max(f1.residual, 1e-14)


def test_degenerate_input_error():
    with pytest.raises(DegeneracyError) as exc:
        factorize(np.zeros((2, 2)))
    assert exc.value.det_value is not None


def test_determinism():
    rng = np.random.default_rng(5)
    M = rng.normal(size=(6, 6))
    J = M - M.T
    f1 = factorize(J)
    f2 = factorize(J.copy())
    assert f1.A_eta.tobytes() == f2.A_eta.tobytes()


def test_det_bound_scan_heisenberg(heis):
    scan = det_bound_scan(heis, 50)
    assert scan["min_det"] == pytest.approx(1.0)
    assert scan["max_det"] == pytest.approx(1.0)


def test_det_bound_scan_quaternionic(quat):
    # oracle: H-type, |det J_eta| = |eta|^{2n} = 1 for unit eta
    scan = det_bound_scan(quat, 200)
    assert scan["min_det"] == pytest.approx(1.0, abs=1e-10)
    assert scan["max_det"] == pytest.approx(1.0, abs=1e-10)


def test_det_bound_scan_scaled():
    s = MetivierStructure(n=1, m=1, J=(2.0 * standard_symplectic(1),), name="scaled")
    scan = det_bound_scan(s, 10)
    assert scan["min_det"] == pytest.approx(4.0)  # 2^{2n}, n = 1
    assert scan["max_det"] == pytest.approx(4.0)


def test_det_bound_scan_aborts_on_degenerate():
    J = standard_symplectic(1)
    with pytest.raises(DegeneracyError):
        s = MetivierStructure(n=1, m=2, J=(J, J))
        det_bound_scan(s, 64)
