import numpy as np
import pytest

from metivier import _kernels, twisted
from metivier.fields import (
    GridFunction,
    compose_linear,
    twisted_laplacian_apply,
    twisted_laplacian_mu,
)
from metivier.symplectic import factorize_direction


def layer_base(N=48, L=9.0):
    return GridFunction("layer", 1, 0, np.zeros((N, N)), L)


def offset_gaussian(N=48, L=9.0, c=(0.7, 0.4), w=1.0):
    ax = (np.arange(N) - N // 2) * (2 * L / N)
    X, Y = np.meshgrid(ax, ax, indexing="ij")
    return GridFunction("layer", 1, 0,
                        np.exp(-((X - c[0]) ** 2 + (Y - c[1]) ** 2) / (2 * w * w)), L)


def test_lambda_zero_is_ordinary_convolution():
    from scipy.signal import fftconvolve

    f = offset_gaussian(32, 7.0)
    g = offset_gaussian(32, 7.0, c=(-0.4, 0.2), w=0.8)
    conv = twisted.twisted_convolution(1, 0.0, f, g)
    # independent oracle: zero-padded FFT convolution restricted to the box;
    # out[a] = sum_b f[a-b+N//2] g[b] sits at offset N//2 of the full output
    full = fftconvolve(f.values, g.values, mode="full") * f.cell_volume()
    N = f.nx
    lo = N // 2
    oracle = full[lo:lo + N, lo:lo + N]
    assert np.max(np.abs(conv.values - oracle)) <= 1e-12 * np.max(np.abs(oracle))


def test_convolve_with_zero():
    f = offset_gaussian(24, 6.0)
    z = GridFunction.like(f, np.zeros_like(np.asarray(f.values)))
    assert twisted.twisted_convolution(1, 1.0, f, z).lp_norm(2) == 0.0


@pytest.mark.parametrize("k", [0, 1, 2])
def test_phi_reproducing_identity(k):
    # phi_k^lam x_lam phi_k^lam = (2 pi)^n lam^{-n} phi_k^lam
    base = layer_base(128, 12.0)
    lam = 1.0
    pk = twisted.phi_grid(k, 1, lam, base)
    conv = twisted.twisted_convolution(1, lam, pk, pk)
    target = (2 * np.pi) ** 1 * lam ** -1 * pk.values
    rel = np.linalg.norm(conv.values - target) / np.linalg.norm(target)
    assert rel <= 1e-4


def test_phi_cross_orthogonality():
    base = layer_base(64, 10.0)
    p0 = twisted.phi_grid(0, 1, 1.0, base)
    p2 = twisted.phi_grid(2, 1, 1.0, base)
    conv = twisted.twisted_convolution(1, 1.0, p2, p0)
    assert np.max(np.abs(conv.values)) <= 1e-6


def test_mu_twist_matches_standard_at_heisenberg(heis):
    f = offset_gaussian(32, 7.0)
    g = offset_gaussian(32, 7.0, c=(0.1, -0.5), w=0.9)
    lam = 1.0
    a = twisted.mu_twisted_convolution(heis, [lam], f, g)
    b = twisted.twisted_convolution(1, lam, f, g)
    assert np.max(np.abs(a.values - b.values)) <= 1e-12 * np.max(np.abs(b.values))


def test_mu_twist_measure_factor(heis):
    # output scales linearly in sqrt(det J_mu): mu-twist at mu = lam equals
    # lam * (standard lam-twist) on the Heisenberg group
    f = offset_gaussian(32, 7.0)
    g = offset_gaussian(32, 7.0, c=(0.1, -0.5), w=0.9)
    lam = 1.7
    a = twisted.mu_twisted_convolution(heis, [lam], f, g)
    b = twisted.twisted_convolution(1, lam, f, g)
    assert np.max(np.abs(a.values - lam * b.values)) <= 1e-12 * np.max(np.abs(a.values))
    with pytest.raises(ValueError):
        twisted.mu_twisted_convolution(heis, [0.0], f, g)


def test_hermite_projection_orthogonality():
    base = layer_base(64, 10.0)
    lam = 1.0
    g = twisted.phi_grid(1, 1, lam, base)
    same = twisted.hermite_projection(1, lam, 1, g)
    assert np.linalg.norm(same.values - g.values) / np.linalg.norm(g.values) <= 1e-6
    other = twisted.hermite_projection(1, lam, 3, g)
    assert np.linalg.norm(other.values) / np.linalg.norm(g.values) <= 1e-6


def test_hermite_projection_ground_state():
    base = layer_base(48, 9.0)
    ax = base.x_axis
    X, Y = np.meshgrid(ax, ax, indexing="ij")
    g = GridFunction("layer", 1, 0, np.exp(-(X**2 + Y**2) / 4.0), 9.0)
    proj = twisted.hermite_projection(1, 1.0, 0, g)
    assert np.linalg.norm(proj.values - g.values) / np.linalg.norm(g.values) <= 1e-6


def test_hermite_projection_linearity():
    g1 = offset_gaussian(32, 7.0)
    g2 = offset_gaussian(32, 7.0, c=(-0.2, 0.5), w=0.8)
    lam = 1.0
    lhs = twisted.hermite_projection(
        1, lam, 1, GridFunction.like(g1, 2.0 * g1.values - 1j * g2.values))
    rhs = (2.0 * twisted.hermite_projection(1, lam, 1, g1).values
           - 1j * twisted.hermite_projection(1, lam, 1, g2).values)
    assert np.max(np.abs(lhs.values - rhs)) <= 1e-12 * np.max(np.abs(rhs))


def test_projection_idempotence():
    g = offset_gaussian(64, 10.0)
    lam = 1.0
    p1 = twisted.hermite_projection(1, lam, 2, g)
    p2 = twisted.hermite_projection(1, lam, 2, p1)
    assert np.linalg.norm(p2.values - p1.values) / np.linalg.norm(p1.values) <= 1e-4
    q = twisted.hermite_projection(1, lam, 4, p1)
    assert np.linalg.norm(q.values) / np.linalg.norm(p1.values) <= 1e-4


def test_projection_via_A_identity_reduction(heis):
    # the deterministic selection at J_eta = J_2 is an orthogonal symplectic
    # map; the conjugated projection coincides with hermite_projection (the
    # radial phi_k is invariant under orthogonal symplectic changes)
    g = offset_gaussian(56, 11.0)
    lam = 1.0
    fac = factorize_direction(heis, [1.0])
    assert np.allclose(fac.A_eta.T @ fac.A_eta, np.eye(2), atol=1e-12)
    via = twisted.projection_via_A(heis, fac, lam, 1, g)
    direct = twisted.hermite_projection(1, lam, 1, g)
    scale = (lam / (2 * np.pi)) ** 1
    rel = np.max(np.abs(scale * via.values - direct.values)) / np.max(np.abs(direct.values))
    assert rel <= 1e-6


def test_projection_via_A_eigen_minus_eta(heis):
    # eta = -1 on Heisenberg: A is a signed permutation; the conjugated
    # projection is an eigenfunction of Delta^{lam eta}
    g = offset_gaussian(48, 9.0)
    lam = 1.0
    fac = factorize_direction(heis, [-1.0])
    proj = twisted.projection_via_A(heis, fac, lam, 1, g)
    out = twisted_laplacian_mu(heis, -lam * np.ones(1), proj)
    resid = np.linalg.norm(out.values - lam * 3 * proj.values) / np.linalg.norm(proj.values)
    assert resid <= 0.1  # O(h^2) at this resolution


def test_conjugation_consistency(heis):
    # Delta^{lam eta}(g o A) = (L^lam g) o A for the deterministic selection
    lam = 1.0
    fac = factorize_direction(heis, [-1.0])
    g = offset_gaussian(48, 9.0)
    gA = compose_linear(g, fac.A_eta)
    lhs = twisted_laplacian_mu(heis, -lam * np.ones(1), gA)
    rhs = compose_linear(twisted_laplacian_apply(1, lam, g), fac.A_eta)
    rel = np.linalg.norm(lhs.values - rhs.values) / np.linalg.norm(rhs.values)
    assert rel <= 1e-10  # exact signed-permutation composition


def test_projection_via_A_quaternionic_smoke(quat):
    # coarse first-layer smoke grids: k = 0 eigen-residual of Delta^{lam eta}
    # is O(h^2); asserts the order between the two feasible sizes plus an
    # absolute bound at the finer one (1e-2 would need grids whose O(P^2)
    # convolution is out of desk-scale reach; see the decisions ledger)
    lam = 1.0
    eta = np.array([1.0, 0.0, 0.0])
    fac = factorize_direction(quat, eta)
    resids = []
    hs = []
    for N in (10, 14):
        L = 6.5
        ax = (np.arange(N) - N // 2) * (2 * L / N)
        mesh = np.meshgrid(*([ax] * 4), indexing="ij")
        r2 = sum(t**2 for t in mesh)
        g = GridFunction("layer", 2, 0, np.exp(-r2 / 3.0), L)
        proj = twisted.projection_via_A(quat, fac, lam, 0, g)
        out = twisted_laplacian_mu(quat, lam * eta, proj)
        resids.append(np.linalg.norm(out.values - lam * 2 * proj.values)
                      / np.linalg.norm(proj.values))
        hs.append(2 * L / N)
    order = np.log(resids[0] / resids[1]) / np.log(hs[0] / hs[1])
    assert order >= 1.5
    assert resids[1] <= 0.2


def test_reconstruct_single_mode_and_monotonicity():
    base = layer_base(64, 10.0)
    g = twisted.phi_grid(2, 1, 1.0, base)
    recon, errs = twisted.reconstruct(1, 1.0, g, 6)
    assert errs[2] <= 1e-6
    assert np.all(np.diff(errs[:3]) <= 0)
    g2 = offset_gaussian(64, 10.0)
    _, errs2 = twisted.reconstruct(1, 1.0, g2, 10)
    assert errs2[10] <= errs2[0]


def test_twisted_young_bound():
    f = offset_gaussian(32, 7.0)
    g = offset_gaussian(32, 7.0, c=(-0.3, 0.1), w=0.7)
    conv = twisted.twisted_convolution(1, 1.0, f, g)
    assert conv.lp_norm(2) <= f.lp_norm(1) * g.lp_norm(2) * (1 + 1e-8)


def test_backend_agreement():
    f = offset_gaussian(24, 6.0)
    g = offset_gaussian(24, 6.0, c=(0.2, -0.1), w=0.8)
    outs = {}
    for backend in ("numba", "numpy"):
        _kernels.set_backend(backend)
        outs[backend] = {
            "conv": twisted.twisted_convolution(1, 1.3, f, g).values,
            "batch": twisted.projection_batch(1, 1.0, 3, g)[2].values,
        }
    _kernels.set_backend("auto")
    for key in outs["numba"]:
        diff = np.max(np.abs(outs["numba"][key] - outs["numpy"][key]))
        scale = np.max(np.abs(outs["numpy"][key]))
        assert diff <= 1e-8 * max(scale, 1e-30)


def test_general_dimension_kernel_agreement(quat):
    # 2n = 4 twisted convolution: numba vs numpy paths agree
    N, L = 8, 5.0
    ax = (np.arange(N) - N // 2) * (2 * L / N)
    mesh = np.meshgrid(*([ax] * 4), indexing="ij")
    r2 = sum(t**2 for t in mesh)
    f = GridFunction("layer", 2, 0, np.exp(-r2 / 2.0), L)
    g = GridFunction("layer", 2, 0, np.exp(-r2 / 3.0) * (1 + 0.2 * mesh[0]), L)
    outs = {}
    for backend in ("numba", "numpy"):
        _kernels.set_backend(backend)
        outs[backend] = twisted.twisted_convolution(2, 0.9, f, g).values
    _kernels.set_backend("auto")
    diff = np.max(np.abs(outs["numba"] - outs["numpy"]))
    assert diff <= 1e-8 * np.max(np.abs(outs["numpy"]))
