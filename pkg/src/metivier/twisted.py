"""Twisted convolution, special Hermite projections, and the expansion

    g = (lam/2pi)^n sum_k g x_lam phi_k^lam          (layer expansion)

with the A_eta-conjugated projections whose eigenfunction property the
test-suite verifies against the discretized twisted Laplacians.
"""

import warnings

import numpy as np

from . import fields, specfun
from ._kernels import twisted_conv_2d, twisted_conv_2d_batch, twisted_conv_nd


def _standard_twist_matrix(n, lam):
    # phase exp((i/2) lam sum_j (z_j w_{n+j} - z_{n+j} w_j)) = exp((i/2) <z, J w>)
    # with J = lam * J_2n; this is the mu-twist phase at J_mu = lam J_2n and the
    # sign that makes g x_lam phi_k^lam an eigenfunction of the twisted Laplacian
    J = np.zeros((2 * n, 2 * n))
    J[:n, n:] = lam * np.eye(n)
    J[n:, :n] = -lam * np.eye(n)
    return J


def _check_extent(phi, psi):
    # values inside the box are exact when either factor decays within it;
    # warn only when both carry boundary mass (translated support escapes)
    bp, bq = phi.boundary_mass(), psi.boundary_mass()
    if bp > 1e-8 and bq > 1e-8:
        warnings.warn(
            f"twisted convolution: both factors carry boundary mass "
            f"({bp:.2e}, {bq:.2e}); translated support leaves the box",
            stacklevel=3)


def twisted_convolution(n, lam, phi, psi):
    """phi x_lam psi on g1; lam = 0 degenerates to ordinary convolution."""
    if phi.domain != "layer" or psi.domain != "layer":
        raise ValueError("twisted_convolution acts on first-layer grid functions")
    if phi.values.shape != psi.values.shape or phi.x_extent != psi.x_extent:
        raise ValueError("grid mismatch between twisted convolution factors")
    _check_extent(phi, psi)
    vol = phi.cell_volume()
    if n == 1:
        # exponent (i/2)<z, (lam J_2)w> = i(lam/2)(z1 w2 - z2 w1)
        out = twisted_conv_2d(phi.values, psi.values, phi.x_axis, 0.5 * lam, vol)
    else:
        out = twisted_conv_nd(phi.values, psi.values, phi.x_axis,
                              _standard_twist_matrix(n, lam), vol)
    return fields.GridFunction.like(phi, out)


def mu_twisted_convolution(s, mu, phi, psi):
    """mu-twisted convolution with phase exp((i/2) mu([x,y])) and measure
    d_mu y = sqrt(det J_mu) dy."""
    mu = np.asarray(mu, dtype=float).reshape(-1)
    if np.linalg.norm(mu) == 0:
        raise ValueError("mu must be nonzero (use group convolution at mu = 0)")
    if phi.domain != "layer" or psi.domain != "layer":
        raise ValueError("mu_twisted_convolution acts on first-layer grid functions")
    _check_extent(phi, psi)
    Jmu = s.j_of(mu)
    det = np.linalg.det(Jmu)
    measure = np.sqrt(max(det, 0.0))
    vol = phi.cell_volume()
    if s.n == 1:
        gamma = 0.5 * Jmu[0, 1]
        out = twisted_conv_2d(phi.values, psi.values, phi.x_axis, gamma, vol)
    else:
        out = twisted_conv_nd(phi.values, psi.values, phi.x_axis, Jmu, vol)
    return fields.GridFunction.like(phi, out * measure)


def phi_grid(k, n, lam, like):
    """Sample phi_k^lam on the grid of ``like``."""
    ax = like.x_axis
    mesh = np.meshgrid(*([ax] * (2 * n)), indexing="ij", sparse=True)
    r = np.sqrt(sum(np.broadcast_to(m, [like.nx] * (2 * n)) ** 2 for m in mesh))
    vals = specfun.phi_k_radial(k, n, np.sqrt(lam) * r)
    return fields.GridFunction("layer", n, 0, vals.astype(np.complex128), like.x_extent)


def phi_grid_stack(k_max, n, lam, like):
    """phi_0^lam .. phi_{k_max}^lam sampled on the grid (shared recurrence)."""
    ax = like.x_axis
    mesh = np.meshgrid(*([ax] * (2 * n)), indexing="ij", sparse=True)
    r2 = sum(np.broadcast_to(m, [like.nx] * (2 * n)) ** 2 for m in mesh)
    x = 0.5 * lam * r2
    e = np.exp(-0.5 * x)
    out = np.empty((k_max + 1,) + x.shape)
    lm = e.copy()
    out[0] = lm
    if k_max >= 1:
        lc = (n - x) * e
        out[1] = lc
        nu = n - 1
        for j in range(1, k_max):
            ln = ((2.0 * j + 1.0 + nu - x) * lc - (j + nu) * lm) / (j + 1.0)
            lm, lc = lc, ln
            out[j + 1] = lc
    return out


def hermite_projection(n, lam, k, g):
    """(lam/2pi)^n g x_lam phi_k^lam: projection onto the lam(2k+n)
    eigenspace of the scaled special Hermite operator."""
    if lam <= 0:
        raise ValueError("lam must be positive")
    phik = phi_grid(k, n, lam, g)
    conv = twisted_convolution(n, lam, g, phik)
    return fields.GridFunction.like(g, conv.values * (lam / (2.0 * np.pi)) ** n)


def projection_batch(n, lam, k_max, g):
    """All projections (lam/2pi)^n g x_lam phi_k^lam for k = 0..k_max.

    For n = 1 the batched kernel shares the phase tables across k.
    """
    if lam <= 0:
        raise ValueError("lam must be positive")
    scale = (lam / (2.0 * np.pi)) ** n
    if n == 1:
        # g x_lam phi_k (z) = sum_w phi_k(z-w) g(w) exp(-i(lam/2)(z1 w2 - z2 w1)),
        # so the stacked phi_k supplies the translate and the phase sign flips.
        stack = phi_grid_stack(k_max, n, lam, g).astype(np.complex128)
        out = twisted_conv_2d_batch(stack, g.values, g.x_axis, -0.5 * lam, g.cell_volume())
        return [fields.GridFunction.like(g, scale * out[k]) for k in range(k_max + 1)]
    return [hermite_projection(n, lam, k, g) for k in range(k_max + 1)]


def projection_via_A(s, fac, lam, k, g):
    """Pi_k^{lam eta} g = (g_eta x_lam phi_k^lam) o A_eta, g_eta = g o A_eta^{-1}."""
    if lam <= 0:
        raise ValueError("lam must be positive")
    A = fac.A_eta
    ident = np.allclose(A, np.eye(2 * s.n), atol=1e-14)
    g_eta = g if ident else fields.compose_linear(g, fac.A_inv)
    conv = twisted_convolution(s.n, lam, g_eta, phi_grid(k, s.n, lam, g))
    return conv if ident else fields.compose_linear(conv, A)


def reconstruct(n, lam, g, k_max):
    """Partial sums of the layer expansion; returns (best reconstruction,
    per-K relative L2 errors for K = 0..k_max)."""
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    projs = projection_batch(n, lam, k_max, g)
    ref = g.lp_norm(2)
    acc = np.zeros_like(np.asarray(g.values))
    errors = []
    for k in range(k_max + 1):
        acc = acc + projs[k].values
        err = fields.GridFunction.like(g, acc - g.values).lp_norm(2) / ref
        errors.append(err)
    return fields.GridFunction.like(g, acc), np.array(errors)
