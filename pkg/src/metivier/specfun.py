"""Hermite and Laguerre special functions.

h_k(t) = (2^k k! sqrt(pi))^{-1/2} H_k(t) e^{-t^2/2}           (normalized)
Phi_alpha(y) = prod_j h_{alpha_j}(y_j)                         (Hermite fns)
L_k^nu(x)    by the forward three-term recurrence
phi_k(z)     = L_k^{n-1}(|z|^2/2) e^{-|z|^2/4}                 (Laguerre fns)
phi_k^lam(z) = phi_k(sqrt(lam) z)

The recurrences are stable in the regime used here (k up to a few hundred,
moderate arguments); out-of-regime calls fail loudly rather than return
garbage.
"""

import math

import numpy as np

from .quadrature import gauss_legendre

_K_MAX = 10**6


def hermite_h(k, t):
    """Normalized Hermite function h_k(t); L^2(R) norm 1."""
    if k < 0 or k > _K_MAX:
        raise ValueError(f"degree {k} outside the supported range [0, {_K_MAX}]")
    t = np.asarray(t, dtype=float)
    h_prev = np.pi ** (-0.25) * np.exp(-0.5 * t * t)
    if k == 0:
        return h_prev
    h_cur = np.sqrt(2.0) * t * h_prev
    for j in range(1, k):
        h_next = np.sqrt(2.0 / (j + 1.0)) * t * h_cur - np.sqrt(j / (j + 1.0)) * h_prev
        h_prev, h_cur = h_cur, h_next
    return h_cur


def hermite_fn(alpha, y):
    """Multi-dimensional Hermite function Phi_alpha(y) = prod h_{alpha_j}(y_j)."""
    alpha = tuple(int(a) for a in np.atleast_1d(alpha))
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != len(alpha):
        raise ValueError("y must supply one coordinate per multi-index entry")
    out = np.ones(y.shape[:-1])
    for j, aj in enumerate(alpha):
        out = out * hermite_h(aj, y[..., j])
    return out


def laguerre(k, nu, x):
    """Laguerre polynomial L_k^nu(x) by forward recurrence (nu > -1, x >= 0)."""
    if nu <= -1:
        raise ValueError("Laguerre type must satisfy nu > -1")
    if k < 0 or k > _K_MAX:
        raise ValueError(f"degree {k} outside the supported range [0, {_K_MAX}]")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("Laguerre argument must be nonnegative")
    lm = np.ones_like(x)
    if k == 0:
        return lm
    lc = 1.0 + nu - x
    for j in range(1, k):
        ln = ((2.0 * j + 1.0 + nu - x) * lc - (j + nu) * lm) / (j + 1.0)
        lm, lc = lc, ln
    return lc


def _weighted_laguerre(k, nu, x):
    """L_k^nu(x) e^{-x/2}; the damping is folded into the recurrence seed so
    intermediates stay bounded in the supported regime."""
    x = np.asarray(x, dtype=float)
    e = np.exp(-0.5 * x)
    lm = e.copy()
    if k == 0:
        return lm
    lc = (1.0 + nu - x) * e
    for j in range(1, k):
        ln = ((2.0 * j + 1.0 + nu - x) * lc - (j + nu) * lm) / (j + 1.0)
        lm, lc = lc, ln
    return lc


def laguerre_fn(k, n, z):
    """phi_k(z) = L_k^{n-1}(|z|^2/2) e^{-|z|^2/4} on R^{2n} (radial in z).

    z supplies coordinates along its last axis (length 2n).
    """
    z = np.asarray(z, dtype=float)
    if z.shape[-1] != 2 * n:
        raise ValueError(f"z must have {2*n} coordinates on its last axis")
    r2 = np.sum(z * z, axis=-1)
    return phi_k_radial(k, n, np.sqrt(r2))


def phi_k_radial(k, n, r):
    """phi_k as a function of the radius r = |z|."""
    r = np.asarray(r, dtype=float)
    x = 0.5 * r * r
    _check_weighted_regime(k, float(np.max(x, initial=0.0)))
    return _weighted_laguerre(k, n - 1, x)


def laguerre_fn_scaled(k, n, lam, z):
    """phi_k^lam(z) = phi_k(sqrt(lam) z), lam > 0."""
    if lam <= 0:
        raise ValueError("lam must be positive")
    return laguerre_fn(k, n, np.sqrt(lam) * np.asarray(z, dtype=float))


def _check_weighted_regime(k, xmax):
    # crude overflow bound on intermediates x^j/j! e^{-x/2}, j <= k
    if k == 0 or xmax <= 1.0:
        return
    j = min(k, int(xmax))
    logpeak = j * math.log(xmax) - math.lgamma(j + 1.0) - 0.5 * xmax
    if logpeak > 600.0:
        raise ValueError(
            f"weighted Laguerre recurrence out of its stable regime "
            f"(k={k}, max arg={xmax:.1f})")


def phi_k_zero(k, n):
    """phi_k(0) = (k+n-1)! / (k! (n-1)!)."""
    return math.comb(k + n - 1, k)


def phi_l2_norm(k, n, mu_abs):
    """Exact ||phi_k^{|mu|}||_{L^2(R^{2n})} = |mu|^{-n/2} sqrt((2 pi)^n
    Gamma(k+n) / (Gamma(n) k!))."""
    if mu_abs <= 0:
        raise ValueError("|mu| must be positive")
    lg = 0.5 * (n * math.log(2.0 * math.pi) + math.lgamma(k + n) - math.lgamma(n) - math.lgamma(k + 1))
    return mu_abs ** (-0.5 * n) * math.exp(lg)


def phi_l2_norm_quadrature(k, n, mu_abs, order=400):
    """||phi_k^{|mu|}||_2 by radial Gauss-Legendre quadrature (oracle)."""
    rmax = np.sqrt((8.0 * k + 6.0 * n + 260.0) / mu_abs)
    r, w = gauss_legendre(order, 0.0, rmax)
    area = 2.0 * np.pi ** n / math.gamma(n)
    vals = phi_k_radial(k, n, np.sqrt(mu_abs) * r) ** 2
    return float(np.sqrt(area * np.sum(w * vals * r ** (2 * n - 1))))


def phi_l2_norm_check(k, n, mu):
    """Normalized ratio ||phi_k^{|mu|}||_2 |mu|^{n/2} k^{-(n-1)/2} (bounded
    uniformly in k per the L^2 estimate)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    mu_abs = float(np.linalg.norm(np.atleast_1d(mu)))
    return phi_l2_norm(k, n, mu_abs) * mu_abs ** (0.5 * n) * k ** (-0.5 * (n - 1))


def phi_mu_derivative(k, n, mu, j, r):
    """Closed-form d/dmu_j phi_k^{|mu|}(r):

    (mu_j/|mu|) ( k phi_k^{|mu|}(r)/|mu| - (k+n-1) phi_{k-1}^{|mu|}(r)/|mu|
                  - r^2 phi_k^{|mu|}(r) / 4 )
    """
    mu = np.asarray(mu, dtype=float).reshape(-1)
    mu_abs = float(np.linalg.norm(mu))
    if mu_abs == 0:
        raise ValueError("mu must be nonzero")
    r = np.asarray(r, dtype=float)
    pk = phi_k_radial(k, n, np.sqrt(mu_abs) * r)
    out = (k / mu_abs) * pk - 0.25 * r * r * pk
    if k >= 1:
        out -= ((k + n - 1) / mu_abs) * phi_k_radial(k - 1, n, np.sqrt(mu_abs) * r)
    return (mu[j] / mu_abs) * out


def phi_mu_derivative_fd(k, n, mu, j, r, h=1e-5):
    """Central finite difference of mu_j -> phi_k^{|mu|}(r) (oracle)."""
    mu = np.asarray(mu, dtype=float).reshape(-1)
    up = mu.copy()
    dn = mu.copy()
    up[j] += h
    dn[j] -= h
    fp = phi_k_radial(k, n, np.sqrt(np.linalg.norm(up)) * np.asarray(r))
    fm = phi_k_radial(k, n, np.sqrt(np.linalg.norm(dn)) * np.asarray(r))
    return (fp - fm) / (2.0 * h)


def phi_sup_constant(n, k_values=range(2, 41), n_r=4000):
    """Estimate c_n in sup|phi_k| = c_n (k+n-1)!/k! by grid maximization.

    Returns (c_n estimate, per-k ratios).  The maximum sits at r = 0 for the
    e^{-x/2}-weighted Laguerre family, so c_n = 1/(n-1)!; the scan reports
    the measured constant rather than assuming it.
    """
    ratios = []
    for k in k_values:
        r = np.linspace(0.0, np.sqrt(4.0 * k + 8.0 * n + 40.0), n_r)
        sup = float(np.max(np.abs(phi_k_radial(k, n, r))))
        ratios.append(sup * math.factorial(k) / math.factorial(k + n - 1))
    ratios = np.array(ratios)
    return float(ratios.mean()), ratios


def special_hermite(alpha, beta, z, tol=1e-8, max_order=12, deg_cap=6):
    """Special Hermite function Phi_{alpha beta}(z), z in C^n ~ R^{2n}:

    (2 pi)^{-n/2} int e^{i x.xi} Phi_alpha(xi + y/2) Phi_beta(xi - y/2) dxi

    evaluated by tensorized Gauss-Legendre quadrature whose order is raised
    until successive refinements differ by < tol.
    """
    alpha = tuple(int(a) for a in np.atleast_1d(alpha))
    beta = tuple(int(b) for b in np.atleast_1d(beta))
    n = len(alpha)
    if len(beta) != n:
        raise ValueError("alpha and beta must have the same length")
    if max(sum(alpha), sum(beta)) > deg_cap:
        raise ValueError(f"|alpha|, |beta| capped at {deg_cap} by default")
    z = np.asarray(z, dtype=float)
    if z.shape[-1] != 2 * n:
        raise ValueError(f"z must have {2*n} coordinates (x then y)")
    x, y = z[..., :n], z[..., n:]

    half_width = math.sqrt(2.0 * (max(sum(alpha), sum(beta)) + 1.0)) + 8.0
    prev = None
    order = 64
    for _ in range(max_order):
        val = np.ones(z.shape[:-1], dtype=np.complex128) * (2.0 * np.pi) ** (-0.5 * n)
        for jdim in range(n):
            xi, w = gauss_legendre(order, -half_width, half_width)
            ha = hermite_h(alpha[jdim], xi[:, None] + 0.5 * y[..., jdim].reshape(-1)[None, :])
            hb = hermite_h(beta[jdim], xi[:, None] - 0.5 * y[..., jdim].reshape(-1)[None, :])
            ph = np.exp(1j * np.outer(x[..., jdim].reshape(-1), xi).T)
            comp = np.sum(w[:, None] * ha * hb * ph, axis=0).reshape(z.shape[:-1])
            val = val * comp
        if prev is not None and np.max(np.abs(val - prev)) < tol:
            return val if val.shape else complex(val)
        prev = val
        order = int(order * 1.6)
    raise RuntimeError(
        f"special_hermite quadrature did not converge; last error "
        f"{float(np.max(np.abs(val - prev))):.2e}")
