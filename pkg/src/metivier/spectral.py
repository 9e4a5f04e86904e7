"""Spectral projections P_lambda, Riesz means, multiplier kernels and the
empirical decay/scaling checks.

Kernel evaluations use the polar split mu = lambda * eta: an exact two-point
rule on S^0 (product rules for m >= 2) times Gauss-Legendre in the scaled
radial variable sigma = (2k+n) lambda.  The k-sum is truncated at an
adaptive K and closed with an algebraic tail correction: for k -> inf the
k-th term approaches (2k+n)^{-(n+m)} binom(k+n-1,k) times a Bessel-limit
profile of the Laguerre factor, and those sums are Hurwitz-zeta values.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.special import jv, zeta

from . import fields, twisted
from ._kernels import laguerre_diag
from .quadrature import gauss_legendre, sphere_rule
from .symplectic import factorize_direction


@dataclass(frozen=True)
class MultiplierProfile:
    """Quadrature/truncation knobs for spectral evaluations.

    delta_or_alpha: Riesz order; R: mean radius; j: dyadic index (or None);
    K_max: k-sum truncation (None = automatic); sphere_order / radial_order:
    quadrature orders; tol: target for reported truncation estimates.
    """

    delta_or_alpha: float = 0.0
    R: float = 1.0
    j: int = None
    K_max: int = None
    sphere_order: int = 16
    radial_order: int = 64
    tol: float = 1e-8

    def __post_init__(self):
        if self.delta_or_alpha < 0:
            raise ValueError("Riesz order must be nonnegative")
        if self.R <= 0:
            raise ValueError("R must be positive")
        if self.sphere_order < 1 or self.radial_order < 1:
            raise ValueError("quadrature orders must be positive")

    def dyadic_window(self):
        """(lo, hi) support of the dyadic piece in lambda."""
        if self.j is None:
            return None
        return (1.0 - 2.0 ** (-self.j + 1), 1.0 - 2.0 ** (-self.j - 1))


DEFAULT_PROFILE = MultiplierProfile()


# ---------------------------------------------------------------------------
# dyadic partition of unity


def dyadic_bump(s):
    """Smooth nonnegative bump supported in (1/2, 2) with
    sum_j bump(2^j s) = 1 for s > 0."""
    s = np.asarray(s, dtype=float)

    def rho(t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        inside = (t > 0.5) & (t < 2.0)
        ti = t[inside]
        out[inside] = np.exp(-1.0 / ((ti - 0.5) * (2.0 - ti)))
        return out

    num = rho(s)
    den = rho(s) + rho(0.5 * s) + rho(2.0 * s)
    out = np.zeros_like(num)
    nz = den > 0
    out[nz] = num[nz] / den[nz]
    return out if out.shape else float(out)


def partition_check(bump=dyadic_bump, j_range=range(-30, 31), n_pts=2000):
    """Max deviation of sum_j bump(2^j s) from 1 over a log grid of s."""
    svals = np.exp(np.linspace(np.log(1e-6), np.log(1e6), n_pts))
    total = np.zeros_like(svals)
    for j in j_range:
        total = total + bump((2.0 ** j) * svals)
    return float(np.max(np.abs(total - 1.0)))


def phi_j_delta(lam, j, delta, bump=dyadic_bump):
    """Dyadic multiplier phi_j^delta(lam) = (1-lam)_+^delta bump(2^j (1-lam))."""
    lam = np.asarray(lam, dtype=float)
    s = 1.0 - lam
    return np.where(s > 0, s, 0.0) ** delta * bump((2.0 ** j) * s)


# ---------------------------------------------------------------------------
# sphere data and tail sums

_SPHERE_CACHE = {}


def _sphere_data(s, order):
    key = (id(s), s.name, order)
    hit = _SPHERE_CACHE.get(key)
    if hit is None:
        nodes, weights = sphere_rule(s.m, order)
        facs = [factorize_direction(s, eta) for eta in nodes]
        hit = (nodes, weights, facs)
        _SPHERE_CACHE[key] = hit
    return hit


def _binom_poly(n):
    # binom(k+n-1, k) as a polynomial in k
    c = np.array([1.0])
    for i in range(1, n):
        c = npoly.polymul(c, np.array([float(i), 1.0]))
    return c / math.factorial(n - 1)


def zeta_tail(n, m, p, K):
    """sum_{k > K} (2k+n)^{-(n+m+p)} binom(k+n-1, k), via Hurwitz zeta."""
    s_exp = n + m + p
    coef = _binom_poly(n)
    out_coef = np.zeros(len(coef))
    for deg, c in enumerate(coef):
        term = npoly.polypow(np.array([-0.5 * n, 1.0]), deg) if deg > 0 else np.array([1.0])
        out_coef[: len(term)] += c * term
    total = 0.0
    for jdeg, c in enumerate(out_coef):
        if c == 0.0:
            continue
        total += c * zeta(s_exp - jdeg, K + 1 + 0.5 * n)
    return float(total * 2.0 ** (-s_exp))


def _bessel_limit(n, v):
    """Gamma(n) v^{-(n-1)/2} J_{n-1}(2 sqrt(v)): the large-k limit of
    phi_k(sqrt(sigma/(2k+n)) z) / binom(k+n-1, k) at v = sigma |z|^2 / 4."""
    v = np.asarray(v, dtype=float)
    out = np.ones_like(v)
    nz = v > 1e-24
    vnz = v[nz]
    out[nz] = math.gamma(n) * vnz ** (-0.5 * (n - 1)) * jv(n - 1, 2.0 * np.sqrt(vnz))
    return out


# ---------------------------------------------------------------------------
# pointwise multiplier-kernel engine


class KernelPoint:
    """Nodal profile of the mu-integral at one evaluation point.

    Any bounded multiplier m(sigma) on the band becomes a weighted dot
    product against the profile, so families of multipliers (Riesz orders,
    dyadic pieces, Fourier factors) share all the heavy work.  The error
    estimate compares the tail-corrected sum against the one truncated at
    K/2 (the tail correction makes both accurate, so the difference bounds
    the truncation model error Richardson-style).
    """

    def __init__(self, sigma, weights, profile, profile_half):
        self.sigma = sigma
        self.weights = weights
        self.profile = profile
        self.profile_half = profile_half

    def apply(self, m_fn):
        mv = np.asarray(m_fn(self.sigma), dtype=np.complex128)
        value = complex(np.sum(self.weights * mv * self.profile))
        half = complex(np.sum(self.weights * mv * self.profile_half))
        err = abs(value - half) + 1e-300
        return value, err


def _auto_K(s, umax, band_hi, profile):
    if profile.K_max is not None:
        return int(profile.K_max)
    # the k-sum cancels across 2k+n <~ |u|; keep K well past that regime
    return int(min(8192, max(384, 4.0 * umax * band_hi + 128)))


def _sigma_nodes(band, umax, rho_max, n, profile):
    a, b = band
    cycles = (b - a) * umax / max(n, 1) / (2.0 * np.pi) + rho_max * (
        math.sqrt(b) - math.sqrt(a)) / np.pi
    count = int(min(2400, max(profile.radial_order, math.ceil(3.0 * cycles) + 24)))
    return gauss_legendre(count, a, b)


def raw_sigma_profile(s, x, u, sigma, K, sphere_data):
    """Sphere- and k-summed integrand profile at the sigma values:

        S(sigma) = sum_eta w_eta |det A_eta| [ sum_{k<=K} (2k+n)^{-(n+m)}
                   e^{-i sigma (eta.u)/(2k+n)} phi_k(sqrt(sigma/(2k+n)) A_eta x)
                   + Bessel-limit tail ]

    Returns (S, S_half) where S_half truncates at K//2 (same tail model);
    their difference estimates the truncation-model error.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    u = np.asarray(u, dtype=float).reshape(-1)
    nodes, wsig, facs = sphere_data
    n, m = s.n, s.m
    kk = np.arange(K + 1)
    twokn = 2.0 * kk + n
    wk = twokn ** (-(n + m))
    Kh = K // 2
    tails = {kc: tuple(zeta_tail(n, m, p, kc) for p in (0, 1, 2)) for kc in (K, Kh)}

    S = np.zeros(len(sigma), dtype=np.complex128)
    S_half = np.zeros_like(S)
    for (eta, weta, fac) in zip(nodes, wsig, facs):
        rho = float(np.linalg.norm(fac.A_eta @ x))
        uproj = float(eta @ u)
        T = np.outer(1.0 / (2.0 * twokn), sigma * rho * rho)
        lag = laguerre_diag(n - 1, T)
        terms = (wk[:, None] * np.exp((-1j * uproj) * np.outer(1.0 / twokn, sigma))) * lag
        bess = _bessel_limit(n, 0.25 * sigma * rho * rho)
        scale = weta * abs(fac.detA)
        for kc, target in ((K, S), (Kh, S_half)):
            Z0, Z1, Z2 = tails[kc]
            tail = bess * (Z0 - 1j * sigma * uproj * Z1 - 0.5 * (sigma * uproj) ** 2 * Z2)
            target += scale * (terms[: kc + 1].sum(axis=0) + tail)
    return S, S_half


def kernel_point(s, x, u, profile=DEFAULT_PROFILE, band=(0.0, 1.0), sphere_data=None):
    """Build the nodal profile W(sigma) of the kernel integrand at (x, u):
    G_m(x, u) = sum_r w_r m(sigma_r) W_r for any multiplier m on the band."""
    x = np.asarray(x, dtype=float).reshape(-1)
    u = np.asarray(u, dtype=float).reshape(-1)
    if sphere_data is None:
        sphere_data = _sphere_data(s, profile.sphere_order)
    nodes, wsig, facs = sphere_data
    n, m = s.n, s.m
    umax = float(np.max(np.abs(nodes @ u)))
    rho_max = max(float(np.linalg.norm(f.A_eta @ x)) for f in facs)
    K = _auto_K(s, umax, band[1], profile)
    sigma, wgl = _sigma_nodes(band, umax, rho_max, n, profile)
    S, S_half = raw_sigma_profile(s, x, u, sigma, K, sphere_data)
    radial = (2.0 * np.pi) ** (-(n + m)) * sigma ** (n + m - 1)
    return KernelPoint(sigma, wgl, S * radial, S_half * radial)


def multiplier_kernel_values(s, m_fn, points, profile=DEFAULT_PROFILE, band=(0.0, 1.0)):
    """Evaluate the kernel G_m of T_m = int m((2k+n)|mu|) ... at group points.

    Returns (values, error_estimates)."""
    sphere_data = _sphere_data(s, profile.sphere_order)
    vals = np.empty(len(points), dtype=np.complex128)
    errs = np.empty(len(points))
    for i, pt in enumerate(points):
        kp = kernel_point(s, pt.x, pt.u, profile, band, sphere_data)
        vals[i], errs[i] = kp.apply(m_fn)
    return vals, errs


def riesz_kernel(s, delta, points, profile=DEFAULT_PROFILE, R=1.0):
    """Pointwise Riesz kernel S_R^delta(x, u).

    The mu-integral needs delta > m - 1 at the stated truncations; smaller
    delta is refused rather than evaluated.
    """
    if delta <= s.m - 1:
        raise ValueError(
            f"Riesz kernel needs delta > m - 1 = {s.m - 1}; got delta = {delta}")
    return multiplier_kernel_values(
        s, lambda sig: np.maximum(1.0 - sig / R, 0.0) ** delta, points,
        profile, band=(0.0, R))


def kernel_scaling_check(s, delta, R, points, profile=DEFAULT_PROFILE):
    """Max relative deviation of S_R^delta(x,u) vs R^{Q/2} S_1^delta(sqrt(R)x, Ru)."""
    from .groups import GroupPoint

    lhs, _ = riesz_kernel(s, delta, points, profile, R=R)
    scaled = [GroupPoint(np.sqrt(R) * p.x, R * p.u) for p in points]
    rhs, _ = riesz_kernel(s, delta, scaled, profile, R=1.0)
    rhs = R ** (0.5 * s.Q) * rhs
    scale = np.max(np.abs(rhs))
    return float(np.max(np.abs(lhs - rhs)) / scale)


def dyadic_kernel(s, delta, j, points, profile=DEFAULT_PROFILE, bump=dyadic_bump):
    """Kernel of the dyadic piece T_j^delta (multiplier phi_j^delta)."""
    lo, hi = 1.0 - 2.0 ** (-j + 1), 1.0 - 2.0 ** (-j - 1)
    return multiplier_kernel_values(
        s, lambda sig: phi_j_delta(sig, j, delta, bump), points,
        profile, band=(max(lo, 0.0), hi))


# ---------------------------------------------------------------------------
# decay fits


def decay_fit(radii, values, n_bins=8, floor=None):
    """Envelope slope of log|values| against log(1 + r).

    Radii are binned geometrically and each bin contributes its max |value|:
    the pointwise kernels oscillate through zeros, so a raw least-squares
    fit of log|S| would be dominated by the dips.  Returns
    (slope, diagnostics); slope is None when fewer than 3 usable bins
    remain above the floor.
    """
    radii = np.asarray(radii, dtype=float)
    mags = np.abs(np.asarray(values))
    if floor is not None:
        keep = mags > floor
        radii, mags = radii[keep], mags[keep]
    if len(radii) < 3:
        return None, {"status": "inconclusive", "n_used": int(len(radii))}
    order = np.argsort(radii)
    radii, mags = radii[order], mags[order]
    bins = np.array_split(np.arange(len(radii)), min(n_bins, len(radii)))
    br, bv = [], []
    for idx in bins:
        if len(idx) == 0:
            continue
        br.append(float(np.exp(np.mean(np.log(1.0 + radii[idx])))))
        bv.append(float(np.max(mags[idx])))
    if len(br) < 3:
        return None, {"status": "inconclusive", "n_used": int(len(radii))}
    br, bv = np.log(np.array(br)), np.log(np.array(bv))
    slope, intercept = np.polyfit(br, bv, 1)
    return float(slope), {
        "status": "ok", "intercept": float(intercept),
        "window": (float(np.exp(br[0])), float(np.exp(br[-1]))),
        "n_bins": len(br),
    }


def _a_norm(fac, x, u):
    ax = fac.A_eta @ x
    x2 = float(ax @ ax)
    u2 = float(u @ u)
    return (x2 * x2 / 16.0 + u2) ** 0.25


def kernel_decay_fit(s, delta, N_order, rays, radii, profile=DEFAULT_PROFILE,
                     reference_eta=None):
    """Fit log|S^delta| against log(1 + |(A_eta x, u)|) along rays.

    rays: (x_dir, u_dir) tuples; the sample at radius r is (r x_dir,
    r^2 u_dir) so the homogeneous norm grows linearly in r.  One record per
    ray with the fitted envelope slope and its window.
    """
    from .groups import GroupPoint

    if delta <= 2 * N_order - 1:
        raise ValueError("decay exponent 2N needs delta > 2N - 1")
    if reference_eta is None:
        reference_eta = np.eye(s.m)[0]
    fac = factorize_direction(s, reference_eta)
    out = []
    for (x_dir, u_dir) in rays:
        x_dir = np.asarray(x_dir, dtype=float)
        u_dir = np.asarray(u_dir, dtype=float)
        pts = [GroupPoint(r * x_dir, r * r * u_dir) for r in radii]
        vals, errs = riesz_kernel(s, delta, pts, profile)
        anorm = np.array([_a_norm(fac, p.x, p.u) for p in pts])
        floor = 10.0 * float(np.max(errs))
        slope, diag = decay_fit(anorm, vals, floor=floor)
        out.append({"ray": (tuple(x_dir), tuple(u_dir)), "slope": slope,
                    "floor": floor, **diag})
    return out


# ---------------------------------------------------------------------------
# spectral projection P_lambda and the operators built on it


def p_lambda(s, f, lam, profile=DEFAULT_PROFILE, sphere_data=None):
    """Spectral projection

    P_lambda f = sum_k lam^{n+m-1} / (2 pi (2k+n))^{n+m}
                 int_S f * e_k^{(lam/(2k+n)) eta} dsigma(eta),

    each summand assembled on the layer as
    e^{-i lam_k eta(u)} ((f^{lam_k eta} o A^{-1}) x_{lam_k} phi_k^{lam_k}) o A.
    """
    if lam <= 0:
        raise ValueError("lambda must be positive")
    if f.domain != "group":
        raise ValueError("p_lambda needs a grid function on the full group")
    if sphere_data is None:
        sphere_data = _sphere_data(s, profile.sphere_order)
    nodes, wsig, facs = sphere_data
    n, m = s.n, s.m
    K = profile.K_max if profile.K_max is not None else 64
    nyquist = np.pi / f.hu
    acc = np.zeros(f.values.shape, dtype=np.complex128)
    u_mesh = np.meshgrid(*([f.u_axis] * m), indexing="ij", sparse=True)
    for k in range(K + 1):
        lam_k = lam / (2.0 * k + n)
        if lam_k > nyquist:
            # the u-grid cannot represent this central frequency; for
            # band-resolved f the true contribution is negligible while the
            # aliased discrete sum would be garbage
            continue
        wk = lam ** (n + m - 1) / (2.0 * np.pi * (2.0 * k + n)) ** (n + m)
        term = np.zeros_like(acc)
        for (eta, weta, fac) in zip(nodes, wsig, facs):
            conv = _twisted_piece(s, f, fac, eta, lam_k, k)
            uphase = np.exp(-1j * lam_k * sum(eta[t] * u_mesh[t] for t in range(m)))
            term += weta * conv.values[(...,) + (None,) * m] * uphase
        acc = acc + wk * term
        if k >= 8 and np.linalg.norm(term) * wk < 1e-13 * np.linalg.norm(acc):
            break
    return fields.GridFunction.like(f, acc)


def _twisted_piece(s, f, fac, eta, lam_k, k):
    fmu = fields.eval_partial_fourier(f, lam_k * eta)
    layer = fields.GridFunction("layer", s.n, 0, fmu, f.x_extent)
    ident = np.allclose(fac.A_eta, np.eye(2 * s.n), atol=1e-14)
    if not ident:
        layer = fields.compose_linear(layer, fac.A_inv)
    conv = twisted.twisted_convolution(s.n, lam_k, layer,
                                       twisted.phi_grid(k, s.n, lam_k, layer))
    if not ident:
        conv = fields.compose_linear(conv, fac.A_eta)
    return conv


def suggest_lambda_band(s, f, coverage=1.0 - 1e-6, profile=None, n_scan=12,
                        rel_floor=1e-3):
    """Spectral band of f: a |mu|-mass bracket (capped at the u-Nyquist)
    stretched by the eigenvalue factors, then trimmed by a coarse scan of
    ||P_lambda f||_2 to where the mass exceeds ``rel_floor`` of its peak."""
    fd = fields.partial_fourier_u(f)
    mu = fd.mu_axis
    x_axes = tuple(range(2 * s.n))
    mass = (np.abs(fd.values) ** 2).sum(axis=x_axes)
    if s.m > 1:
        mesh = np.meshgrid(*([mu] * s.m), indexing="ij")
        rad = np.sqrt(sum(t ** 2 for t in mesh)).ravel()
        mass = mass.ravel()
    else:
        rad = np.abs(mu)
    order = np.argsort(rad)
    rad = rad[order]
    cum = np.cumsum(mass[order])
    cum /= cum[-1]
    lo = rad[int(np.searchsorted(cum, 1.0 - coverage))]
    hi = rad[min(int(np.searchsorted(cum, coverage)), len(rad) - 1)]
    hi = min(hi, 0.95 * np.pi / f.hu)
    lam_lo = max(s.n * lo * 0.3, 1e-4)
    lam_hi = (2 * 16 + s.n) * hi
    scan_prof = MultiplierProfile(
        K_max=12, sphere_order=(profile.sphere_order if profile else 8))
    cand = np.geomspace(lam_lo, lam_hi, n_scan)
    sphere_data = _sphere_data(s, scan_prof.sphere_order)
    norms = np.array([p_lambda(s, f, lam, scan_prof, sphere_data).lp_norm(2)
                      for lam in cand])
    peak = float(np.max(norms))
    keep = np.where(norms >= rel_floor * peak)[0]
    i0, i1 = max(int(keep[0]) - 1, 0), min(int(keep[-1]) + 1, len(cand) - 1)
    return (float(cand[i0]), float(cand[i1]))


def _trapezoid_weights(x):
    w = np.zeros_like(x)
    w[1:] += 0.5 * np.diff(x)
    w[:-1] += 0.5 * np.diff(x)
    return w


def inversion_check(s, f, lambda_grid, profile=DEFAULT_PROFILE, coverage=1.0 - 1e-6):
    """Relative L2 error of the lambda-quadrature of int P_lambda f dlambda
    against f; warns when the captured mass stays below ``coverage``."""
    lambda_grid = np.asarray(lambda_grid, dtype=float)
    sphere_data = _sphere_data(s, profile.sphere_order)
    acc = np.zeros(f.values.shape, dtype=np.complex128)
    for lam, wl in zip(lambda_grid, _trapezoid_weights(lambda_grid)):
        acc = acc + wl * p_lambda(s, f, lam, profile, sphere_data).values
    ref = f.lp_norm(2)
    err = fields.GridFunction.like(f, acc - f.values).lp_norm(2) / ref
    recon_mass = fields.GridFunction.like(f, acc).lp_norm(2) ** 2 / ref ** 2
    if recon_mass < coverage:
        warnings.warn(
            f"inversion_check: lambda band captured only {recon_mass:.6f} "
            "of the L2 mass", stacklevel=2)
    return float(err)


def riesz_apply(s, f, delta, R, profile=DEFAULT_PROFILE, band=None, n_nodes=32):
    """S_R^delta f = int_0^R (1 - lambda/R)_+^delta P_lambda f dlambda."""
    if delta < 0 or R <= 0:
        raise ValueError("need delta >= 0 and R > 0")
    if band is None:
        band = suggest_lambda_band(s, f)
    lo, hi = max(band[0], 0.0), min(band[1], R)
    if hi <= lo:
        return fields.GridFunction.like(f, np.zeros(f.values.shape, dtype=np.complex128))
    lam_nodes, w = gauss_legendre(n_nodes, lo, hi)
    sphere_data = _sphere_data(s, profile.sphere_order)
    acc = np.zeros(f.values.shape, dtype=np.complex128)
    for lam, wl in zip(lam_nodes, w):
        acc = acc + (wl * (1.0 - lam / R) ** delta) * p_lambda(
            s, f, lam, profile, sphere_data).values
    return fields.GridFunction.like(f, acc)


def multiplier_apply(s, f, m_fn, a, b, profile=DEFAULT_PROFILE, n_nodes=32):
    """T_m f = int_a^b m(lambda) P_lambda f dlambda for bounded m."""
    if not (0 <= a < b):
        raise ValueError("need 0 <= a < b")
    lam_nodes, w = gauss_legendre(n_nodes, max(a, 1e-12), b)
    sphere_data = _sphere_data(s, profile.sphere_order)
    acc = np.zeros(f.values.shape, dtype=np.complex128)
    for lam, wl in zip(lam_nodes, w):
        acc = acc + (wl * m_fn(lam)) * p_lambda(s, f, lam, profile, sphere_data).values
    return fields.GridFunction.like(f, acc)


def dyadic_piece_apply(s, f, delta, j, profile=DEFAULT_PROFILE, bump=dyadic_bump,
                       n_nodes=24):
    """T_j^delta f with phi_j^delta(lambda) = (1-lambda)_+^delta
    bump(2^j (1-lambda)); the cutoff's partition property is verified first."""
    dev = partition_check(bump)
    if dev > 1e-10:
        raise ValueError(f"cutoff fails the partition-of-unity check by {dev:.2e}")
    lo = max(1.0 - 2.0 ** (-j + 1), 0.0)
    hi = 1.0 - 2.0 ** (-j - 1)
    return multiplier_apply(s, f, lambda lam: phi_j_delta(lam, j, delta, bump),
                            lo, hi, profile, n_nodes)


# ---------------------------------------------------------------------------
# Laguerre coefficients of the radialized kernel


def laguerre_coefficient_closed(s, delta, k, mu):
    """Closed form (1 - (2k+n)|mu|)_+^delta |det A_{mu/|mu|}|."""
    mu = np.asarray(mu, dtype=float).reshape(-1)
    mu_abs = float(np.linalg.norm(mu))
    if mu_abs == 0:
        raise ValueError("mu must be nonzero")
    fac = factorize_direction(s, mu / mu_abs)
    base = 1.0 - (2 * k + s.n) * mu_abs
    return (max(base, 0.0) ** delta) * abs(fac.detA)


def laguerre_coefficient_quadrature(s, delta, k, mu, n_nodes=400):
    """Coefficient integral against the synthesized radial profile
    F^mu(r) = |mu|^n sum_k' closed(k') phi_{k'}^{|mu|}(r):

        R_k = 2^{1-n} k!/(k+n-1)! int_0^inf F^mu(r) phi_k^{|mu|}(r) r^{2n-1} dr

    (the positive part truncates the k' sum exactly)."""
    from .specfun import phi_k_radial

    mu = np.asarray(mu, dtype=float).reshape(-1)
    mu_abs = float(np.linalg.norm(mu))
    if mu_abs == 0:
        raise ValueError("mu must be nonzero")
    n = s.n
    k_top = max(int(math.floor((1.0 / mu_abs - n) / 2.0)) + 1, k)
    rmax = math.sqrt((8.0 * k_top + 6.0 * n + 260.0) / mu_abs)
    r, w = gauss_legendre(max(n_nodes, 24 * k_top), 0.0, rmax)
    F = np.zeros_like(r)
    for kp in range(k_top + 1):
        ck = laguerre_coefficient_closed(s, delta, kp, mu)
        if ck == 0.0:
            continue
        F += ck * phi_k_radial(kp, n, np.sqrt(mu_abs) * r)
    F *= mu_abs ** n
    integ = np.sum(w * F * phi_k_radial(k, n, np.sqrt(mu_abs) * r) * r ** (2 * n - 1))
    return float(2.0 ** (1 - n) * math.factorial(k) / math.factorial(k + n - 1) * integ)


# ---------------------------------------------------------------------------
# multiplier kernel L2 norm (Plancherel route) and width scaling


def _phi_l2_series(s, K_part=4096):
    n, m = s.n, s.m
    kk = np.arange(K_part + 1)
    b = np.array([math.comb(k + n - 1, k) for k in kk], dtype=float)
    head = float(np.sum(b * (2.0 * kk + n) ** (-(n + m))))
    return head + zeta_tail(n, m, 0, K_part)


def g_m_kernel_l2(s, m_fn, a, b, profile=DEFAULT_PROFILE, n_nodes=256):
    """||G_m||_2 for T_m = int_a^b m(lambda) P_lambda dlambda via the
    Plancherel-in-u route and Laguerre orthogonality:

        ||G_m||_2^2 = (2pi)^{-(m+n)} D_s S_n
                      * int_a^b |m(sigma)|^2 sigma^{n+m-1} dsigma,

    D_s = int_S |det A_eta| dsigma,  S_n = sum_k (k+n-1)!/(k! Gamma(n))
    (2k+n)^{-(n+m)}.
    """
    if not (0 <= a < b):
        raise ValueError("need 0 <= a < b")
    n, m = s.n, s.m
    nodes, wsig, facs = _sphere_data(s, profile.sphere_order)
    Ds = float(np.sum(wsig * np.array([abs(f.detA) for f in facs])))
    Sn = _phi_l2_series(s)
    sig, w = gauss_legendre(n_nodes, a, b)
    integral = float(np.sum(w * np.abs(m_fn(sig)) ** 2 * sig ** (n + m - 1)))
    val2 = (2.0 * np.pi) ** (-(m + n)) * Ds * Sn * integral
    return math.sqrt(val2)


def multiplier_width_fit(s, widths, profile=DEFAULT_PROFILE):
    """Slope of log ||G_m||_2 against log w for m = chi_{[1-w, 1]}."""
    norms = [g_m_kernel_l2(s, np.ones_like, 1.0 - w, 1.0, profile) for w in widths]
    lw = np.log(np.asarray(widths, dtype=float))
    ln = np.log(np.asarray(norms))
    slope = float(np.polyfit(lw, ln, 1)[0])
    return slope, np.asarray(norms)


# ---------------------------------------------------------------------------
# restriction estimates


def restriction_admissible_p(m):
    """Upper endpoint (2m+2)/(m+3) of the admissible L^p range."""
    return (2.0 * m + 2.0) / (m + 3.0)


def restriction_scaling_fit(s, f, p, lambdas, profile=DEFAULT_PROFILE):
    """Fitted exponent of ||P_lambda f||_{p'} against lambda; the predicted
    exponent is Q (1/p - 1/2) - 1.  Requires 1 <= p <= (2m+2)/(m+3)."""
    pmax = restriction_admissible_p(s.m)
    if not (1.0 <= p <= pmax):
        raise ValueError(
            f"p = {p} outside the admissible range [1, (2m+2)/(m+3) = {pmax:.4f}]")
    pprime = np.inf if p == 1.0 else p / (p - 1.0)
    sphere_data = _sphere_data(s, profile.sphere_order)
    norms = [p_lambda(s, f, lam, profile, sphere_data).lp_norm(pprime)
             for lam in lambdas]
    ll = np.log(np.asarray(lambdas, dtype=float))
    ln = np.log(np.asarray(norms))
    slope = float(np.polyfit(ll, ln, 1)[0])
    return {"slope": slope, "target": s.Q * (1.0 / p - 0.5) - 1.0,
            "norms": np.asarray(norms)}


def mixed_restriction_check(s, f, p, q, r, lambdas, profile=DEFAULT_PROFILE):
    """Ratios lambda^{-e} ||P_lambda f||_{L^{r'}(g2) L^q(g1)} / ||f||_{L^r L^p}
    with e = m(2/r - 1) + n(1/p - 1/q) - 1 over the lambda list."""
    if not (1.0 <= p <= 2.0) or (q != np.inf and not (2.0 <= q)):
        raise ValueError("need 1 <= p <= 2 <= q <= inf")
    rmax = restriction_admissible_p(s.m)
    if not (1.0 <= r <= rmax):
        raise ValueError(f"need 1 <= r <= (2m+2)/(m+3) = {rmax:.4f}")
    rprime = np.inf if r == 1.0 else r / (r - 1.0)
    qinv = 0.0 if q == np.inf else 1.0 / q
    e = s.m * (2.0 / r - 1.0) + s.n * (1.0 / p - qinv) - 1.0
    fnorm = f.mixed_norm(r, p)
    sphere_data = _sphere_data(s, profile.sphere_order)
    ratios = []
    for lam in lambdas:
        pl = p_lambda(s, f, lam, profile, sphere_data)
        ratios.append(pl.mixed_norm(rprime, q) / (lam ** e * fnorm))
    return {"exponent": e, "ratios": np.asarray(ratios)}
