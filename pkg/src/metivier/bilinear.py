"""Bilinear Riesz means: operators, pointwise kernels, dyadic pieces and the
Fourier-series separation.

The dyadic multiplier phi_j^alpha(l1, l2) = (1-l1-l2)_+^alpha
bump(2^j (1-l1-l2)) depends on l1+l2 only, which buys two big reductions:

* pointwise kernels factorize per quadrature node of the Duffy-type split
  sigma1 = tau xi, sigma2 = tau (1-xi), so the double (k, l) sum is a
  product of two one-dimensional profiles;
* the even t -> phi_j^alpha(|s|, |t|) extension has real Fourier
  coefficients gamma_{j,q}(s), and T_j^alpha(f, g) separates into a q-sum
  of products of linear multiplier operators.

Apply-level operators expand P_lambda f in a Chebyshev basis over lambda
(lambda -> P_lambda f is analytic), so every multiplier integral becomes a
small moment matrix against cached coefficient fields.
"""

import math

import numpy as np

from . import fields
from .quadrature import gauss_legendre
from .spectral import (
    DEFAULT_PROFILE,
    _sphere_data,
    dyadic_bump,
    kernel_point,
    p_lambda,
    partition_check,
    phi_j_delta,
    raw_sigma_profile,
)


# ---------------------------------------------------------------------------
# Fourier coefficients gamma_{j,q}^alpha


def phi_j_alpha(s, t, j, alpha, bump=dyadic_bump):
    """Bilinear dyadic multiplier (1-s-t)_+^alpha bump(2^j (1-s-t))."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    w = 1.0 - s - t
    return np.where(w > 0, w, 0.0) ** alpha * bump((2.0 ** j) * w)


def gamma_table(alpha, j, q_max, s_values, bump=dyadic_bump, n_t=32768):
    """gamma_{j,q}^alpha(s) = int_0^1 phi_j^alpha(|s|, t) cos(pi q t) dt for
    q = 0..q_max at each s; the even period-2 extension makes them real and
    even in q, computed here by one rFFT per s row."""
    s_values = np.atleast_1d(np.asarray(s_values, dtype=float))
    tt = -1.0 + 2.0 * np.arange(n_t) / n_t
    F = phi_j_alpha(np.abs(s_values)[:, None], np.abs(tt)[None, :], j, alpha, bump)
    coef = np.fft.rfft(F, axis=1) / n_t
    signs = (-1.0) ** np.arange(q_max + 1)
    return np.real(coef[:, : q_max + 1]) * signs[None, :]


def gamma_reconstruct(gam_row, s_abs, t_values):
    """Sum_q gamma_q e^{i pi q t} (using gamma_{-q} = gamma_q) at t_values."""
    q = np.arange(len(gam_row))
    basis = np.cos(np.pi * np.outer(t_values, q))
    return basis @ (gam_row * np.where(q == 0, 1.0, 2.0))


def gamma_parseval_gap(alpha, j, s, q_max=4096, bump=dyadic_bump):
    """Relative gap in 2 sum_{q in Z} gamma_q^2 = int_{-1}^{1} phi_j^alpha(|s|,|t|)^2 dt."""
    gam = gamma_table(alpha, j, q_max, [s], bump)[0]
    lhs = 2.0 * (gam[0] ** 2 + 2.0 * np.sum(gam[1:] ** 2))
    t, w = gauss_legendre(2000, 0.0, 1.0)
    rhs = 2.0 * float(np.sum(w * phi_j_alpha(abs(s), t, j, alpha, bump) ** 2))
    if rhs == 0.0:
        return abs(lhs)
    return abs(lhs - rhs) / rhs


def gamma_decay_check(alpha, delta, j_values, q_max=512, n_s=64, bump=dyadic_bump):
    """Normalized sup quantity max_{s,q} |gamma_{j,q}|(1+q)^{1+delta} 2^{j(alpha-delta)}
    per j; the decay estimate predicts a j-uniform bound."""
    if not (0.0 < delta < alpha):
        raise ValueError("need 0 < delta < alpha")
    out = {}
    for j in j_values:
        hi = 1.0 - 2.0 ** (-j - 1)
        svals = np.linspace(0.0, hi, n_s)
        gam = gamma_table(alpha, j, q_max, svals, bump)
        q = np.arange(q_max + 1)
        quant = np.abs(gam) * (1.0 + q)[None, :] ** (1.0 + delta)
        out[j] = float(np.max(quant)) * 2.0 ** (j * (alpha - delta))
    vals = np.array(list(out.values()))
    return {"per_j": out, "ratio": float(vals.max() / vals.min())}


# ---------------------------------------------------------------------------
# Chebyshev-in-lambda spectral cache for apply-level operators


class SpectralCache:
    """P_lambda f at Chebyshev nodes over a lambda interval, with coefficient
    fields; any multiplier integral int m(lambda) P_lambda f dlambda becomes
    a dot product of Chebyshev moments with the cached fields."""

    def __init__(self, s, f, interval=(0.0, 1.0), order=40, profile=DEFAULT_PROFILE):
        self.s = s
        self.f = f
        self.lo, self.hi = interval
        self.order = order
        theta = np.pi * (2.0 * np.arange(order) + 1.0) / (2.0 * order)
        self.nodes = self.lo + (self.hi - self.lo) * 0.5 * (np.cos(theta) + 1.0)
        sphere_data = _sphere_data(s, profile.sphere_order)
        stack = np.stack([
            p_lambda(s, f, lam, profile, sphere_data).values for lam in self.nodes
        ])
        # first-kind Chebyshev coefficients from the node values
        basis = np.cos(np.outer(np.arange(order), theta))   # (order, order)
        coef = (2.0 / order) * np.tensordot(basis, stack, axes=([1], [0]))
        coef[0] *= 0.5
        self.coef = coef

    def _mapped(self, lam):
        return np.clip(2.0 * (lam - self.lo) / (self.hi - self.lo) - 1.0, -1.0, 1.0)

    def moments(self, weight_fn, a=None, b=None, n_quad=4096):
        """m_c = int_a^b weight(lambda) T_c(mapped lambda) dlambda."""
        a = self.lo if a is None else a
        b = self.hi if b is None else b
        lam, w = gauss_legendre(n_quad, a, b)
        tv = np.polynomial.chebyshev.chebvander(self._mapped(lam), self.order - 1)
        wv = np.asarray(weight_fn(lam), dtype=np.complex128) * w
        return tv.T @ wv

    def apply_moments(self, moments):
        vals = np.tensordot(moments, self.coef, axes=([0], [0]))
        return fields.GridFunction.like(self.f, vals)

    def apply_weight(self, weight_fn, a=None, b=None):
        return self.apply_moments(self.moments(weight_fn, a, b))


# ---------------------------------------------------------------------------
# bilinear Riesz means (grid operators)


def bilinear_riesz_apply(s, f, g, alpha, R, profile=DEFAULT_PROFILE,
                         bands=None, n_nodes=24):
    """S_R^alpha(f, g) = int int (1-(l1+l2)/R)_+^alpha P_l1 f P_l2 g dl1 dl2
    on tensor Gauss-Legendre nodes with per-factor spectral bands."""
    from .spectral import suggest_lambda_band

    if alpha < 0 or R <= 0:
        raise ValueError("need alpha >= 0 and R > 0")
    if bands is None:
        bands = (suggest_lambda_band(s, f), suggest_lambda_band(s, g))
    sphere_data = _sphere_data(s, profile.sphere_order)
    out = np.zeros(f.values.shape, dtype=np.complex128)
    plans = []
    for gf, band in ((f, bands[0]), (g, bands[1])):
        lo, hi = max(band[0], 0.0), min(band[1], R)
        if hi <= lo:
            return fields.GridFunction.like(f, out)
        lam, w = gauss_legendre(n_nodes, lo, hi)
        vals = [p_lambda(s, gf, l, profile, sphere_data).values for l in lam]
        plans.append((lam, w, vals))
    (l1, w1, v1), (l2, w2, v2) = plans
    for i in range(len(l1)):
        for k in range(len(l2)):
            c = 1.0 - (l1[i] + l2[k]) / R
            if c <= 0.0:
                continue
            out += (w1[i] * w2[k] * c ** alpha) * (v1[i] * v2[k])
    return fields.GridFunction.like(f, out)


def dyadic_window(j):
    return (max(1.0 - 2.0 ** (-j + 1), 0.0), 1.0 - 2.0 ** (-j - 1))


def dyadic_bilinear_apply(s, f, g, alpha, j, caches=None, profile=DEFAULT_PROFILE,
                          bump=dyadic_bump, order=40, n_sigma=64, n_xi=96):
    """T_j^alpha(f, g) through the Chebyshev caches: a 2D moment matrix of
    phi_j^alpha against Chebyshev products, contracted with the coefficient
    fields of f and g."""
    dev = partition_check(bump)
    if dev > 1e-10:
        raise ValueError(f"cutoff fails the partition-of-unity check by {dev:.2e}")
    if caches is None:
        caches = (SpectralCache(s, f, (0.0, 1.0), order, profile),
                  SpectralCache(s, g, (0.0, 1.0), order, profile))
    cf, cg = caches
    M = _dyadic_moment_matrix(alpha, j, cf, cg, bump, n_sigma, n_xi)
    tmp = np.tensordot(M, cf.coef, axes=([0], [0]))
    vals = np.sum(tmp * cg.coef, axis=0)
    return fields.GridFunction.like(f, vals)


def _dyadic_moment_matrix(alpha, j, cf, cg, bump, n_sigma, n_xi):
    # lambda1 = sigma xi, lambda2 = sigma (1 - xi), Jacobian sigma; the
    # multiplier depends on sigma alone
    lo, hi = dyadic_window(j)
    sig, wsig = gauss_legendre(n_sigma, lo, hi)
    xi, wxi = gauss_legendre(n_xi, 0.0, 1.0)
    l1 = np.outer(sig, xi).ravel()
    l2 = np.outer(sig, 1.0 - xi).ravel()
    w = np.outer(wsig * sig * phi_j_alpha(0.0, sig, j, alpha, bump), wxi).ravel()
    t1 = np.polynomial.chebyshev.chebvander(cf._mapped(l1), cf.order - 1)
    t2 = np.polynomial.chebyshev.chebvander(cg._mapped(l2), cg.order - 1)
    return np.einsum("p,pa,pb->ab", w, t1, t2)


def separated_dyadic_apply(s, f, g, alpha, j, caches=None, q_max=256,
                           profile=DEFAULT_PROFILE, bump=dyadic_bump, order=40,
                           n_lam=512):
    """T_j^alpha(f, g) via the Fourier-series separation:

        sum_q [int gamma_{j,q}(l1) P_l1 f dl1] [int e^{i pi q l2} P_l2 g dl2]
    """
    if caches is None:
        caches = (SpectralCache(s, f, (0.0, 1.0), order, profile),
                  SpectralCache(s, g, (0.0, 1.0), order, profile))
    cf, cg = caches
    lam, w = gauss_legendre(n_lam, 0.0, 1.0)
    gam = gamma_table(alpha, j, q_max, lam, bump)        # (n_lam, q_max+1)
    t1 = np.polynomial.chebyshev.chebvander(cf._mapped(lam), cf.order - 1)
    t2 = np.polynomial.chebyshev.chebvander(cg._mapped(lam), cg.order - 1)
    m1 = np.einsum("p,pq,pa->qa", w, gam, t1)            # real moments per q >= 0
    qq = np.arange(-q_max, q_max + 1)
    out = np.zeros(f.values.shape, dtype=np.complex128)
    f_fields = {}
    for q in range(q_max + 1):
        f_fields[q] = np.tensordot(m1[q], cf.coef, axes=([0], [0]))
    for q in qq:
        m2 = t2.T @ (np.exp(1j * np.pi * q * lam) * w)
        gq = np.tensordot(m2, cg.coef, axes=([0], [0]))
        out += f_fields[abs(q)] * gq
    return fields.GridFunction.like(f, out)


# ---------------------------------------------------------------------------
# pointwise bilinear kernels


def bilinear_kernel(s, alpha, pairs, profile=DEFAULT_PROFILE, j=None,
                    bump=dyadic_bump, n_tau=48, n_xi=48, K=None, R=1.0):
    """Direct evaluation of the bilinear kernel S_R^alpha at point pairs.

    Duffy split sigma1 = tau xi, sigma2 = tau (1 - xi): the weight depends on
    tau only, so for each node the double (k, mu1) x (l, mu2) sum factors
    into the two one-dimensional sigma-profiles.  With j given, evaluates
    the dyadic piece K_j^alpha (at R = 1) instead of S^alpha.

    Guard: alpha > 2(m-1) (two radial mu-integrals).
    """
    if alpha <= 2 * (s.m - 1):
        raise ValueError(
            f"bilinear kernel needs alpha > 2(m-1) = {2*(s.m-1)}; got {alpha}")
    n, m = s.n, s.m
    sphere_data = _sphere_data(s, profile.sphere_order)
    nodes_eta, _, facs = sphere_data
    umax = rho_max = 0.0
    for pair in pairs:
        for p in pair:
            umax = max(umax, float(np.max(np.abs(nodes_eta @ p.u))))
            rho_max = max(rho_max, max(float(np.linalg.norm(f.A_eta @ p.x)) for f in facs))
    osc = math.ceil(3.0 * (umax * R / (2.0 * np.pi) + rho_max * math.sqrt(R) / np.pi)) + 16
    n_tau = int(min(400, max(n_tau, osc)))
    n_xi = int(min(400, max(n_xi, osc)))
    if j is None:
        tau, wt = gauss_legendre(n_tau, 0.0, R)
        wt = wt * (1.0 - tau / R) ** alpha
    else:
        if R != 1.0:
            raise ValueError("dyadic pieces are defined at R = 1")
        lo, hi = dyadic_window(j)
        tau, wt = gauss_legendre(n_tau, lo, hi)
        wt = wt * phi_j_alpha(0.0, tau, j, alpha, bump)
    xi, wxi = gauss_legendre(n_xi, 0.0, 1.0)
    sig1 = np.outer(tau, xi)
    sig2 = np.outer(tau, 1.0 - xi)
    wt = wt * tau ** (2 * (n + m) - 1)
    wxi_pow = wxi * (xi * (1.0 - xi)) ** (n + m - 1)
    pref = (2.0 * np.pi) ** (-s.Q)
    out = np.empty(len(pairs), dtype=np.complex128)
    errs = np.empty(len(pairs))
    for i, (p1, p2) in enumerate(pairs):
        Kq = K if K is not None else _pair_auto_K(s, p1, p2, sphere_data, profile, R)
        S1, S1h = raw_sigma_profile(s, p1.x, p1.u, sig1.ravel(), Kq, sphere_data)
        S2, S2h = raw_sigma_profile(s, p2.x, p2.u, sig2.ravel(), Kq, sphere_data)
        shape = sig1.shape
        def total(a, b):
            inner = (a.reshape(shape) * b.reshape(shape)) @ wxi_pow
            return pref * complex(wt @ inner)
        v = total(S1, S2)
        out[i] = v
        errs[i] = abs(v - total(S1h, S2h)) + 1e-300
    return out, errs


def _pair_auto_K(s, p1, p2, sphere_data, profile, R=1.0):
    if profile.K_max is not None:
        return int(profile.K_max)
    nodes = sphere_data[0]
    umax = max(float(np.max(np.abs(nodes @ p1.u))), float(np.max(np.abs(nodes @ p2.u))))
    return int(min(6144, max(384, 4.0 * umax * R + 128)))


def separated_dyadic_kernel(s, alpha, j, pairs, q_max=256, profile=DEFAULT_PROFILE,
                            bump=dyadic_bump):
    """K_j^alpha(w1, w2) via the gamma separation: sum_q G_{gamma_{j,q}}(w1)
    G_{e^{i pi q .}}(w2) built on shared per-point nodal profiles."""
    from dataclasses import replace

    sphere_data = _sphere_data(s, profile.sphere_order)
    nodes = sphere_data[0]
    facs = sphere_data[2]
    umax = rho_max = 0.0
    for pair in pairs:
        for p in pair:
            umax = max(umax, float(np.max(np.abs(nodes @ p.u))))
            rho_max = max(rho_max, max(float(np.linalg.norm(f.A_eta @ p.x)) for f in facs))
    n_sigma = int(min(2400, max(profile.radial_order,
                                math.ceil(3.0 * (umax / (2 * np.pi) + rho_max / np.pi
                                                 + 0.5 * q_max)) + 24)))
    shared = replace(profile, radial_order=n_sigma)

    out = np.zeros(len(pairs), dtype=np.complex128)
    errs = np.zeros(len(pairs))
    cache = {}
    gam = None

    def point_profile(pt):
        key = (pt.x.tobytes(), pt.u.tobytes())
        if key not in cache:
            cache[key] = kernel_point(s, pt.x, pt.u, shared, (0.0, 1.0), sphere_data)
        return cache[key]

    for i, (p1, p2) in enumerate(pairs):
        kp1 = point_profile(p1)
        kp2 = point_profile(p2)
        if gam is None:
            gam = gamma_table(alpha, j, q_max, kp1.sigma, bump)   # (R, q+1)
        acc = 0.0 + 0.0j
        err = 0.0
        for q in range(-q_max, q_max + 1):
            a, ea = kp1.apply(lambda sig, q=q: gam[:, abs(q)])
            b, eb = kp2.apply(lambda sig, q=q: np.exp(1j * np.pi * q * sig))
            acc += a * b
            err += abs(ea * b) + abs(a * eb)
        out[i] = acc
        errs[i] = err
    return out, errs


def bilinear_kernel_decay_fit(s, alpha, N_order, rays, radii, j_values=(0, 1, 2),
                              q_max=192, profile=DEFAULT_PROFILE,
                              sample_pairs=None, j_rate_range=(0, 4)):
    """Per-argument decay slopes of K_j^alpha (other argument at the origin)
    and the geometric j-rate of sup |K_j^alpha| over a fixed sample set.

    Slopes use the separated Fourier-series path; the predicted rate of the
    dyadic sup is 2^{-j (alpha - 4N + 1)}.
    """
    from .groups import GroupPoint
    from .spectral import _a_norm, decay_fit
    from .symplectic import factorize_direction

    if alpha <= 4 * N_order - 1:
        raise ValueError("bilinear decay needs alpha > 4N - 1")
    fac = factorize_direction(s, np.eye(s.m)[0])
    origin = GroupPoint(np.zeros(2 * s.n), np.zeros(s.m))
    slope_records = []
    for j in j_values:
        for (x_dir, u_dir) in rays:
            x_dir = np.asarray(x_dir, dtype=float)
            u_dir = np.asarray(u_dir, dtype=float)
            pts = [GroupPoint(r * x_dir, r * r * u_dir) for r in radii]
            pairs = [(p, origin) for p in pts]
            vals, errs = separated_dyadic_kernel(s, alpha, j, pairs, q_max, profile)
            anorm = np.array([_a_norm(fac, p.x, p.u) for p in pts])
            slope, diag = decay_fit(anorm, vals, floor=10.0 * float(np.max(errs)))
            slope_records.append({"j": j, "ray": (tuple(x_dir), tuple(u_dir)),
                                  "slope": slope, **diag})
    rate = None
    sups = None
    if sample_pairs is not None:
        j_lo, j_hi = j_rate_range
        sups = []
        for j in range(j_lo, j_hi + 1):
            vals, _ = separated_dyadic_kernel(s, alpha, j, sample_pairs, q_max, profile)
            sups.append(float(np.max(np.abs(vals))))
        jj = np.arange(j_lo, j_hi + 1)
        rate = float(np.polyfit(jj, np.log2(np.array(sups)), 1)[0])
    return {"slopes": slope_records, "j_rate": rate, "sups": sups,
            "predicted_rate": -(alpha - 4 * N_order + 1)}
