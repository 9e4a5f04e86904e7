"""Empirical operator-norm lower bounds and threshold tables.

Only lower bounds are claimed: a scan maximizes ||op(f,...)|| / prod ||f_i||
over deterministic seeded trial families.  The threshold formulas of the
boundedness results are implemented as pure functions and reported next to
the estimates; upper bounds are not machine-checkable and no pass/fail is
attached to boundedness itself.
"""

import numpy as np

from . import fields


# ---------------------------------------------------------------------------
# threshold formulas


def riesz_threshold(Q, p):
    """Critical Riesz order Q(1/p - 1/2) - 1/2 for L^p boundedness."""
    return Q * (1.0 / p - 0.5) - 0.5


def bilinear_alpha_threshold(Q, p1, p2):
    """Critical bilinear order alpha(p1, p2) from the five-region result;
    1/p = 1/p1 + 1/p2.  Returns (alpha, region label)."""
    ip1 = 0.0 if p1 == np.inf else 1.0 / p1
    ip2 = 0.0 if p2 == np.inf else 1.0 / p2
    if not (0.0 <= ip1 <= 1.0 and 0.0 <= ip2 <= 1.0):
        raise ValueError("need 1 <= p1, p2 <= inf")
    ip = ip1 + ip2
    if ip1 <= 0.5 and ip2 <= 0.5:
        if ip <= 0.5:
            return Q * (1.0 - ip) - 0.5, "I"
        return (Q - 1.0) * (1.0 - ip), "II"
    if min(ip1, ip2) <= 0.5 <= max(ip1, ip2):
        ip_low, ip_high = min(ip1, ip2), max(ip1, ip2)
        if ip <= 1.0:
            return Q * (0.5 - ip_low) - (1.0 - ip), "III"
        return Q * (ip_high - 0.5), "IV"
    return Q * (ip - 1.0), "V"


def threshold_convexity_gap(Q, a, b, n_pts=21):
    """Most-negative second difference of the threshold along the segment
    from anchor a to anchor b in (1/p1, 1/p2) coordinates (>= 0 means
    convex up to roundoff)."""
    ia = np.array([0.0 if t == np.inf else 1.0 / t for t in a])
    ib = np.array([0.0 if t == np.inf else 1.0 / t for t in b])
    th = np.linspace(0.0, 1.0, n_pts)
    vals = []
    for t in th:
        ip1, ip2 = (1.0 - t) * ia + t * ib
        p1 = np.inf if ip1 == 0 else 1.0 / ip1
        p2 = np.inf if ip2 == 0 else 1.0 / ip2
        vals.append(bilinear_alpha_threshold(Q, p1, p2)[0])
    vals = np.array(vals)
    return float(np.min(vals[:-2] - 2.0 * vals[1:-1] + vals[2:]))


# ---------------------------------------------------------------------------
# trial families


def _gauss_trial(s, rng, nx, x_extent, nu, u_extent):
    cx = rng.uniform(-0.2 * x_extent, 0.2 * x_extent, size=2 * s.n)
    cu = rng.uniform(-0.2 * u_extent, 0.2 * u_extent, size=s.m)
    wx = rng.uniform(0.5, 1.5)
    wu = rng.uniform(0.5, 1.5)

    def fn(*axes):
        xs, us = axes[: 2 * s.n], axes[2 * s.n:]
        ex = sum((xi - ci) ** 2 for xi, ci in zip(xs, cx)) / (2.0 * wx * wx)
        eu = sum((ui - ci) ** 2 for ui, ci in zip(us, cu)) / (2.0 * wu * wu)
        return np.exp(-ex - eu)

    return fields.GridFunction.from_callable(fn, s.n, s.m, nx, x_extent, nu, u_extent)


def _dilate_trial(s, rng, nx, x_extent, nu, u_extent):
    t = 2.0 ** rng.uniform(-1.0, 1.0)

    def fn(*axes):
        xs, us = axes[: 2 * s.n], axes[2 * s.n:]
        ex = sum((t * xi) ** 2 for xi in xs)
        eu = sum((t * t * ui) ** 2 for ui in us)
        return t ** s.Q * np.exp(-0.5 * ex - 0.5 * eu)

    return fields.GridFunction.from_callable(fn, s.n, s.m, nx, x_extent, nu, u_extent)


def _hermite_trial(s, rng, nx, x_extent, nu, u_extent):
    degs = rng.integers(0, 3, size=2 * s.n)
    coefs = rng.normal(size=3)

    def fn(*axes):
        xs, us = axes[: 2 * s.n], axes[2 * s.n:]
        poly = coefs[0] + sum(coefs[1 + (i % 2)] * xi ** degs[i] for i, xi in enumerate(xs))
        ex = sum(xi ** 2 for xi in xs)
        eu = sum(ui ** 2 for ui in us)
        return poly * np.exp(-0.5 * ex - 0.5 * eu)

    return fields.GridFunction.from_callable(fn, s.n, s.m, nx, x_extent, nu, u_extent)


_FAMILIES = {"gauss": _gauss_trial, "dilate": _dilate_trial, "hermite": _hermite_trial}


def trial_functions(s, family, n_trials, seed, nx=16, x_extent=6.0, nu=16, u_extent=6.0):
    """Deterministic trial GridFunctions; seed splitting is seed ^ index."""
    maker = _FAMILIES[family]
    out = []
    for i in range(n_trials):
        rng = np.random.default_rng(seed ^ (i + 1))
        out.append(maker(s, rng, nx, x_extent, nu, u_extent))
    return out


def operator_norm_lower_bound(op, trials, p_in, p_out):
    """max over trials of ||op(f, ...)||_{p_out} / prod ||f_i||_{p_i}.

    trials: list of tuples of GridFunctions (length = operator arity).
    Degenerate trials (zero input norm) are skipped and counted.
    """
    best = 0.0
    skipped = 0
    for args in trials:
        denom = 1.0
        for f, p in zip(args, p_in):
            nf = f.lp_norm(p)
            denom *= nf
        if denom == 0.0:
            skipped += 1
            continue
        val = op(*args).lp_norm(p_out) / denom
        best = max(best, val)
    return {"estimate": best, "skipped": skipped, "n_trials": len(trials)}


def riesz_threshold_scan(s, p_list, delta_margin=0.5, n_trials=4, seed=0,
                         grid=(16, 6.0, 16, 6.0), profile=None):
    """Rows (p, threshold, delta tested, estimate) for the Riesz means at
    delta = threshold + margin; estimates are lower bounds only."""
    from .spectral import DEFAULT_PROFILE, MultiplierProfile, restriction_admissible_p, riesz_apply

    prof = profile or MultiplierProfile(K_max=16, sphere_order=6)
    nx, ex, nu, eu = grid
    rows = []
    pmax = restriction_admissible_p(s.m)
    for p in p_list:
        if not (1.0 <= p <= pmax) and p != 2.0:
            raise ValueError(f"inadmissible p = {p}: range [1, {pmax:.4f}]")
        thr = riesz_threshold(s.Q, p)
        delta = max(thr, 0.0) + delta_margin
        trials = [(f,) for f in trial_functions(s, "gauss", n_trials, seed, nx, ex, nu, eu)]
        est = operator_norm_lower_bound(
            lambda f: riesz_apply(s, f, delta, 1.0, prof, n_nodes=16), trials, (p,), p)
        rows.append({"p": p, "threshold": thr, "delta": delta,
                     "estimate": est["estimate"], "trials": n_trials, "seed": seed})
    return rows


def bilinear_region_table(s, pairs, margin=0.5, n_trials=3, seed=0,
                          grid=(12, 6.0, 12, 6.0), profile=None):
    """Rows (p1, p2, p, region, paper_threshold, alpha_tested, estimate).

    Estimates are empirical lower bounds of the bilinear Riesz means at
    alpha = threshold + margin on seeded Gaussian trial pairs.
    """
    from .bilinear import bilinear_riesz_apply
    from .spectral import MultiplierProfile

    prof = profile or MultiplierProfile(K_max=12, sphere_order=6)
    nx, ex, nu, eu = grid
    rows = []
    for (p1, p2) in pairs:
        thr, region = bilinear_alpha_threshold(s.Q, p1, p2)
        alpha = max(thr, 0.0) + margin
        ip = (0.0 if p1 == np.inf else 1.0 / p1) + (0.0 if p2 == np.inf else 1.0 / p2)
        p = np.inf if ip == 0 else 1.0 / ip
        fs = trial_functions(s, "gauss", n_trials, seed, nx, ex, nu, eu)
        gs = trial_functions(s, "gauss", n_trials, seed + 7919, nx, ex, nu, eu)
        trials = list(zip(fs, gs))
        est = operator_norm_lower_bound(
            lambda f, g: bilinear_riesz_apply(s, f, g, alpha, 1.0, prof, n_nodes=10),
            trials, (p1, p2), p)
        rows.append({"p1": p1, "p2": p2, "p": p, "region": region,
                     "paper_threshold": thr, "alpha_tested": alpha,
                     "estimate": est["estimate"], "trials": n_trials, "seed": seed})
    return rows
