"""Quadrature rules and deterministic sphere sampling.

Gauss-Legendre on intervals, product rules on the unit sphere S^{m-1}
(exact two-point rule for m=1), and low-discrepancy deterministic sphere
samples used for non-degeneracy certificates and determinant scans.
"""

import numpy as np
from scipy.special import ndtri, roots_legendre


def gauss_legendre(order, a=0.0, b=1.0):
    """Gauss-Legendre nodes/weights on [a, b]."""
    if order < 1:
        raise ValueError("quadrature order must be >= 1")
    x, w = roots_legendre(order)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def sphere_rule(m, order):
    """Quadrature rule for the surface measure of S^{m-1} in R^m.

    Returns (nodes, weights) with nodes of shape (N, m); weights sum to the
    sphere area.  m = 1 is the exact two-point rule {+-1} with unit weights.
    The product rules are antipodally symmetric (trapezoid azimuth with an
    even point count), which downstream code relies on for parity
    cancellations.
    """
    if m == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if m == 2:
        n_ang = 2 * max(2, order)
        theta = 2.0 * np.pi * np.arange(n_ang) / n_ang
        nodes = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        weights = np.full(n_ang, 2.0 * np.pi / n_ang)
        return nodes, weights
    # m >= 3: recursive product rule over the last coordinate t = cos(theta),
    # integral = int_{-1}^{1} (1-t^2)^{(m-3)/2} int_{S^{m-2}} ... dsigma dt.
    sub_nodes, sub_weights = sphere_rule(m - 1, order)
    t, wt = roots_legendre(max(2, order))
    shell = np.sqrt(1.0 - t**2)
    wt = wt * shell ** (m - 3)
    nodes = np.concatenate(
        [
            np.repeat(shell, len(sub_nodes))[:, None] * np.tile(sub_nodes, (len(t), 1)),
            np.repeat(t, len(sub_nodes))[:, None],
        ],
        axis=1,
    )
    weights = np.repeat(wt, len(sub_weights)) * np.tile(sub_weights, len(t))
    return nodes, weights


def sphere_area(m):
    """Surface area of S^{m-1} (counting measure of size 2 for m = 1)."""
    from scipy.special import gamma

    if m == 1:
        return 2.0
    return 2.0 * np.pi ** (m / 2.0) / gamma(m / 2.0)


_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def _halton(count, dim, skip=20):
    out = np.empty((count, dim))
    for d in range(dim):
        base = _PRIMES[d % len(_PRIMES)]
        idx = np.arange(skip, skip + count)
        col = np.zeros(count)
        f = 1.0
        i = idx.astype(np.int64)
        while np.any(i > 0):
            f /= base
            col += f * (i % base)
            i //= base
        out[:, d] = col
    return out


def sphere_samples(m, count):
    """Deterministic low-discrepancy samples on S^{m-1}.

    m = 1 alternates +-1.  Otherwise Halton points are pushed through the
    inverse normal CDF and normalized; the construction is deterministic so
    certificates are reproducible.
    """
    if count < 1:
        raise ValueError("need at least one sample")
    if m == 1:
        return np.where(np.arange(count)[:, None] % 2 == 0, 1.0, -1.0)
    u = _halton(count, m)
    u = np.clip(u, 1e-12, 1.0 - 1e-12)
    g = ndtri(u)
    norms = np.linalg.norm(g, axis=1)
    norms[norms == 0] = 1.0
    return g / norms[:, None]
