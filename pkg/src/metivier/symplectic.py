"""Symplectic factorization of skew matrices: J_eta = A_eta^T J_2n A_eta.

The factor is built from the orthogonal canonical form of J_eta: the
symmetric matrix -J_eta^2 is diagonalized, eigenvectors are paired into
planar rotation blocks O^T J_eta O = blockdiag(sigma_j K) with
K = [[0,1],[-1,0]], and A_eta = S P O^T where P interleaves the pairs into
the split (first-half/second-half) layout and S = diag(sqrt(sigma)) twice.
Ordering (sigma descending) and a sign convention on each plane make the
output deterministic for identical input.
"""

from dataclasses import dataclass

import numpy as np

from .groups import DegeneracyError
from .quadrature import sphere_samples


@dataclass(frozen=True)
class SymplecticFactorization:
    """Result of factorize(): J_eta = A_eta^T J_2n A_eta.

    sigma holds the symplectic spectrum (descending, positive); residual is
    the relative Frobenius defect of the factorization identity.
    """

    eta: np.ndarray
    J_eta: np.ndarray
    A_eta: np.ndarray
    sigma: np.ndarray
    detA: float
    residual: float

    @property
    def A_inv(self):
        return np.linalg.inv(self.A_eta)


def standard_symplectic(n):
    J = np.zeros((2 * n, 2 * n))
    J[:n, n:] = np.eye(n)
    J[n:, :n] = -np.eye(n)
    return J


def j_of_mu(s, mu):
    """J_mu = sum_k mu_k J_k for a structure s; linear in mu."""
    return s.j_of(mu)


def factorize(J_eta, eps_nd=1e-8, eta=None):
    """Factor a skew 2n x 2n matrix as A^T J_2n A.

    Raises DegeneracyError when |det J_eta| falls below ``eps_nd``.  The
    eigen-ordering is sigma descending and the first nonzero entry of each
    plane's leading vector is made positive, so identical input produces
    identical output.
    """
    J = np.asarray(J_eta, dtype=float)
    d = J.shape[0]
    if J.shape != (d, d) or d % 2 != 0:
        raise ValueError("need a square even-dimensional matrix")
    if np.max(np.abs(J + J.T)) > 1e-12 * max(1.0, np.max(np.abs(J))):
        raise ValueError("input matrix is not skew-symmetric")
    n = d // 2
    det = np.linalg.det(J)
    if abs(det) < eps_nd:
        raise DegeneracyError(
            f"skew matrix is degenerate: |det| = {abs(det):.3e} < {eps_nd:.1e}",
            det_value=abs(det), eta=eta)

    # -J^2 is symmetric PSD with eigenvalues sigma_j^2, each of multiplicity 2.
    S = -J @ J
    evals, evecs = np.linalg.eigh(S)
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]

    cols = []
    sigma = []
    i = 0
    while i < d:
        j = i
        while j + 1 < d and abs(evals[j + 1] - evals[i]) <= 1e-9 * max(1.0, abs(evals[i])):
            j += 1
        cluster = evecs[:, i:j + 1]
        sig = float(np.sqrt(max(float(np.mean(evals[i:j + 1])), 0.0)))
        r = (j - i + 1) // 2
        plane_vecs = []
        for col in range(cluster.shape[1]):
            if len(plane_vecs) == 2 * r:
                break
            v = cluster[:, col].copy()
            for c in plane_vecs:
                v -= (c @ v) * c
            nv = np.linalg.norm(v)
            if nv < 1e-8:
                continue
            v /= nv
            nz = int(np.argmax(np.abs(v) > 1e-12))
            if v[nz] < 0:
                v = -v
            # partner spanning the sigma-plane; lies in the same eigenspace
            w = -(J @ v) / sig
            for c in plane_vecs:
                w -= (c @ w) * c
            w -= (v @ w) * v
            w /= np.linalg.norm(w)
            plane_vecs.extend([v, w])
            sigma.append(sig)
        if len(plane_vecs) != 2 * r:
            raise RuntimeError("failed to pair eigenvectors into symplectic planes")
        cols.extend(plane_vecs)
        i = j + 1
    if len(sigma) != n:
        raise RuntimeError("failed to extract n symplectic planes")

    O = np.stack(cols, axis=1)                     # interleaved (v1,w1,v2,w2,...)
    perm = np.concatenate([np.arange(0, d, 2), np.arange(1, d, 2)])
    P = np.zeros((d, d))
    P[np.arange(d), perm] = 1.0                    # split <- interleaved
    sig = np.array(sigma)
    Sc = np.diag(np.sqrt(np.concatenate([sig, sig])))
    A = Sc @ P @ O.T

    recon = A.T @ standard_symplectic(n) @ A
    residual = float(np.linalg.norm(recon - J) / max(np.linalg.norm(J), 1e-300))
    detA = float(np.linalg.det(A))
    return SymplecticFactorization(
        eta=None if eta is None else np.asarray(eta, dtype=float),
        J_eta=J, A_eta=A, sigma=sig, detA=detA, residual=residual)


def factorize_direction(s, eta):
    """Factorize J_eta for a unit direction eta of a structure."""
    eta = np.asarray(eta, dtype=float).reshape(-1)
    nrm = np.linalg.norm(eta)
    if nrm == 0:
        raise ValueError("eta must be nonzero")
    eta = eta / nrm
    return factorize(s.j_of(eta), eps_nd=s.eps_nd, eta=eta)


def det_bound_scan(s, n_samples):
    """Scan |det J_eta| over deterministic unit directions.

    Returns a dict with the empirical bracket [min, max] of |det J_eta|,
    the arg-extreme directions, and the implied two-sided constant
    K = max(max_det, 1/min_det).  Aborts with DegeneracyError when a sample
    falls below the structure's floor.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    etas = sphere_samples(s.m, n_samples)
    dets = np.empty(len(etas))
    for i, eta in enumerate(etas):
        dets[i] = abs(np.linalg.det(s.j_of(eta)))
        if dets[i] < s.eps_nd:
            raise DegeneracyError(
                f"degenerate sample at eta = {eta}: |det| = {dets[i]:.3e}",
                det_value=float(dets[i]), eta=eta)
    imin, imax = int(np.argmin(dets)), int(np.argmax(dets))
    return {
        "min_det": float(dets[imin]),
        "max_det": float(dets[imax]),
        "eta_min": etas[imin],
        "eta_max": etas[imax],
        "K": float(max(dets[imax], 1.0 / dets[imin])),
        "n_samples": int(n_samples),
    }


def scan_factorizations(s, n_samples):
    """Factorize J_eta over deterministic eta samples; yields rows for CSV."""
    etas = sphere_samples(s.m, n_samples)
    for eta in etas:
        fac = factorize_direction(s, eta)
        yield fac
