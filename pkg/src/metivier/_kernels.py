"""Hot numeric kernels: numba-jitted paths with pure-numpy fallbacks.

Backend selection: METIVIER_BACKEND = auto | numba | numpy (default auto =
numba when importable).  Both paths implement identical arithmetic; they
agree to roundoff and the test suite asserts it.

Conventions shared by the twisted-convolution kernels: all axes use the
same lattice x_a = (a - N//2) h, so z - w lives on the (2N-1)-point
difference lattice and the kernel factor is a padded table lookup.  The
twist phase exp((i/2) <z, J w>) factors into per-axis-pair tables
exp((i/2) J_pq x_p y_q), which is what makes the direct quadrature cheap:
no exponentials inside the quadruple loop.
"""

import os

import numpy as np

try:
    from numba import njit, prange

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):  # noqa: D103
        def wrap(fn):
            return fn
        return wrap

    prange = range


_VALID = ("auto", "numba", "numpy")
_backend = os.environ.get("METIVIER_BACKEND", "auto")
if _backend not in _VALID:
    raise RuntimeError(f"METIVIER_BACKEND must be one of {_VALID}, got {_backend!r}")
if _backend == "numba" and not HAVE_NUMBA:
    raise RuntimeError("METIVIER_BACKEND=numba but numba is not importable")


def active_backend():
    """Resolved backend name: 'numba' or 'numpy'."""
    if _backend == "numpy":
        return "numpy"
    if _backend == "numba":
        return "numba"
    return "numba" if HAVE_NUMBA else "numpy"


def set_backend(name):
    """Override the backend at runtime (used by tests and the benchmark)."""
    global _backend
    if name not in _VALID:
        raise ValueError(f"backend must be one of {_VALID}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is not importable")
    _backend = name


# ---------------------------------------------------------------------------
# padded difference-lattice tables


def pad_difference_table(vals):
    """Zero-pad grid samples into the (2N-1)^d difference-lattice table."""
    shape = vals.shape
    N = shape[0]
    pad = np.zeros(tuple(2 * s - 1 for s in shape), dtype=vals.dtype)
    lo = N - 1 - N // 2
    sl = tuple(slice(lo, lo + N) for _ in shape)
    pad[sl] = vals
    return pad


# ---------------------------------------------------------------------------
# twisted convolution, 2n = 2 fast path


@njit(parallel=True, cache=True)
def _tw2d_nb(phi_pad, psi, E12, E21, out):
    N = psi.shape[0]
    for a1 in prange(N):
        for a2 in range(N):
            acc = 0.0 + 0.0j
            for b1 in range(N):
                d1 = a1 - b1 + N - 1
                inner = 0.0 + 0.0j
                for b2 in range(N):
                    inner += phi_pad[d1, a2 - b2 + N - 1] * psi[b1, b2] * E12[a1, b2]
                acc += E21[a2, b1] * inner
            out[a1, a2] = acc


def _tw2d_np(phi_pad, psi, E12, E21, out):
    N = psi.shape[0]
    b = np.arange(N)
    for a1 in range(N):
        # T[b1, a2, b2] = phi_pad[a1-b1+N-1, a2-b2+N-1]
        T = phi_pad[(a1 - b + N - 1)[:, None, None], (b[:, None] - b[None, :] + N - 1)[None, :, :]]
        U = psi * E12[a1][None, :]
        out[a1, :] = np.einsum("bas,bs,ab->a", T, U, E21.T)


def twisted_conv_2d(phi_vals, psi_vals, coords, gamma, vol):
    """Direct quadrature of the twisted convolution for 2n = 2.

    out(z) = vol * sum_w phi(z - w) psi(w) exp(i gamma (z1 w2 - z2 w1)).
    """
    N = psi_vals.shape[0]
    phi_pad = pad_difference_table(np.ascontiguousarray(phi_vals, dtype=np.complex128))
    psi = np.ascontiguousarray(psi_vals, dtype=np.complex128)
    E12 = np.exp(1j * gamma * np.outer(coords, coords))
    E21 = np.conj(E12)
    out = np.empty((N, N), dtype=np.complex128)
    if active_backend() == "numba":
        _tw2d_nb(phi_pad, psi, E12, E21, out)
    else:
        _tw2d_np(phi_pad, psi, E12, E21, out)
    out *= vol
    return out


@njit(parallel=True, cache=True)
def _tw2d_batch_nb(phi_pads_t, psi, E12, E21, out):
    N = psi.shape[0]
    K = phi_pads_t.shape[2]
    for a1 in prange(N):
        acc = np.empty(K, dtype=np.complex128)
        for a2 in range(N):
            for k in range(K):
                acc[k] = 0.0 + 0.0j
            for b1 in range(N):
                d1 = a1 - b1 + N - 1
                e21 = E21[a2, b1]
                for b2 in range(N):
                    t = psi[b1, b2] * E12[a1, b2] * e21
                    d2 = a2 - b2 + N - 1
                    for k in range(K):
                        acc[k] += phi_pads_t[d1, d2, k] * t
            for k in range(K):
                out[k, a1, a2] = acc[k]


def _tw2d_batch_np(phi_pads_t, psi, E12, E21, out):
    N = psi.shape[0]
    b = np.arange(N)
    for a1 in range(N):
        T = phi_pads_t[(a1 - b + N - 1)[:, None, None], (b[:, None] - b[None, :] + N - 1)[None, :, :], :]
        U = psi * E12[a1][None, :]
        out[:, a1, :] = np.einsum("bask,bs,ab->ka", T, U, E21.T)


def twisted_conv_2d_batch(phi_stack, psi_vals, coords, gamma, vol):
    """Batched 2n = 2 twisted convolution sharing one psi and one phase.

    phi_stack has shape (K, N, N); returns (K, N, N).
    """
    K, N, _ = phi_stack.shape
    pads = np.empty((2 * N - 1, 2 * N - 1, K), dtype=np.complex128)
    for k in range(K):
        pads[:, :, k] = pad_difference_table(np.ascontiguousarray(phi_stack[k], dtype=np.complex128))
    psi = np.ascontiguousarray(psi_vals, dtype=np.complex128)
    E12 = np.exp(1j * gamma * np.outer(coords, coords))
    E21 = np.conj(E12)
    out = np.empty((K, N, N), dtype=np.complex128)
    if active_backend() == "numba":
        _tw2d_batch_nb(pads, psi, E12, E21, out)
    else:
        _tw2d_batch_np(pads, psi, E12, E21, out)
    out *= vol
    return out


# ---------------------------------------------------------------------------
# twisted convolution, general dimension


@njit(parallel=True, cache=True)
def _twnd_nb(phi_pad_flat, pad_strides, psi_flat, aidx, tables, pidx, qidx, out_flat):
    P, d = aidx.shape
    N = tables.shape[1]
    T = tables.shape[0]
    for p in prange(P):
        acc = 0.0 + 0.0j
        for q in range(P):
            flat = 0
            for dim in range(d):
                flat += (aidx[p, dim] - aidx[q, dim] + N - 1) * pad_strides[dim]
            ph = 1.0 + 0.0j
            for t in range(T):
                ph *= tables[t, aidx[p, pidx[t]], aidx[q, qidx[t]]]
            acc += phi_pad_flat[flat] * psi_flat[q] * ph
        out_flat[p] = acc


def _twnd_np(phi_pad_flat, pad_strides, psi_flat, aidx, tables, pidx, qidx, out_flat):
    P, d = aidx.shape
    N = tables.shape[1]
    for p in range(P):
        flat = np.zeros(P, dtype=np.int64)
        for dim in range(d):
            flat += (aidx[p, dim] - aidx[:, dim] + N - 1) * pad_strides[dim]
        ph = np.ones(P, dtype=np.complex128)
        for t in range(tables.shape[0]):
            ph *= tables[t, aidx[p, pidx[t]], aidx[:, qidx[t]]]
        out_flat[p] = np.sum(phi_pad_flat[flat] * psi_flat * ph)


def twisted_conv_nd(phi_vals, psi_vals, coords, Jmat, vol):
    """General-dimension twisted convolution with phase exp((i/2) <z, J w>).

    The skew matrix J is expanded into per-axis-pair phase tables; cost is
    O(P^2) over the P grid points.
    """
    shape = psi_vals.shape
    d = len(shape)
    N = shape[0]
    phi_pad = pad_difference_table(np.ascontiguousarray(phi_vals, dtype=np.complex128))
    pad_strides = np.array([int(s // phi_pad.itemsize) for s in phi_pad.strides], dtype=np.int64)
    pidx_l, qidx_l, tab_l = [], [], []
    for pdim in range(d):
        for qdim in range(d):
            if Jmat[pdim, qdim] != 0.0:
                pidx_l.append(pdim)
                qidx_l.append(qdim)
                tab_l.append(np.exp(0.5j * Jmat[pdim, qdim] * np.outer(coords, coords)))
    if tab_l:
        tables = np.ascontiguousarray(np.stack(tab_l))
        pidx = np.array(pidx_l, dtype=np.int64)
        qidx = np.array(qidx_l, dtype=np.int64)
    else:
        tables = np.ones((1, N, N), dtype=np.complex128)
        pidx = np.zeros(1, dtype=np.int64)
        qidx = np.zeros(1, dtype=np.int64)
    P = int(np.prod(shape))
    idx = np.stack(np.unravel_index(np.arange(P), shape), axis=1).astype(np.int64)
    psi_flat = np.ascontiguousarray(psi_vals, dtype=np.complex128).reshape(-1)
    out_flat = np.empty(P, dtype=np.complex128)
    if active_backend() == "numba":
        _twnd_nb(phi_pad.reshape(-1), pad_strides, psi_flat, idx, tables, pidx, qidx, out_flat)
    else:
        _twnd_np(phi_pad.reshape(-1), pad_strides, psi_flat, idx, tables, pidx, qidx, out_flat)
    return out_flat.reshape(shape) * vol


# ---------------------------------------------------------------------------
# group convolution (m = 1, n = 1 fast path + generic fallback)


@njit(parallel=True, cache=True)
def _gconv_h1_nb(f, g, xs, us, j01, vol, out):
    N = f.shape[0]
    Nu = f.shape[2]
    hu = us[1] - us[0]
    u0 = us[0]
    for a1 in prange(N):
        for a2 in range(N):
            x1 = xs[a1]
            x2 = xs[a2]
            for au in range(Nu):
                acc = 0.0 + 0.0j
                for b1 in range(N):
                    c1 = a1 - b1 + N // 2
                    if c1 < 0 or c1 >= N:
                        continue
                    for b2 in range(N):
                        c2 = a2 - b2 + N // 2
                        if c2 < 0 or c2 >= N:
                            continue
                        br = j01 * (x1 * xs[b2] - x2 * xs[b1])
                        for bv in range(Nu):
                            ut = us[au] - us[bv] - 0.5 * br
                            ti = (ut - u0) / hu
                            fl = int(np.floor(ti))
                            w = ti - fl
                            val = 0.0 + 0.0j
                            if 0 <= fl < Nu:
                                val += (1.0 - w) * f[c1, c2, fl]
                            if 0 <= fl + 1 < Nu:
                                val += w * f[c1, c2, fl + 1]
                            acc += val * g[b1, b2, bv]
                out[a1, a2, au] = acc * vol


def _gconv_h1_np(f, g, xs, us, j01, vol, out):
    N = f.shape[0]
    Nu = f.shape[2]
    hu = us[1] - us[0]
    u0 = us[0]
    udiff = us[:, None] - us[None, :]                   # (au, bv)
    for a1 in range(N):
        for a2 in range(N):
            acc = np.zeros((Nu,), dtype=np.complex128)
            for b1 in range(max(0, a1 + N // 2 - N + 1), min(N, a1 + N // 2 + 1)):
                c1 = a1 - b1 + N // 2
                for b2 in range(max(0, a2 + N // 2 - N + 1), min(N, a2 + N // 2 + 1)):
                    c2 = a2 - b2 + N // 2
                    br = j01 * (xs[a1] * xs[b2] - xs[a2] * xs[b1])
                    ti = (udiff - 0.5 * br - u0) / hu    # (au, bv)
                    fl = np.floor(ti).astype(np.int64)
                    w = ti - fl
                    vec = f[c1, c2, :]
                    lo = np.where((fl >= 0) & (fl < Nu), vec[np.clip(fl, 0, Nu - 1)], 0.0)
                    hi = np.where((fl + 1 >= 0) & (fl + 1 < Nu), vec[np.clip(fl + 1, 0, Nu - 1)], 0.0)
                    interp = (1.0 - w) * lo + w * hi     # (au, bv)
                    acc += interp @ g[b1, b2, :]
            out[a1, a2, :] = acc * vol


def group_conv(s, f, g):
    """Group convolution of two grid functions on G (dispatching helper)."""
    if s.n == 1 and s.m == 1:
        xs = f.x_axis
        us = f.u_axis
        vol = f.cell_volume()
        out = np.empty_like(np.asarray(f.values))
        j01 = float(s.J[0][0, 1])
        fv = np.ascontiguousarray(f.values)
        gv = np.ascontiguousarray(g.values)
        if active_backend() == "numba":
            _gconv_h1_nb(fv, gv, xs, us, j01, vol, out)
        else:
            _gconv_h1_np(fv, gv, xs, us, j01, vol, out)
        return out
    return _gconv_general(s, f, g)


def _gconv_general(s, f, g):
    from scipy.ndimage import map_coordinates

    d = 2 * s.n
    xs = f.x_axis
    us = f.u_axis
    vol = f.cell_volume()
    shape = f.values.shape
    Nx, Nu = f.nx, f.nu
    out = np.empty(shape, dtype=np.complex128)
    x_idx = np.stack(np.meshgrid(*([np.arange(Nx)] * d), indexing="ij"), axis=-1).reshape(-1, d)
    y_coords = xs[x_idx]                                  # (Px, d)
    u_mesh = np.stack(np.meshgrid(*([us] * s.m), indexing="ij"), axis=-1).reshape(-1, s.m)
    fre, fim = np.real(f.values), np.imag(f.values)
    gv = g.values.reshape(len(x_idx), len(u_mesh))
    for p, a in enumerate(x_idx):
        xa = xs[a]
        br = np.array([y_coords @ (Jk @ xa) for Jk in s.J]).T * (-1.0)   # [x,y]_k = <x, J_k y> = -<y, J_k x>
        c = a[None, :] - x_idx + Nx // 2                  # (Px, d)
        valid = np.all((c >= 0) & (c < Nx), axis=1)
        acc = np.zeros(len(u_mesh), dtype=np.complex128)
        cv = c[valid]
        brv = br[valid]
        gvv = gv[valid]
        for t, ut in enumerate(u_mesh):
            u_arg = ut[None, None, :] - u_mesh[None, :, :] - 0.5 * brv[:, None, :]
            coords = np.concatenate(
                [np.broadcast_to(cv[:, None, :], u_arg.shape[:2] + (d,)),
                 (u_arg - us[0]) / f.hu], axis=2)
            flat = coords.reshape(-1, d + s.m).T
            re = map_coordinates(fre, flat, order=1, mode="constant", cval=0.0)
            im = map_coordinates(fim, flat, order=1, mode="constant", cval=0.0)
            vals = (re + 1j * im).reshape(u_arg.shape[:2])
            acc[t] = np.sum(vals * gvv)
        out.reshape(len(x_idx), len(u_mesh))[p] = acc * vol
    return out


# ---------------------------------------------------------------------------
# Laguerre diagonal tables: M[k, r] = L_k^nu(T[k, r]) exp(-T[k, r]/2)


@njit(parallel=True, cache=True)
def _lagdiag_nb(nu, T, out):
    K, R = T.shape
    for k in prange(K):
        for r in range(R):
            t = T[k, r]
            lm = 1.0
            if k == 0:
                out[k, r] = lm * np.exp(-0.5 * t)
                continue
            lc = 1.0 + nu - t
            for j in range(1, k):
                ln = ((2.0 * j + 1.0 + nu - t) * lc - (j + nu) * lm) / (j + 1.0)
                lm = lc
                lc = ln
            out[k, r] = lc * np.exp(-0.5 * t)


def _lagdiag_np(nu, T, out):
    K, R = T.shape
    lm = np.ones_like(T)
    out[0] = lm[0]
    if K > 1:
        lc = 1.0 + nu - T
        out[1] = lc[1]
        for j in range(1, K - 1):
            ln = ((2.0 * j + 1.0 + nu - T) * lc - (j + nu) * lm) / (j + 1.0)
            lm, lc = lc, ln
            out[j + 1] = lc[j + 1]
    out *= np.exp(-0.5 * T)


def laguerre_diag(nu, T):
    """L_k^nu(T[k, r]) e^{-T[k,r]/2} for each row degree k (hot path of the
    kernel quadratures)."""
    T = np.ascontiguousarray(T, dtype=np.float64)
    out = np.empty_like(T)
    if active_backend() == "numba":
        _lagdiag_nb(float(nu), T, out)
    else:
        _lagdiag_np(float(nu), T, out)
    return out
