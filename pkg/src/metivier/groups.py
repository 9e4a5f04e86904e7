"""Metivier group arithmetic and homogeneous geometry.

Elements live in exponential coordinates (x, u) in R^{2n} x R^m with the
two-step product (x,u)(y,v) = (x+y, u+v+[x,y]/2), [x,y]_k = <x, J_k y>.
Structures are certified non-degenerate by a deterministic sphere scan of
|det J_eta| against a fixed floor.
"""

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .quadrature import sphere_samples


class DegeneracyError(ValueError):
    """A direction eta with |det J_eta| below the non-degeneracy floor."""

    def __init__(self, message, det_value=None, eta=None):
        super().__init__(message)
        self.det_value = det_value
        self.eta = eta


@dataclass(frozen=True)
class GroupPoint:
    """An element (x, u) of the group in exponential coordinates."""

    x: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float).reshape(-1))
        object.__setattr__(self, "u", np.asarray(self.u, dtype=float).reshape(-1))
        if not (np.all(np.isfinite(self.x)) and np.all(np.isfinite(self.u))):
            raise ValueError("group point has non-finite components")

    def close_to(self, other, tol=1e-12):
        return (
            np.allclose(self.x, other.x, atol=tol, rtol=0.0)
            and np.allclose(self.u, other.u, atol=tol, rtol=0.0)
        )


@dataclass(frozen=True)
class MetivierStructure:
    """Group data (n, m, J_1..J_m) with a non-degeneracy certificate.

    Each J_k must be exactly skew-symmetric 2n x 2n; |det J_eta| is sampled
    over deterministic points of S^{m-1} and required to stay above
    ``eps_nd``.  Q = 2n + 2m is the homogeneous dimension.
    """

    n: int
    m: int
    J: tuple
    eps_nd: float = 1e-8
    n_sphere_samples: int = 4096
    name: str = "custom"
    certificate: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ValueError("need n >= 1 and m >= 1")
        mats = tuple(np.asarray(Jk, dtype=float) for Jk in self.J)
        if len(mats) != self.m:
            raise ValueError(f"expected {self.m} J matrices, got {len(mats)}")
        d = 2 * self.n
        for k, Jk in enumerate(mats):
            if Jk.shape != (d, d):
                raise ValueError(f"J[{k}] has shape {Jk.shape}, expected {(d, d)}")
            asym = Jk + Jk.T
            if np.any(asym != 0.0):
                i, j = np.argwhere(asym != 0.0)[0]
                raise ValueError(f"J[{k}] not skew at ({i},{j})")
        for Jk in mats:
            Jk.setflags(write=False)
        object.__setattr__(self, "J", mats)
        object.__setattr__(self, "certificate", self._certify())

    @property
    def Q(self):
        """Homogeneous dimension 2n + 2m."""
        return 2 * self.n + 2 * self.m

    def _certify(self):
        etas = sphere_samples(self.m, self.n_sphere_samples)
        dets = np.array([abs(np.linalg.det(self.j_of(eta))) for eta in etas])
        worst = int(np.argmin(dets))
        if dets[worst] < self.eps_nd:
            raise DegeneracyError(
                f"|det J_eta| = {dets[worst]:.3e} below floor {self.eps_nd:.1e} "
                f"at eta = {etas[worst]}",
                det_value=float(dets[worst]),
                eta=etas[worst],
            )
        return {
            "n_samples": int(self.n_sphere_samples),
            "min_abs_det": float(dets.min()),
            "max_abs_det": float(dets.max()),
            "eps_nd": float(self.eps_nd),
        }

    def j_of(self, mu):
        """J_mu = sum_k mu_k J_k."""
        mu = np.asarray(mu, dtype=float).reshape(-1)
        if mu.shape != (self.m,):
            raise ValueError(f"mu must have length {self.m}")
        out = np.zeros((2 * self.n, 2 * self.n))
        for c, Jk in zip(mu, self.J):
            out += c * Jk
        return out

    def bracket(self, x, y):
        """[x, y]_k = <x, J_k y>, the commutator in g2 coordinates."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return np.array([x @ (Jk @ y) for Jk in self.J])

    def point(self, x, u):
        p = GroupPoint(x, u)
        if p.x.shape != (2 * self.n,) or p.u.shape != (self.m,):
            raise ValueError("point dimensions do not match the structure")
        return p


def multiply(s, a, b):
    """BCH product (x,u)(y,v) = (x+y, u+v+[x,y]/2)."""
    if a.x.shape != (2 * s.n,) or b.x.shape != (2 * s.n,):
        raise ValueError("point dimensions do not match the structure")
    return GroupPoint(a.x + b.x, a.u + b.u + 0.5 * s.bracket(a.x, b.x))


def inverse(a):
    """(x,u)^{-1} = (-x,-u)."""
    return GroupPoint(-a.x, -a.u)


def dilate(t, a):
    """Anisotropic dilation delta_t(x,u) = (t x, t^2 u), t > 0."""
    if t <= 0:
        raise ValueError("dilation parameter must be positive")
    return GroupPoint(t * a.x, t * t * a.u)


def homogeneous_norm(a):
    """|(x,u)| = (|x|^4/16 + |u|^2)^{1/4}, homogeneous of degree one."""
    x2 = float(np.dot(a.x, a.x))
    u2 = float(np.dot(a.u, a.u))
    return (x2 * x2 / 16.0 + u2) ** 0.25


def left_distance(s, a, b):
    """Left-invariant distance d(a,b) = |a^{-1} b|."""
    return homogeneous_norm(multiply(s, inverse(a), b))


# ---------------------------------------------------------------------------
# Built-in structures


def _standard_symplectic(n):
    J = np.zeros((2 * n, 2 * n))
    J[:n, n:] = np.eye(n)
    J[n:, :n] = -np.eye(n)
    return J


def heisenberg(n=1, **kwargs):
    """Heisenberg group H_n: m = 1 with J_1 the standard symplectic matrix."""
    return MetivierStructure(n=n, m=1, J=(_standard_symplectic(n),),
                             name=f"heisenberg{n}", **kwargs)


def quaternionic(**kwargs):
    """Quaternionic H-type group: 2n = 4, m = 3, J_k = left multiplication
    by the imaginary units i, j, k on H = R^4."""
    Ji = np.array([
        [0.0, -1.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, -1.0],
        [0.0, 0.0, 1.0, 0.0],
    ])
    Jj = np.array([
        [0.0, 0.0, -1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [1.0, 0.0, 0.0, 0.0],
        [0.0, -1.0, 0.0, 0.0],
    ])
    Jk = np.array([
        [0.0, 0.0, 0.0, -1.0],
        [0.0, 0.0, -1.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0],
    ])
    return MetivierStructure(n=2, m=3, J=(Ji, Jj, Jk), name="quaternionic", **kwargs)


def load_group_config(path, **kwargs):
    """Load a structure from JSON {"n": int, "m": int, "J": [row-major 2n x 2n, ...]}.

    Rejects non-skew input with a diagnostic naming the offending matrix
    entry (propagated from the structure invariant check).
    """
    with open(path) as fh:
        cfg = json.load(fh)
    for key in ("n", "m", "J"):
        if key not in cfg:
            raise ValueError(f"group config missing field '{key}'")
    n, m = int(cfg["n"]), int(cfg["m"])
    mats = []
    for k, flat in enumerate(cfg["J"]):
        arr = np.asarray(flat, dtype=float)
        if arr.ndim == 1:
            if arr.size != (2 * n) ** 2:
                raise ValueError(f"J[{k}] has {arr.size} entries, expected {(2*n)**2}")
            arr = arr.reshape(2 * n, 2 * n)
        mats.append(arr)
    return MetivierStructure(n=n, m=m, J=tuple(mats), name=str(cfg.get("name", "custom")), **kwargs)


def builtin_structure(spec, n=1):
    """Resolve a builtin name ('heisenberg', 'quaternionic') or a JSON path."""
    if spec == "heisenberg":
        return heisenberg(n)
    if spec == "quaternionic":
        return quaternionic()
    return load_group_config(spec)


# ---------------------------------------------------------------------------
# Group convolution of grid functions


def group_convolution(s, f, g):
    """Convolution f*g(w) = int f(w v^{-1}) g(v) dv of grid functions on G.

    x-arguments of the translate land exactly on the difference lattice;
    the u-argument u - v - [x,y]/2 is generally off-grid and is evaluated
    by multilinear interpolation along the u axes, with zero extension
    outside the box.
    """
    from . import fields
    from ._kernels import group_conv

    if f.domain != "group" or g.domain != "group":
        raise ValueError("group_convolution needs grid functions on the full group")
    if f.values.shape != g.values.shape or f.x_extent != g.x_extent or f.u_extent != g.u_extent:
        raise ValueError("grid mismatch between convolution factors")
    for gf, tag in ((f, "f"), (g, "g")):
        bm = gf.boundary_mass()
        if bm > 1e-8:
            warnings.warn(
                f"group_convolution: factor {tag} carries boundary mass {bm:.2e}; "
                "translated support leaves the box", stacklevel=2)
    out = group_conv(s, f, g)
    return fields.GridFunction.like(f, out)
