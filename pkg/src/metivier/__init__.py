"""Spectral analysis toolkit for Riesz means on Metivier groups.

A Metivier group is a two-step nilpotent Lie group G = g1 + g2 whose skew
forms J_mu = sum_k mu_k J_k are non-degenerate for every nonzero central
direction mu.  The package provides the group arithmetic, the symplectic
factorization J_eta = A_eta^T J_2n A_eta, Laguerre/Hermite special
functions, twisted convolution and spectral projections of the
sub-Laplacian, Riesz and bilinear Riesz means (operators and pointwise
kernels), and an empirical lab for decay, scaling and threshold checks.
"""

from .groups import (
    GroupPoint,
    MetivierStructure,
    heisenberg,
    quaternionic,
    load_group_config,
)
from .symplectic import SymplecticFactorization, factorize, j_of_mu, det_bound_scan
from .fields import GridFunction, DualGridFunction
from .spectral import MultiplierProfile

__all__ = [
    "GroupPoint",
    "MetivierStructure",
    "heisenberg",
    "quaternionic",
    "load_group_config",
    "SymplecticFactorization",
    "factorize",
    "j_of_mu",
    "det_bound_scan",
    "GridFunction",
    "DualGridFunction",
    "MultiplierProfile",
]

__version__ = "0.1.0"
