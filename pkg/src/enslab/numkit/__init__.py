"""Numerical kernel: matrices, Gaussian beliefs, deterministic randomness."""

from .errors import (
    DimensionMismatch,
    NoConvergence,
    NotPositiveDefinite,
    NumkitError,
)
from .gaussian import GaussianBelief, draw_gaussian, gaussian_kl
from .linalg import (
    JITTER_LADDER,
    MAX_SIDE,
    cholesky,
    logdet_from_cholesky,
    solve_spd,
    spd_inverse,
    sym_eigenvalues,
    sym_eigh,
)
from .rng import RngStream

__all__ = [
    "DimensionMismatch",
    "GaussianBelief",
    "JITTER_LADDER",
    "MAX_SIDE",
    "NoConvergence",
    "NotPositiveDefinite",
    "NumkitError",
    "RngStream",
    "cholesky",
    "draw_gaussian",
    "gaussian_kl",
    "logdet_from_cholesky",
    "solve_spd",
    "spd_inverse",
    "sym_eigenvalues",
    "sym_eigh",
]
