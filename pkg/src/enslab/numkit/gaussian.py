"""Multivariate Gaussian beliefs: validation, KL divergence, sampling."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NotPositiveDefinite
from .linalg import check_symmetric, cholesky, logdet_from_cholesky, sym_eigh
from .rng import RngStream

# A covariance counts as positive semi-definite if its spectrum stays above
# this (absolute) floor; the shift test below is equivalent to the bound.
PSD_TOL = 1e-10


@dataclass(frozen=True)
class GaussianBelief:
    """Gaussian distribution over a parameter vector.

    The covariance may be singular: degenerate (point-mass) beliefs are
    legitimate outputs of ensemble constructions without parameter noise.
    """

    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        if mean.ndim != 1:
            raise DimensionMismatch(f"mean must be a vector, got shape {mean.shape}")
        if not np.isfinite(mean).all():
            raise ValueError("mean has non-finite entries")
        cov = check_symmetric(self.covariance, "covariance")
        if cov.shape[0] != mean.shape[0]:
            raise DimensionMismatch(
                f"mean dim {mean.shape[0]} != covariance side {cov.shape[0]}"
            )
        # Cholesky of cov + PSD_TOL*I succeeds exactly when the spectrum is
        # above -PSD_TOL, which checks semi-definiteness without an O(d^3)
        # eigensolve on every construction.
        try:
            np.linalg.cholesky(cov + PSD_TOL * np.eye(cov.shape[0]))
        except np.linalg.LinAlgError:
            raise NotPositiveDefinite(
                "covariance has an eigenvalue below -1e-10"
            ) from None
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)

    @property
    def dim(self) -> int:
        return self.mean.shape[0]


def _strict_cholesky(cov: np.ndarray) -> np.ndarray | None:
    """Cholesky factor of a validated covariance, or None if singular."""
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        return None


def gaussian_kl(p: GaussianBelief, q: GaussianBelief, lenient: bool = False) -> float:
    """KL divergence KL(p || q) between Gaussian beliefs, in nats.

    Computed as ``0.5 * (logdet Sq - logdet Sp - d + tr(Sq^-1 Sp)
    + (mq - mp)^T Sq^-1 (mq - mp))`` via Cholesky factors.  A singular
    covariance on either side makes the divergence infinite (the degenerate
    law is not absolutely continuous); with ``lenient`` that case returns
    ``math.inf``, otherwise it raises.

    :raises NotPositiveDefinite: singular covariance with ``lenient=False``.
    :raises DimensionMismatch: if p and q have different dimensions.
    """
    if p.dim != q.dim:
        raise DimensionMismatch(f"dimension mismatch: {p.dim} vs {q.dim}")
    low_q = _strict_cholesky(q.covariance)
    low_p = _strict_cholesky(p.covariance)
    if low_q is None or low_p is None:
        if lenient:
            return math.inf
        side = "q" if low_q is None else "p"
        raise NotPositiveDefinite(f"covariance of {side} is singular")

    d = p.dim
    logdet_q = logdet_from_cholesky(low_q)
    logdet_p = logdet_from_cholesky(low_p)
    # tr(Sq^-1 Sp) = ||Lq^-1 Lp||_F^2
    half = np.linalg.solve(low_q, low_p)
    trace_term = float(np.sum(half * half))
    delta = np.linalg.solve(low_q, q.mean - p.mean)
    mahal = float(delta @ delta)
    kl = 0.5 * (logdet_q - logdet_p - d + trace_term + mahal)
    # Round-off can leave a tiny negative residue where the true value is 0.
    return max(kl, 0.0)


def _psd_factor(cov: np.ndarray) -> np.ndarray:
    """Some factor F with F @ F.T == cov, for possibly singular cov.

    Positive definite input takes the Cholesky path; singular input falls
    back to an eigenfactor with negative round-off eigenvalues clamped to
    zero, so an exactly-zero covariance yields an exactly-zero factor.
    """
    low = _strict_cholesky(cov)
    if low is not None:
        return low
    w, v = sym_eigh(cov)
    return v * np.sqrt(np.clip(w, 0.0, None))


def draw_gaussian(rng: RngStream, belief: GaussianBelief, n: int) -> np.ndarray:
    """Draw ``n`` samples from ``belief``; returns an ``(n, dim)`` array.

    Samples are ``mean + F z`` with ``F F^T = covariance`` and ``z`` i.i.d.
    standard normal.  Pure in ``rng``: the same stream reproduces the same
    samples.
    """
    if n < 0:
        raise ValueError(f"sample count must be nonnegative, got {n}")
    factor = _psd_factor(belief.covariance)
    z = rng.generator().standard_normal((n, belief.dim))
    return belief.mean + z @ factor.T
