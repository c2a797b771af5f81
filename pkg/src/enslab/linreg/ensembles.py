"""Exact posteriors and perturbed-loss ensembles for linear regression.

Given data (X, y) and per-input weights nu, an ensemble member solves the
regularized weighted least-squares problem

    minimize  sum_t nu(x_t)/2 * (theta . x_t - (y_t + z_t))^2
              + lam/2 * ||theta - anchor||^2

where ``z_t ~ N(0, bootstrap_variance(x_t))`` perturbs the targets and the
``anchor ~ N(0, prior_sample_variance * I)`` perturbs the regularizer.  The
closed form is ``theta = A^{-1} (X^T (nu*(y+z)) + lam*anchor)`` with
``A = X^T diag(nu) X + lam I``.  Averaging over the perturbations, the
member distribution is Gaussian with

    mean = A^{-1} X^T (nu*y)
    cov  = A^{-1} (X^T diag(nu^2 * bootstrap_var) X
                   + lam^2 * prior_sample_variance * I) A^{-1}

which ``ensemble_law`` returns exactly, so agreement with the conjugate
posterior can be measured without sampling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..numkit import GaussianBelief, RngStream, solve_spd, spd_inverse
from ..numkit.errors import DimensionMismatch, NumkitError
from .environments import Dataset, LinRegEnvironment, NoiseFn

FAMILIES = ("N", "P", "BP")

# Probe stream used by the unbiasedness check; fixed so the check is a pure
# function of (spec, env).
_PROBE_STREAM = RngStream(seed=0x5EED_0BE5, stream_id=0x1)
_PROBE_SIZE = 100
_UNBIASED_RTOL = 1e-9


class SingularSystem(Exception):
    """The normal equations are singular (no regularization to rescue them)."""


def unit_weights(x: np.ndarray) -> np.ndarray:
    """The constant weight function nu(x) = 1."""
    return np.ones(x.shape[0])


def zero_noise(x: np.ndarray) -> np.ndarray:
    """The zero bootstrap-variance function (targets left unperturbed)."""
    return np.zeros(x.shape[0])


@dataclass(frozen=True)
class EnsembleSpec:
    """Hyperparameters of a perturbed-loss ensemble.

    Three families, by which perturbations they carry:

    - ``"N"``: none; every member solves the same problem.
    - ``"P"``: randomized regularization anchors only.
    - ``"BP"``: anchors plus target noise.

    Use the family constructors below; they pin the fields the family
    forbids (family N and P must keep ``zero_noise`` targets, family N a
    zero anchor variance), and ``__post_init__`` enforces the same rules on
    direct construction.
    """

    family: str
    lam: float
    weight_fn: NoiseFn
    prior_sample_variance: float
    bootstrap_variance_fn: NoiseFn

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}, expected one of {FAMILIES}")
        if self.lam < 0.0:
            raise ValueError(f"regularization strength must be >= 0, got {self.lam}")
        if self.prior_sample_variance < 0.0:
            raise ValueError(
                f"anchor variance must be >= 0, got {self.prior_sample_variance}"
            )
        if self.family == "N" and self.prior_sample_variance != 0.0:
            raise ValueError("family N requires a zero anchor variance")
        if self.family in ("N", "P") and self.bootstrap_variance_fn is not zero_noise:
            raise ValueError(
                f"family {self.family} must use zero_noise as its bootstrap variance"
            )

    @classmethod
    def ensemble_n(cls, lam: float, weight_fn: NoiseFn = unit_weights) -> "EnsembleSpec":
        return cls("N", lam, weight_fn, 0.0, zero_noise)

    @classmethod
    def ensemble_p(
        cls, lam: float, weight_fn: NoiseFn, prior_sample_variance: float
    ) -> "EnsembleSpec":
        return cls("P", lam, weight_fn, prior_sample_variance, zero_noise)

    @classmethod
    def ensemble_bp(
        cls,
        lam: float,
        weight_fn: NoiseFn,
        prior_sample_variance: float,
        bootstrap_variance_fn: NoiseFn,
    ) -> "EnsembleSpec":
        return cls("BP", lam, weight_fn, prior_sample_variance, bootstrap_variance_fn)

    @classmethod
    def posterior_matching(cls, env: LinRegEnvironment) -> "EnsembleSpec":
        """The BP spec whose ensemble law equals the exact posterior.

        Weights are inverse noise variances, the anchor variance copies the
        prior, target noise copies the observation noise, and the
        regularization strength is the prior precision.
        """

        def inverse_noise(x: np.ndarray) -> np.ndarray:
            return 1.0 / env.noise_variances(x)

        return cls(
            "BP",
            lam=1.0 / env.prior_variance,
            weight_fn=inverse_noise,
            prior_sample_variance=env.prior_variance,
            bootstrap_variance_fn=env.noise_variance_fn,
        )


@dataclass(frozen=True)
class EnsembleMemberDraw:
    """Realized perturbations for one ensemble member."""

    target_noise: np.ndarray
    anchor: np.ndarray

    def __post_init__(self):
        z = np.asarray(self.target_noise, dtype=float)
        anchor = np.asarray(self.anchor, dtype=float)
        if z.ndim != 1 or anchor.ndim != 1:
            raise ValueError("target noise and anchor must be vectors")
        if not (np.isfinite(z).all() and np.isfinite(anchor).all()):
            raise ValueError("member draw has non-finite entries")
        object.__setattr__(self, "target_noise", z)
        object.__setattr__(self, "anchor", anchor)


def draw_member(spec: EnsembleSpec, data: Dataset, rng: RngStream) -> EnsembleMemberDraw:
    """Sample one member's perturbations for the given dataset.

    Target noise is drawn first, then the anchor, from a single generator;
    family N consumes the stream but produces exact zeros.
    """
    gen = rng.generator()
    boot_var = np.asarray(spec.bootstrap_variance_fn(data.inputs), dtype=float)
    if np.any(boot_var < 0.0):
        raise ValueError("bootstrap variance function produced a negative variance")
    z = np.sqrt(boot_var) * gen.standard_normal(data.size)
    anchor = np.sqrt(spec.prior_sample_variance) * gen.standard_normal(data.dim)
    return EnsembleMemberDraw(z, anchor)


def _weights(spec: EnsembleSpec, data: Dataset) -> np.ndarray:
    nu = np.asarray(spec.weight_fn(data.inputs), dtype=float)
    if nu.shape != (data.size,):
        raise ValueError(f"weight function returned shape {nu.shape} for {data.size} rows")
    if np.any(nu <= 0.0) or not np.isfinite(nu).all():
        raise ValueError("weight function must produce positive finite weights")
    return nu


def _gram(spec: EnsembleSpec, data: Dataset) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Weights nu, regularized Gram matrix A, and weighted moment X^T(nu*y)."""
    nu = _weights(spec, data)
    a = (data.inputs * nu[:, None]).T @ data.inputs + spec.lam * np.eye(data.dim)
    b = data.inputs.T @ (nu * data.outputs)
    return nu, (a + a.T) / 2.0, b


def _solve_gram(a: np.ndarray, rhs: np.ndarray, lam: float) -> np.ndarray:
    """Solve against the regularized Gram matrix.

    With ``lam > 0`` the system is positive definite by construction; with
    ``lam == 0`` a rank-deficient Gram matrix is a caller error reported as
    ``SingularSystem`` rather than silently jittered away.
    """
    try:
        return solve_spd(a, rhs, jitter=False)
    except NumkitError as exc:
        if lam == 0.0:
            raise SingularSystem(
                "Gram matrix is singular and no regularization was specified"
            ) from exc
        raise


def ensemble_member(
    spec: EnsembleSpec, data: Dataset, draw: EnsembleMemberDraw
) -> np.ndarray:
    """Closed-form minimizer of the member's perturbed objective."""
    if draw.target_noise.shape[0] != data.size:
        raise ValueError(
            f"draw has {draw.target_noise.shape[0]} target-noise entries "
            f"for {data.size} observations"
        )
    if draw.anchor.shape[0] != data.dim:
        raise ValueError(f"anchor dim {draw.anchor.shape[0]} != data dim {data.dim}")
    nu, a, _ = _gram(spec, data)
    rhs = data.inputs.T @ (nu * (data.outputs + draw.target_noise))
    rhs = rhs + spec.lam * draw.anchor
    return _solve_gram(a, rhs, spec.lam)


def ensemble_law(spec: EnsembleSpec, data: Dataset) -> GaussianBelief:
    """Exact distribution of ensemble members in the infinite-member limit.

    The covariance is the sandwich ``A^{-1} M A^{-1}`` with the inner moment
    ``M = X^T diag(nu^2 sigma_b^2) X + lam^2 s0^2 I``; it is exactly zero
    for family N, making the law a point mass.
    """
    nu, a, b = _gram(spec, data)
    try:
        a_inv = spd_inverse(a, jitter=False)
    except NumkitError as exc:
        if spec.lam == 0.0:
            raise SingularSystem(
                "Gram matrix is singular and no regularization was specified"
            ) from exc
        raise
    mean = a_inv @ b

    boot_var = np.asarray(spec.bootstrap_variance_fn(data.inputs), dtype=float)
    if np.any(boot_var < 0.0):
        raise ValueError("bootstrap variance function produced a negative variance")
    inner = (data.inputs * (nu * nu * boot_var)[:, None]).T @ data.inputs
    inner = inner + (spec.lam**2 * spec.prior_sample_variance) * np.eye(data.dim)
    cov = a_inv @ inner @ a_inv
    return GaussianBelief(mean, (cov + cov.T) / 2.0)


def exact_posterior(env: LinRegEnvironment, data: Dataset) -> GaussianBelief:
    """Conjugate Gaussian posterior over the parameter given the data.

    Precision accumulates as ``I/prior_variance + sum_t x_t x_t^T /
    sigma^2(x_t)``; with no data the posterior is the prior.
    """
    if data.dim != env.dim:
        raise DimensionMismatch(f"data dim {data.dim} != environment dim {env.dim}")
    noise_var = env.noise_variances(data.inputs) if data.size else np.zeros(0)
    precision = np.eye(env.dim) / env.prior_variance
    if data.size:
        precision = precision + (data.inputs / noise_var[:, None]).T @ data.inputs
    precision = (precision + precision.T) / 2.0
    cov = spd_inverse(precision)
    moment = (
        data.inputs.T @ (data.outputs / noise_var) if data.size else np.zeros(env.dim)
    )
    return GaussianBelief(cov @ moment, cov)


def is_unbiased(spec: EnsembleSpec, env: LinRegEnvironment) -> bool:
    """Whether the spec's member mean equals the exact posterior mean.

    True exactly when the weights are a positive constant multiple of the
    inverse noise variances and the regularization is the same multiple of
    the prior precision: ``nu(x) * sigma^2(x) = c = lam * prior_variance``
    for some shared c > 0.  The functional identity is checked on a fixed
    100-point probe sample at relative tolerance 1e-9.
    """
    c = spec.lam * env.prior_variance
    if c <= 0.0:
        return False
    gen = _PROBE_STREAM.generator()
    x = env.input_sampler(gen, _PROBE_SIZE)
    products = np.asarray(spec.weight_fn(x), dtype=float) * env.noise_variances(x)
    return bool(np.all(np.abs(products - c) <= _UNBIASED_RTOL * c))
