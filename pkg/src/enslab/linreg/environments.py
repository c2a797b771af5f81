"""Linear-Gaussian data-generating environments.

An environment fixes a true parameter vector, an isotropic Gaussian prior
scale it was drawn from, a heteroscedastic observation-noise law, and an
input distribution.  Noise functions and input samplers are batch callables:
a noise function maps an ``(n, d)`` input block to ``(n,)`` positive
variances, and an input sampler maps ``(generator, n)`` to an ``(n, d)``
block.  Keeping both vectorized is what lets the Monte Carlo estimators in
this package run at 1e5+ samples without fuss.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..numkit import RngStream

NoiseFn = Callable[[np.ndarray], np.ndarray]
InputSampler = Callable[[np.random.Generator, int], np.ndarray]


# -- observation-noise catalog ------------------------------------------------


def constant_noise(variance: float) -> NoiseFn:
    """Homoscedastic noise: sigma^2(x) = variance."""
    if variance <= 0.0:
        raise ValueError(f"noise variance must be positive, got {variance}")

    def fn(x: np.ndarray) -> np.ndarray:
        return np.full(x.shape[0], variance)

    return fn


def quadratic_noise(axis_weights, floor: float = 1e-3) -> NoiseFn:
    """Axis-weighted quadratic noise: sigma^2(x) = x^T diag(w) x + floor.

    The floor keeps the variance positive at the origin.
    """
    w = np.asarray(axis_weights, dtype=float)
    if np.any(w < 0.0) or floor <= 0.0:
        raise ValueError("axis weights must be nonnegative and floor positive")

    def fn(x: np.ndarray) -> np.ndarray:
        return (x * x) @ w + floor

    return fn


def two_region_noise(
    near_variance: float, far_variance: float, threshold: float = 1.0
) -> NoiseFn:
    """Piecewise-constant noise split on the first coordinate's magnitude.

    Inputs with ``|x[0]| <= threshold`` observe ``near_variance``; the rest
    observe ``far_variance``.  With unequal variances this produces an
    anisotropic signal-to-noise spectrum even for isotropic inputs, because
    the split correlates with the first coordinate's own magnitude.
    """
    if near_variance <= 0.0 or far_variance <= 0.0:
        raise ValueError("both region variances must be positive")

    def fn(x: np.ndarray) -> np.ndarray:
        near = np.abs(x[:, 0]) <= threshold
        return np.where(near, near_variance, far_variance)

    return fn


def per_axis_noise(axis_variances) -> NoiseFn:
    """Noise keyed to the dominant coordinate of the input.

    ``sigma^2(x) = v[argmax_i |x_i|]``.  Combined with ``axis_inputs`` this
    gives exact per-direction noise levels, which makes the environment's
    signal-to-noise spectrum computable by hand.
    """
    v = np.asarray(axis_variances, dtype=float)
    if np.any(v <= 0.0):
        raise ValueError("axis variances must be positive")

    def fn(x: np.ndarray) -> np.ndarray:
        return v[np.argmax(np.abs(x), axis=1)]

    return fn


# -- input-distribution catalog -----------------------------------------------


def gaussian_inputs(dim: int) -> InputSampler:
    """Standard normal inputs in R^dim."""

    def sample(gen: np.random.Generator, n: int) -> np.ndarray:
        return gen.standard_normal((n, dim))

    return sample


def axis_inputs(dim: int, scale: float = 1.0) -> InputSampler:
    """Inputs drawn uniformly from the signed scaled basis {+-scale*e_i}."""

    def sample(gen: np.random.Generator, n: int) -> np.ndarray:
        axes = gen.integers(0, dim, size=n)
        signs = np.where(gen.random(n) < 0.5, -1.0, 1.0)
        x = np.zeros((n, dim))
        x[np.arange(n), axes] = signs * scale
        return x

    return sample


# -- environment and data -----------------------------------------------------


@dataclass(frozen=True)
class LinRegEnvironment:
    """A linear-Gaussian regression problem instance.

    ``theta_star`` is the realized parameter; ``prior_variance`` is the
    variance of the isotropic Gaussian prior it is modeled as coming from.
    """

    theta_star: np.ndarray
    prior_variance: float
    noise_variance_fn: NoiseFn
    input_sampler: InputSampler

    def __post_init__(self):
        theta = np.asarray(self.theta_star, dtype=float)
        if theta.ndim != 1 or theta.shape[0] < 1:
            raise ValueError(f"theta_star must be a nonempty vector, got {theta.shape}")
        if not np.isfinite(theta).all():
            raise ValueError("theta_star has non-finite entries")
        if self.prior_variance <= 0.0:
            raise ValueError(f"prior variance must be positive, got {self.prior_variance}")
        object.__setattr__(self, "theta_star", theta)

    @property
    def dim(self) -> int:
        return self.theta_star.shape[0]

    def noise_variances(self, inputs: np.ndarray) -> np.ndarray:
        """Observation-noise variances at each input row, validated positive."""
        var = np.asarray(self.noise_variance_fn(inputs), dtype=float)
        if var.shape != (inputs.shape[0],):
            raise ValueError(
                f"noise function returned shape {var.shape} for {inputs.shape[0]} inputs"
            )
        if np.any(var <= 0.0) or not np.isfinite(var).all():
            raise ValueError("noise function produced a non-positive or non-finite variance")
        return var


@dataclass(frozen=True)
class Dataset:
    """Observed (input, output) pairs, stacked."""

    inputs: np.ndarray
    outputs: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.inputs, dtype=float)
        y = np.asarray(self.outputs, dtype=float)
        if x.ndim != 2:
            raise ValueError(f"inputs must be (T, d), got shape {x.shape}")
        if y.shape != (x.shape[0],):
            raise ValueError(f"outputs shape {y.shape} does not match {x.shape[0]} inputs")
        if not (np.isfinite(x).all() and np.isfinite(y).all()):
            raise ValueError("dataset has non-finite entries")
        object.__setattr__(self, "inputs", x)
        object.__setattr__(self, "outputs", y)

    @classmethod
    def empty(cls, dim: int) -> "Dataset":
        return cls(np.zeros((0, dim)), np.zeros(0))

    @property
    def size(self) -> int:
        return self.inputs.shape[0]

    @property
    def dim(self) -> int:
        return self.inputs.shape[1]


def sample_dataset(env: LinRegEnvironment, size: int, rng: RngStream) -> Dataset:
    """Draw ``size`` observations from the environment.

    Outputs are ``theta_star . x + w`` with ``w ~ N(0, sigma^2(x))``.
    """
    if size < 0:
        raise ValueError(f"dataset size must be nonnegative, got {size}")
    gen = rng.generator()
    x = env.input_sampler(gen, size)
    if x.shape != (size, env.dim):
        raise ValueError(
            f"input sampler returned shape {x.shape}, expected {(size, env.dim)}"
        )
    noise_sd = np.sqrt(env.noise_variances(x)) if size else np.zeros(0)
    y = x @ env.theta_star + noise_sd * gen.standard_normal(size)
    return Dataset(x, y)


EnvironmentSampler = Callable[[RngStream], LinRegEnvironment]


def environment_family(
    dim: int,
    prior_variance: float,
    noise_variance_fn: NoiseFn,
    input_sampler: InputSampler,
) -> EnvironmentSampler:
    """Family of environments differing only in the realized parameter.

    Each call of the returned sampler draws a fresh ``theta_star`` from the
    N(0, prior_variance * I) prior; noise law, prior scale, and input
    distribution are shared.  This is the expectation structure assumed by
    the posterior-quality Monte Carlo estimators.
    """
    if prior_variance <= 0.0:
        raise ValueError(f"prior variance must be positive, got {prior_variance}")

    def sample(rng: RngStream) -> LinRegEnvironment:
        theta = np.sqrt(prior_variance) * rng.generator().standard_normal(dim)
        return LinRegEnvironment(theta, prior_variance, noise_variance_fn, input_sampler)

    return sample
