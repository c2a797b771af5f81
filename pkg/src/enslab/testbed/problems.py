"""Synthetic classification problems drawn from random generative MLPs.

A problem fixes a generative network, a softmax temperature, and a training
set sampled from the induced conditional label law on standard normal
inputs. An optional label-flip corruption moves a fixed fraction of the
label-1 training rows to label 0; the corruption touches only the training
data, so evaluation always scores agents against the clean generative law.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..linreg import Dataset
from ..metrics import PredictiveModel
from ..numkit import RngStream
from .mlp import DEFAULT_HIDDEN, MlpParams, init_mlp, mlp_logits, softmax


@dataclass(frozen=True)
class TestbedProblem:
    """One classification instance: generative net, temperature, data."""

    generative: MlpParams
    temperature: float
    input_dim: int
    train_size: int
    flip_fraction: float
    dataset: Dataset

    def __post_init__(self):
        if self.temperature <= 0.0:
            raise ValueError("temperature must be positive")
        if not 0.0 <= self.flip_fraction < 1.0:
            raise ValueError("flip_fraction must lie in [0, 1)")
        if self.generative.in_dim != self.input_dim:
            raise ValueError("generative net input width does not match input_dim")
        if self.dataset.size != self.train_size or self.dataset.dim != self.input_dim:
            raise ValueError("dataset shape does not match the declared sizes")
        labels = self.dataset.outputs
        if np.any(labels != np.round(labels)) or np.any(labels < 0):
            raise ValueError("labels must be nonnegative integers")
        if np.any(labels >= self.generative.out_dim):
            raise ValueError("labels outside the generative class range")

    @property
    def n_classes(self) -> int:
        return self.generative.out_dim

    @property
    def labels(self) -> np.ndarray:
        return self.dataset.outputs.astype(int)


def _categorical(gen: np.random.Generator, probs: np.ndarray) -> np.ndarray:
    u = gen.random(probs.shape[0])
    idx = (probs.cumsum(axis=1) < u[:, None]).sum(axis=1)
    return np.minimum(idx, probs.shape[1] - 1)


def generate_problem(
    d: int,
    train_size: int,
    temperature: float,
    flip_fraction: float,
    rng: RngStream,
    *,
    n_classes: int = 2,
    hidden=DEFAULT_HIDDEN,
) -> TestbedProblem:
    """Sample a problem instance.

    Labels are drawn from softmax(logits / temperature) of a freshly drawn
    generative net on N(0, I) inputs; then round(flip_fraction * #ones) of
    the label-1 rows are flipped to 0, chosen uniformly without replacement.
    """
    if d < 1 or train_size < 1:
        raise ValueError("d and train_size must be positive")
    if temperature <= 0.0:
        raise ValueError("temperature must be positive")
    if not 0.0 <= flip_fraction < 1.0:
        raise ValueError("flip_fraction must lie in [0, 1)")
    generative = init_mlp((d, *hidden, n_classes), rng.substream("generative"))
    gen = rng.substream("data").generator()
    inputs = gen.standard_normal((train_size, d))
    probs = softmax(mlp_logits(generative, inputs) / temperature)
    labels = _categorical(gen, probs)
    if flip_fraction > 0.0:
        ones = np.flatnonzero(labels == 1)
        n_flips = int(round(flip_fraction * ones.size))
        if n_flips:
            flip_gen = rng.substream("flips").generator()
            chosen = flip_gen.choice(ones, size=n_flips, replace=False)
            labels = labels.copy()
            labels[chosen] = 0
    return TestbedProblem(
        generative=generative,
        temperature=temperature,
        input_dim=d,
        train_size=train_size,
        flip_fraction=flip_fraction,
        dataset=Dataset(inputs, labels.astype(float)),
    )


def truth_model(problem: TestbedProblem) -> PredictiveModel:
    """The clean generative conditional law (pre-flip), as a batch model."""

    def model(x: np.ndarray) -> np.ndarray:
        return softmax(mlp_logits(problem.generative, x) / problem.temperature)

    return model
