"""Joint predictive-distribution metrics for finite model mixtures.

An agent here is a uniform mixture over M predictive models. A model is a
batch callable mapping an (n, d) input block to an (n, K) row-stochastic
array of class probabilities. Quality against a known truth model is the
expected KL divergence between the truth and the mixture over length-tau
label sequences, estimated by Monte Carlo over sampled queries.

Two query layouts are provided: i.i.d. inputs per step (`joint_kl`), and
the dyadic layout (`joint_kl_dyadic`) where each length-tau query repeats
two anchor inputs tau/2 times each, which stresses whether the mixture
understands what it does not know rather than just matching marginals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .numkit import RngStream

__all__ = [
    "InvalidTau",
    "JointQuery",
    "KlEstimate",
    "PredictiveModel",
    "joint_kl",
    "joint_kl_dyadic",
    "joint_kl_on_queries",
    "joint_likelihood",
    "joint_log_likelihood",
    "joint_nll",
    "sample_dyadic_queries",
    "sample_queries",
    "truth_nll",
]

# Batch predictive model: (n, d) inputs -> (n, K) class probabilities.
PredictiveModel = Callable[[np.ndarray], np.ndarray]
InputSampler = Callable[[np.random.Generator, int], np.ndarray]

# Deterministic models may assign exact zeros; floor before taking logs.
PROB_FLOOR = 1e-300
_ROW_SUM_TOL = 1e-9


class InvalidTau(ValueError):
    """Sequence length incompatible with the requested estimator."""


@dataclass(frozen=True)
class JointQuery:
    """A length-tau input sequence with one realized label per step."""

    inputs: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        inputs = np.asarray(self.inputs, dtype=float)
        labels = np.asarray(self.labels)
        if inputs.ndim != 2 or inputs.shape[0] < 1:
            raise ValueError("inputs must be a non-empty (tau, d) array")
        if labels.shape != (inputs.shape[0],):
            raise ValueError("need exactly one label per input row")
        if not np.issubdtype(labels.dtype, np.integer):
            raise ValueError("labels must be integers")
        if np.any(labels < 0):
            raise ValueError("labels must be nonnegative class indices")
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "labels", labels)

    @property
    def tau(self) -> int:
        return self.inputs.shape[0]


@dataclass(frozen=True)
class KlEstimate:
    """Monte-Carlo KL estimate with its standard error."""

    value: float
    std_error: float
    tau: int
    dyadic: bool = False

    def __post_init__(self):
        if math.isnan(self.std_error) or self.std_error < 0:
            raise ValueError("std_error must be nonnegative")
        if self.tau < 1:
            raise ValueError("tau must be positive")


def _validated_probs(model: PredictiveModel, inputs: np.ndarray) -> np.ndarray:
    probs = np.asarray(model(inputs), dtype=float)
    if probs.ndim != 2 or probs.shape[0] != inputs.shape[0]:
        raise ValueError("model must return one probability row per input")
    if not np.all(np.isfinite(probs)) or np.any(probs < 0):
        raise ValueError("model produced negative or non-finite probabilities")
    if np.any(np.abs(probs.sum(axis=1) - 1.0) > _ROW_SUM_TOL):
        raise ValueError("model rows must sum to 1")
    return probs


def _label_log_likelihood(model: PredictiveModel, query: JointQuery) -> float:
    probs = _validated_probs(model, query.inputs)
    if np.any(query.labels >= probs.shape[1]):
        raise ValueError("label outside the model's class range")
    picked = probs[np.arange(query.tau), query.labels]
    return float(np.log(np.maximum(picked, PROB_FLOOR)).sum())


def joint_log_likelihood(agent: Sequence[PredictiveModel], query: JointQuery) -> float:
    """Log of the uniform-mixture probability assigned to the query's labels."""
    if len(agent) < 1:
        raise ValueError("agent must contain at least one model")
    scores = np.array([_label_log_likelihood(model, query) for model in agent])
    top = float(scores.max())
    return top + math.log(float(np.exp(scores - top).sum()) / len(agent))


def joint_likelihood(agent: Sequence[PredictiveModel], query: JointQuery) -> float:
    return math.exp(joint_log_likelihood(agent, query))


def _sample_labels(gen: np.random.Generator, probs: np.ndarray) -> np.ndarray:
    # One categorical draw per row via inverse CDF.
    u = gen.random(probs.shape[0])
    idx = (probs.cumsum(axis=1) < u[:, None]).sum(axis=1)
    return np.minimum(idx, probs.shape[1] - 1)


def sample_queries(
    truth: PredictiveModel,
    input_sampler: InputSampler,
    tau: int,
    n_queries: int,
    rng: RngStream,
) -> tuple[JointQuery, ...]:
    """Draw queries with i.i.d. inputs per step and labels from the truth."""
    if tau < 1:
        raise InvalidTau("tau must be at least 1")
    if n_queries < 1:
        raise ValueError("n_queries must be positive")
    queries = []
    for i in range(n_queries):
        gen = rng.substream("query", i).generator()
        inputs = np.asarray(input_sampler(gen, tau), dtype=float)
        probs = _validated_probs(truth, inputs)
        queries.append(JointQuery(inputs, _sample_labels(gen, probs)))
    return tuple(queries)


def sample_dyadic_queries(
    truth: PredictiveModel,
    input_sampler: InputSampler,
    tau: int,
    n_anchor_pairs: int,
    rng: RngStream,
) -> tuple[JointQuery, ...]:
    """Draw queries that repeat two anchor inputs tau/2 times each.

    The deterministic half/half split (rather than resampling among the
    anchors) removes one source of estimator variance.
    """
    if tau < 2 or tau % 2 != 0:
        raise InvalidTau("dyadic queries need an even tau >= 2")
    if n_anchor_pairs < 1:
        raise ValueError("n_anchor_pairs must be positive")
    queries = []
    for i in range(n_anchor_pairs):
        gen = rng.substream("anchor-pair", i).generator()
        anchors = np.asarray(input_sampler(gen, 2), dtype=float)
        inputs = np.repeat(anchors, tau // 2, axis=0)
        probs = _validated_probs(truth, inputs)
        queries.append(JointQuery(inputs, _sample_labels(gen, probs)))
    return tuple(queries)


def joint_nll(agent: Sequence[PredictiveModel], queries: Sequence[JointQuery]) -> float:
    """Mean negative log mixture likelihood over the query set."""
    if len(queries) < 1:
        raise ValueError("queries must be non-empty")
    return float(np.mean([-joint_log_likelihood(agent, q) for q in queries]))


def truth_nll(truth: PredictiveModel, queries: Sequence[JointQuery]) -> float:
    """Mean negative log truth likelihood of the realized labels."""
    return joint_nll([truth], queries)


def joint_kl_on_queries(
    truth: PredictiveModel,
    agent: Sequence[PredictiveModel],
    queries: Sequence[JointQuery],
    dyadic: bool = False,
) -> KlEstimate:
    """KL estimate on a fixed query set.

    The value satisfies, exactly and by construction,
    ``value == joint_nll(agent, queries) - truth_nll(truth, queries)``:
    the expected KL equals the agent's cross-entropy shifted by the truth's
    own entropy term, so agents rank identically under either number.
    """
    if len(queries) < 1:
        raise ValueError("queries must be non-empty")
    taus = {q.tau for q in queries}
    if len(taus) != 1:
        raise ValueError("queries must share one tau")
    value = joint_nll(agent, queries) - truth_nll(truth, queries)
    diffs = np.array(
        [
            joint_log_likelihood([truth], q) - joint_log_likelihood(agent, q)
            for q in queries
        ]
    )
    n = len(queries)
    std_error = float(diffs.std(ddof=1) / math.sqrt(n)) if n > 1 else math.inf
    return KlEstimate(value, std_error, tau=taus.pop(), dyadic=dyadic)


def joint_kl(
    truth: PredictiveModel,
    agent: Sequence[PredictiveModel],
    input_sampler: InputSampler,
    rng: RngStream,
    *,
    tau: int,
    n_queries: int,
) -> KlEstimate:
    """Monte-Carlo estimate of the expected joint KL over random queries."""
    if n_queries < 100:
        raise ValueError("need at least 100 queries for a stable estimate")
    queries = sample_queries(truth, input_sampler, tau, n_queries, rng)
    return joint_kl_on_queries(truth, agent, queries)


def joint_kl_dyadic(
    truth: PredictiveModel,
    agent: Sequence[PredictiveModel],
    input_sampler: InputSampler,
    rng: RngStream,
    *,
    tau: int = 10,
    n_anchor_pairs: int = 1000,
) -> KlEstimate:
    """Expected joint KL under the two-anchor repeated-input layout."""
    queries = sample_dyadic_queries(truth, input_sampler, tau, n_anchor_pairs, rng)
    return joint_kl_on_queries(truth, agent, queries, dyadic=True)
