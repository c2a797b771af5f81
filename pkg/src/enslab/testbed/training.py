"""Ensemble classifier training with additive priors and bootstrap weights.

Each ensemble member pairs a trainable network with a frozen "prior"
network drawn at construction; the member's logits are the sum of the
trainable logits and ``prior_scale`` times the prior logits. Only the
trainable network receives gradient. Member families:

- ``N``: no perturbations; prior_scale forced to 0, all data weights 1.
- ``P``: additive prior only; all data weights 1.
- ``BP``: additive prior plus per-example bootstrap weights, drawn once
  when the member is constructed and fixed for the whole run.

Optimization is plain mini-batch SGD on the weighted cross-entropy plus an
L2 penalty on the trainable parameters, with a step-decay schedule. The
per-step update uses the batch-mean gradient of the summed loss.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..numkit import RngStream
from .mlp import MlpParams, init_mlp, mlp_logits, softmax
from .problems import TestbedProblem

FAMILIES = ("N", "P", "BP")

_LOG_FLOOR = 1e-300


@dataclass(frozen=True)
class BootstrapMode:
    """How per-example data weights are drawn for family BP.

    ``none`` uses unit weights; ``bernoulli`` draws Bernoulli(p)/p; and
    ``double_or_nothing`` draws 2*Bernoulli(0.5), i.e. each example is
    either dropped or counted twice. All three have unit mean.
    """

    kind: str
    p: float | None = None

    def __post_init__(self):
        if self.kind not in ("none", "bernoulli", "double_or_nothing"):
            raise ValueError(f"unknown bootstrap kind {self.kind!r}")
        if self.kind == "bernoulli":
            if self.p is None or not 0.0 < self.p <= 1.0:
                raise ValueError("bernoulli weights need p in (0, 1]")
        elif self.p is not None:
            raise ValueError(f"{self.kind} takes no parameter")

    @classmethod
    def none(cls) -> "BootstrapMode":
        return cls("none")

    @classmethod
    def bernoulli(cls, p: float) -> "BootstrapMode":
        return cls("bernoulli", p)

    @classmethod
    def double_or_nothing(cls) -> "BootstrapMode":
        return cls("double_or_nothing")


def draw_weights(mode: BootstrapMode, size: int, gen: np.random.Generator) -> np.ndarray:
    if mode.kind == "none":
        return np.ones(size)
    if mode.kind == "bernoulli":
        return (gen.random(size) < mode.p) / mode.p
    return 2.0 * (gen.random(size) < 0.5)


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters shared by every member of an ensemble."""

    weight_decay: float
    prior_scale: float = 1.0
    learning_rate: float = 0.05
    epochs: int = 200
    batch_size: int = 32
    # (fraction of epochs, multiplier) pairs; the last passed pair applies.
    lr_milestones: tuple = ((0.5, 0.1), (0.75, 0.01), (0.875, 0.001))
    bootstrap_mode: BootstrapMode = field(default_factory=BootstrapMode.double_or_nothing)

    def __post_init__(self):
        if self.weight_decay < 0.0:
            raise ValueError("weight_decay must be nonnegative")
        if self.prior_scale < 0.0:
            raise ValueError("prior_scale must be nonnegative")
        if self.learning_rate <= 0.0 or self.epochs < 1 or self.batch_size < 1:
            raise ValueError("bad optimizer settings")

    def learning_rate_at(self, epoch: int) -> float:
        frac = epoch / self.epochs
        scale = 1.0
        for milestone, multiplier in self.lr_milestones:
            if frac >= milestone:
                scale = multiplier
        return self.learning_rate * scale


@dataclass(frozen=True)
class ClassifierMember:
    """One ensemble member. The prior net and data weights never change
    after construction; training updates the trainable arrays in place."""

    trainable: MlpParams
    prior: MlpParams
    prior_scale: float
    data_weights: np.ndarray

    def __post_init__(self):
        if self.prior_scale < 0.0:
            raise ValueError("prior_scale must be nonnegative")
        if self.trainable.widths != self.prior.widths:
            raise ValueError("trainable and prior architectures must match")
        w = np.asarray(self.data_weights, dtype=float)
        if w.ndim != 1 or np.any(w < 0.0) or not np.isfinite(w).all():
            raise ValueError("data weights must be a nonnegative vector")
        object.__setattr__(self, "data_weights", w)


def combined_logits(member: ClassifierMember, x: np.ndarray) -> np.ndarray:
    logits = mlp_logits(member.trainable, x)
    if member.prior_scale != 0.0:
        logits = logits + member.prior_scale * mlp_logits(member.prior, x)
    return logits


def forward(member: ClassifierMember, x: np.ndarray) -> np.ndarray:
    """Class probabilities softmax(trainable(x) + prior_scale * prior(x))."""
    return softmax(combined_logits(member, x))


def loss_and_gradient(
    member: ClassifierMember,
    inputs: np.ndarray,
    labels: np.ndarray,
    weights: np.ndarray,
    weight_decay: float,
):
    """Weighted cross-entropy plus L2, with gradients for the trainable net.

    loss = sum_i weights[i] * (-log p(labels[i] | inputs[i]))
           + weight_decay * sum of squared trainable parameters

    Returns (loss, grads) where grads mirrors ``member.trainable.layers``.
    The prior network contributes to the logits but gets no gradient.
    """
    x = np.asarray(inputs, dtype=float)
    y = np.asarray(labels)
    w = np.asarray(weights, dtype=float)
    n = x.shape[0]
    if n < 1:
        raise ValueError("batch must be non-empty")
    if y.shape != (n,) or w.shape != (n,):
        raise ValueError("labels and weights must match the batch rows")

    layers = member.trainable.layers
    # Forward pass, keeping pre-activations for the backward sweep.
    acts = [x]
    pre = []
    h = x
    for wl, bl in layers[:-1]:
        z = h @ wl + bl
        pre.append(z)
        h = np.maximum(z, 0.0)
        acts.append(h)
    wl, bl = layers[-1]
    logits = h @ wl + bl
    if member.prior_scale != 0.0:
        logits = logits + member.prior_scale * mlp_logits(member.prior, x)

    probs = softmax(logits)
    picked = np.maximum(probs[np.arange(n), y.astype(int)], _LOG_FLOOR)
    loss = float(-(w * np.log(picked)).sum())
    for wl, bl in layers:
        loss += weight_decay * (float((wl * wl).sum()) + float((bl * bl).sum()))

    delta = probs.copy()
    delta[np.arange(n), y.astype(int)] -= 1.0
    delta *= w[:, None]

    grads = [None] * len(layers)
    for i in range(len(layers) - 1, -1, -1):
        wl, bl = layers[i]
        grads[i] = (
            acts[i].T @ delta + 2.0 * weight_decay * wl,
            delta.sum(axis=0) + 2.0 * weight_decay * bl,
        )
        if i > 0:
            delta = (delta @ wl.T) * (pre[i - 1] > 0.0)
    return loss, grads


def _train_member(
    member: ClassifierMember,
    inputs: np.ndarray,
    labels: np.ndarray,
    config: TrainConfig,
    shuffle_gen: np.random.Generator,
) -> None:
    n = inputs.shape[0]
    for epoch in range(config.epochs):
        lr = config.learning_rate_at(epoch)
        order = shuffle_gen.permutation(n)
        for start in range(0, n, config.batch_size):
            rows = order[start : start + config.batch_size]
            _, grads = loss_and_gradient(
                member,
                inputs[rows],
                labels[rows],
                member.data_weights[rows],
                config.weight_decay,
            )
            step = lr / rows.size
            for (wl, bl), (gw, gb) in zip(member.trainable.layers, grads):
                wl -= step * gw
                bl -= step * gb


def train_ensemble(
    problem: TestbedProblem,
    n_members: int,
    family: str,
    config: TrainConfig,
    rng: RngStream,
) -> list:
    """Train an ensemble of the given family on the problem's dataset.

    Member m consumes randomness only through the purpose-keyed substreams
    ("member", m, "init"), ("member", m, "prior"), ("member", m,
    "bootstrap"), and ("member", m, "shuffle") of ``rng``. Families that
    share a perturbation therefore consume identical randomness for it:
    with the same stream, a P ensemble at prior_scale 0 reproduces an N
    ensemble parameter for parameter.
    """
    if family not in FAMILIES:
        raise ValueError(f"family must be one of {FAMILIES}, got {family!r}")
    if n_members < 1:
        raise ValueError("n_members must be positive")
    inputs = problem.dataset.inputs
    labels = problem.labels
    widths = problem.generative.widths
    members = []
    for m in range(n_members):
        trainable = init_mlp(widths, rng.substream("member", m, "init"))
        prior = init_mlp(widths, rng.substream("member", m, "prior"))
        if family == "BP":
            boot_gen = rng.substream("member", m, "bootstrap").generator()
            data_weights = draw_weights(config.bootstrap_mode, problem.train_size, boot_gen)
        else:
            data_weights = np.ones(problem.train_size)
        member = ClassifierMember(
            trainable=trainable,
            prior=prior,
            prior_scale=0.0 if family == "N" else config.prior_scale,
            data_weights=data_weights,
        )
        shuffle_gen = rng.substream("member", m, "shuffle").generator()
        _train_member(member, inputs, labels, config, shuffle_gen)
        members.append(member)
    return members
