"""Synthetic classification testbed: random-MLP environments and ensembles."""

from .mlp import (
    DEFAULT_HIDDEN,
    MlpParams,
    init_mlp,
    load_mlp,
    mlp_from_bytes,
    mlp_logits,
    mlp_to_bytes,
    save_mlp,
    softmax,
)
from .problems import TestbedProblem, generate_problem, truth_model
from .training import (
    FAMILIES,
    BootstrapMode,
    ClassifierMember,
    TrainConfig,
    combined_logits,
    draw_weights,
    forward,
    loss_and_gradient,
    train_ensemble,
)
from .evaluation import evaluate_agent, member_model

__all__ = [
    "DEFAULT_HIDDEN",
    "FAMILIES",
    "BootstrapMode",
    "ClassifierMember",
    "MlpParams",
    "TestbedProblem",
    "TrainConfig",
    "combined_logits",
    "draw_weights",
    "evaluate_agent",
    "forward",
    "generate_problem",
    "init_mlp",
    "load_mlp",
    "loss_and_gradient",
    "member_model",
    "mlp_from_bytes",
    "mlp_logits",
    "mlp_to_bytes",
    "save_mlp",
    "softmax",
    "train_ensemble",
    "truth_model",
]
