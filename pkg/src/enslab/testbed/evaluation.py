"""Scoring trained ensembles against the clean generative law."""

from __future__ import annotations

from typing import Sequence

from ..linreg import gaussian_inputs
from ..metrics import KlEstimate, PredictiveModel, joint_kl, joint_kl_dyadic
from ..numkit import RngStream
from .problems import TestbedProblem, truth_model
from .training import ClassifierMember, forward


def member_model(member: ClassifierMember) -> PredictiveModel:
    """Wrap a trained member as a batch predictive model."""

    def model(x):
        return forward(member, x)

    return model


def evaluate_agent(
    problem: TestbedProblem,
    members: Sequence[ClassifierMember],
    rng: RngStream,
    *,
    marginal_queries: int = 1000,
    joint_tau: int = 10,
    anchor_pairs: int = 1000,
) -> tuple[KlEstimate, KlEstimate]:
    """Marginal (tau=1) and dyadic joint KL of the uniform member mixture.

    Truth is the problem's pre-flip generative conditional law; query
    inputs are standard normal like the training inputs.
    """
    if len(members) < 1:
        raise ValueError("need at least one member")
    truth = truth_model(problem)
    agent = [member_model(m) for m in members]
    sampler = gaussian_inputs(problem.input_dim)
    marginal = joint_kl(
        truth, agent, sampler, rng.substream("marginal"), tau=1, n_queries=marginal_queries
    )
    joint = joint_kl_dyadic(
        truth,
        agent,
        sampler,
        rng.substream("joint"),
        tau=joint_tau,
        n_anchor_pairs=anchor_pairs,
    )
    return marginal, joint
