"""Suite runners: turn a validated config into result rows and plot data.

Every runner derives all randomness from one root stream seeded by the
run's seed, with fixed substream tags, so a (config, seed) pair determines
every emitted byte.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .. import __version__
from ..bandit import AgentPolicy, BanditConfig, evaluate
from ..linreg import (
    EnsembleSpec,
    LinRegEnvironment,
    constant_noise,
    environment_family,
    expected_kl_mc,
    gaussian_inputs,
    unit_weights,
)
from ..numkit import RngStream
from ..stats import mean_and_stderr
from ..testbed import TrainConfig, evaluate_agent, generate_problem, train_ensemble
from .config import ExperimentConfig, config_hash
from .results import ResultRow, render_trace, write_manifest, write_results


@dataclass(frozen=True)
class SuiteOutput:
    rows: tuple[ResultRow, ...]
    # extra plot-data files: name -> full text content
    extras: Mapping[str, str]


def run_linreg(config: ExperimentConfig, rng: RngStream) -> SuiteOutput:
    p = config.params
    d = p["d"]
    noise_fn = constant_noise(p["noise_variance"])
    inputs = gaussian_inputs(d)
    env_sampler = environment_family(d, p["prior_variance"], noise_fn, inputs)
    # representative environment: the matched spec depends only on the
    # shared noise law and prior, not the realized parameter
    reference_env = LinRegEnvironment(np.zeros(d), p["prior_variance"], noise_fn, inputs)
    specs = {
        "n": lambda: EnsembleSpec.ensemble_n(p["lam"]),
        "p": lambda: EnsembleSpec.ensemble_p(p["lam"], unit_weights, p["anchor_variance"]),
        "bp": lambda: EnsembleSpec.posterior_matching(reference_env),
    }
    rows = []
    for family in p["families"]:
        estimate, std_error = expected_kl_mc(
            env_sampler,
            specs[family](),
            p["train_size"],
            p["n_datasets"],
            rng.substream("family", family),
        )
        rows.append(
            ResultRow(
                suite="linreg",
                agent=family.upper(),
                metric="expected_kl",
                value=estimate,
                std_error=std_error,
                seed=config.seed,
                d=d,
                train_size=p["train_size"],
                noise_variance=p["noise_variance"],
                prior_variance=p["prior_variance"],
            )
        )
    return SuiteOutput(tuple(rows), {})


def run_testbed(config: ExperimentConfig, rng: RngStream) -> SuiteOutput:
    p = config.params
    problem = generate_problem(
        p["d"], p["train_size"], p["temperature"], p["flip_fraction"], rng.substream("problem")
    )
    train_config = TrainConfig(
        weight_decay=p["weight_decay"], prior_scale=p["prior_scale"], epochs=p["epochs"]
    )
    rows = []
    for family in p["families"]:
        members = train_ensemble(
            problem, p["n_members"], family.upper(), train_config, rng.substream("train", family)
        )
        # one shared evaluation stream: every family answers the same queries
        marginal, joint = evaluate_agent(
            problem,
            members,
            rng.substream("eval"),
            marginal_queries=p["marginal_queries"],
            anchor_pairs=p["anchor_pairs"],
        )
        for metric, estimate in (("marginal_kl", marginal), ("joint_kl_dyadic", joint)):
            rows.append(
                ResultRow(
                    suite="testbed",
                    agent=family.upper(),
                    metric=metric,
                    value=estimate.value,
                    std_error=estimate.std_error,
                    seed=config.seed,
                    d=p["d"],
                    train_size=p["train_size"],
                    temperature=p["temperature"],
                    flip_fraction=p["flip_fraction"],
                )
            )
    return SuiteOutput(tuple(rows), {})


def run_bandit(config: ExperimentConfig, rng: RngStream) -> SuiteOutput:
    p = config.params
    policies = {
        "n": lambda: AgentPolicy.greedy(p["lam_n"]),
        "p": lambda: AgentPolicy.anchored(p["lam_p"], p["anchor_p"]),
        "bp": lambda: AgentPolicy.matched(),
        "pw": lambda: AgentPolicy.weighted_anchored(p["lam_pw"], p["anchor_pw"]),
    }
    bandit_config = BanditConfig(
        d=p["d"],
        n_actions=p["n_actions"],
        horizon=p["horizon"],
        n_problems=p["n_problems"],
        prior_variance=p["prior_variance"],
    )
    chosen = {family.upper(): policies[family]() for family in p["families"]}
    evaluations = evaluate(bandit_config, chosen, rng.substream("evaluation"))
    rows = []
    extras = {}
    for family in p["families"]:
        name = family.upper()
        result = evaluations[name]
        mean_final, se_final = mean_and_stderr(result.final_regrets)
        rows.append(
            ResultRow(
                suite="bandit",
                agent=name,
                metric="final_regret",
                value=mean_final,
                std_error=se_final,
                seed=config.seed,
                d=p["d"],
                prior_variance=p["prior_variance"],
                n_actions=p["n_actions"],
                horizon=p["horizon"],
            )
        )
        extras[f"regret_trace_{name}.tsv"] = render_trace(result.mean_cumulative)
    return SuiteOutput(tuple(rows), extras)


_RUNNERS = {"linreg": run_linreg, "testbed": run_testbed, "bandit": run_bandit}


def run_suite(config: ExperimentConfig) -> SuiteOutput:
    rng = RngStream(config.seed).substream("suite", config.suite)
    return _RUNNERS[config.suite](config, rng)


def execute_run(config: ExperimentConfig) -> list[str]:
    """Run the suite and write results.csv, manifest.txt, and plot data.

    Returns the written file paths (results first).
    """
    output = run_suite(config)
    os.makedirs(config.output_dir, exist_ok=True)
    written = []
    results_path = os.path.join(config.output_dir, "results.csv")
    write_results(results_path, output.rows)
    written.append(results_path)
    manifest_path = os.path.join(config.output_dir, "manifest.txt")
    write_manifest(manifest_path, config_hash(config), config.seed, __version__)
    written.append(manifest_path)
    for name in sorted(output.extras):
        path = os.path.join(config.output_dir, name)
        with open(path, "w", encoding="utf-8", newline="") as handle:
            handle.write(output.extras[name])
        written.append(path)
    return written
