"""Heteroscedastic linear bandits with Thompson-sampling ensemble agents.

A problem fixes a finite action set in R^d, a true parameter, and a
diagonal observation-noise matrix; pulling action x returns theta*.x plus
N(0, x' S x) noise. Agents act by Thompson sampling from the closed-form
infinite-ensemble law: each step re-solves the regularized least-squares
ensemble from scratch on the full history, draws one Gaussian parameter
sample (one fresh infinite-ensemble member), and plays the greedy action
for it. Family N's law is a point mass, so the agent degenerates to pure
greedy; families P/BP perturb, and the P-weighted variant reweights data
by inverse noise while keeping target noise off.

Performance is measured by expected instant regret against the known
optimum, accumulated over the horizon and averaged over many independently
sampled problems. Problem draws are shared across policies so comparisons
are paired.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Protocol, Sequence

import numpy as np

from .linreg import Dataset, EnsembleSpec, LinRegEnvironment, ensemble_law, unit_weights
from .numkit import RngStream, draw_gaussian

BANDIT_FAMILIES = ("N", "P", "BP", "PW")

DEFAULT_HORIZON = 200
DEFAULT_N_PROBLEMS = 100


@dataclass(frozen=True)
class BanditProblem:
    """A finite-armed linear bandit with input-dependent Gaussian noise."""

    actions: np.ndarray
    theta_star: np.ndarray
    obs_cov_diag: np.ndarray
    prior_variance: float = 1.0

    def __post_init__(self):
        actions = np.asarray(self.actions, dtype=float)
        theta = np.asarray(self.theta_star, dtype=float)
        diag = np.asarray(self.obs_cov_diag, dtype=float)
        if actions.ndim != 2 or actions.shape[0] < 2:
            raise ValueError("need at least two actions as an (N, d) array")
        d = actions.shape[1]
        if theta.shape != (d,) or diag.shape != (d,):
            raise ValueError("theta_star and obs_cov_diag must have length d")
        if np.any(diag <= 0.0) or np.any(diag >= 1.0):
            raise ValueError("observation covariance diagonal must lie in (0, 1)")
        if self.prior_variance <= 0.0:
            raise ValueError("prior_variance must be positive")
        if np.any((actions * actions) @ diag <= 0.0):
            raise ValueError("every action must have positive noise variance")
        object.__setattr__(self, "actions", actions)
        object.__setattr__(self, "theta_star", theta)
        object.__setattr__(self, "obs_cov_diag", diag)

    @property
    def dim(self) -> int:
        return self.actions.shape[1]

    @property
    def n_actions(self) -> int:
        return self.actions.shape[0]

    def noise_variances(self, inputs: np.ndarray) -> np.ndarray:
        """x' diag(obs_cov) x for each input row."""
        return (inputs * inputs) @ self.obs_cov_diag

    def mean_rewards(self) -> np.ndarray:
        return self.actions @ self.theta_star

    def as_environment(self) -> LinRegEnvironment:
        """The problem as a regression environment (inputs: uniform action)."""

        def action_sampler(gen: np.random.Generator, n: int) -> np.ndarray:
            return self.actions[gen.integers(0, self.n_actions, size=n)]

        return LinRegEnvironment(
            self.theta_star, self.prior_variance, self.noise_variances, action_sampler
        )


@dataclass(frozen=True)
class RegretTrace:
    """Per-step expected regret of one bandit run."""

    per_step: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.per_step, dtype=float)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("per_step must be a non-empty vector")
        if np.any(arr < -1e-12):
            raise ValueError("expected instant regret cannot be negative")
        object.__setattr__(self, "per_step", np.maximum(arr, 0.0))

    @property
    def horizon(self) -> int:
        return self.per_step.shape[0]

    @property
    def cumulative(self) -> np.ndarray:
        return np.cumsum(self.per_step)

    @property
    def final(self) -> float:
        return float(self.per_step.sum())


class Policy(Protocol):
    """Anything that picks an action index from (problem, history, rng)."""

    def choose_action(
        self, problem: BanditProblem, history: Dataset, rng: RngStream
    ) -> int: ...


@dataclass(frozen=True)
class AgentPolicy:
    """Thompson sampling from an ensemble family's closed-form law.

    The regression spec is bound to each problem via ``spec_for``: noise
    weighting (families BP and PW) uses the problem's own x' S x map, and
    family BP copies the problem's prior and noise scales outright, which
    makes its sampling law the exact posterior.
    """

    family: str
    lam: float = 1.0
    anchor_variance: float = 1.0

    def __post_init__(self):
        if self.family not in BANDIT_FAMILIES:
            raise ValueError(f"family must be one of {BANDIT_FAMILIES}")
        if self.family != "BP":
            if self.lam <= 0.0:
                raise ValueError("lam must be positive so the empty-history solve exists")
            if self.family in ("P", "PW") and self.anchor_variance <= 0.0:
                raise ValueError("anchored families need a positive anchor variance")

    @classmethod
    def greedy(cls, lam: float) -> "AgentPolicy":
        return cls("N", lam=lam)

    @classmethod
    def anchored(cls, lam: float, anchor_variance: float) -> "AgentPolicy":
        return cls("P", lam=lam, anchor_variance=anchor_variance)

    @classmethod
    def weighted_anchored(cls, lam: float, anchor_variance: float) -> "AgentPolicy":
        return cls("PW", lam=lam, anchor_variance=anchor_variance)

    @classmethod
    def matched(cls) -> "AgentPolicy":
        """Family BP at the posterior-matching parameters (nothing to tune)."""
        return cls("BP")

    def spec_for(self, problem: BanditProblem) -> EnsembleSpec:
        if self.family == "N":
            return EnsembleSpec.ensemble_n(self.lam)
        if self.family == "P":
            return EnsembleSpec.ensemble_p(self.lam, unit_weights, self.anchor_variance)
        if self.family == "PW":

            def inverse_noise(x: np.ndarray) -> np.ndarray:
                return 1.0 / problem.noise_variances(x)

            return EnsembleSpec.ensemble_p(self.lam, inverse_noise, self.anchor_variance)
        return EnsembleSpec.posterior_matching(problem.as_environment())

    def sample_parameter(
        self, problem: BanditProblem, history: Dataset, rng: RngStream
    ) -> np.ndarray:
        """One fresh infinite-ensemble member: a draw from the current law."""
        law = ensemble_law(self.spec_for(problem), history)
        return draw_gaussian(rng, law, 1)[0]

    def choose_action(
        self, problem: BanditProblem, history: Dataset, rng: RngStream
    ) -> int:
        theta = self.sample_parameter(problem, history, rng)
        # argmax takes the first maximizer, i.e. ties break to lowest index.
        return int(np.argmax(problem.actions @ theta))


def sample_problem(
    d: int, n_actions: int, rng: RngStream, prior_variance: float = 1.0
) -> BanditProblem:
    """Actions N(0, I), theta* N(0, prior_variance I), noise diag U(0, 1)."""
    if d < 1 or n_actions < 2:
        raise ValueError("need d >= 1 and n_actions >= 2")
    gen = rng.generator()
    while True:
        actions = gen.standard_normal((n_actions, d))
        theta = math.sqrt(prior_variance) * gen.standard_normal(d)
        diag = gen.uniform(size=d)
        # Zero draws have probability zero; redraw rather than clamp.
        if np.all(diag > 0.0) and np.all((actions * actions) @ diag > 0.0):
            return BanditProblem(actions, theta, diag, prior_variance)


def ts_step(
    problem: BanditProblem, history: Dataset, policy: Policy, rng: RngStream
) -> tuple[int, float, float]:
    """One Thompson-sampling step: choose, observe, score.

    Returns (action index, realized reward, expected instant regret). The
    parameter draw and the reward noise come from separate substreams so a
    policy cannot contaminate the environment's randomness.
    """
    idx = policy.choose_action(problem, history, rng.substream("draw"))
    rewards = problem.mean_rewards()
    x = problem.actions[idx]
    noise_sd = math.sqrt(float(problem.noise_variances(x[None, :])[0]))
    reward = float(rewards[idx] + noise_sd * rng.substream("reward").generator().standard_normal())
    regret = float(rewards.max() - rewards[idx])
    return idx, reward, regret


def run_policy(
    problem: BanditProblem, policy: Policy, horizon: int, rng: RngStream
) -> tuple[RegretTrace, Dataset]:
    """Run one policy on one problem, re-solving from scratch each step."""
    if horizon < 1:
        raise ValueError("horizon must be positive")
    xs = np.zeros((0, problem.dim))
    ys = np.zeros(0)
    regrets = np.zeros(horizon)
    for t in range(horizon):
        history = Dataset(xs, ys)
        idx, reward, regret = ts_step(problem, history, policy, rng.substream("step", t))
        xs = np.vstack([xs, problem.actions[idx][None, :]])
        ys = np.append(ys, reward)
        regrets[t] = regret
    return RegretTrace(regrets), Dataset(xs, ys)


@dataclass(frozen=True)
class BanditConfig:
    d: int = 2
    n_actions: int = 4
    horizon: int = DEFAULT_HORIZON
    n_problems: int = DEFAULT_N_PROBLEMS
    prior_variance: float = 1.0

    def __post_init__(self):
        if self.d < 1 or self.n_actions < 2:
            raise ValueError("need d >= 1 and n_actions >= 2")
        if self.horizon < 1 or self.n_problems < 1:
            raise ValueError("horizon and n_problems must be positive")
        if self.prior_variance <= 0.0:
            raise ValueError("prior_variance must be positive")


@dataclass(frozen=True)
class PolicyEvaluation:
    """Cross-problem summary of one policy's regret curves."""

    mean_cumulative: np.ndarray
    std_error: np.ndarray
    final_regrets: np.ndarray

    @property
    def mean_final(self) -> float:
        return float(self.mean_cumulative[-1])


def evaluate(
    config: BanditConfig, policies: Mapping[str, Policy], rng: RngStream
) -> dict[str, PolicyEvaluation]:
    """Paired evaluation: every policy faces the same sampled problems.

    Problem j is drawn from the ("problem", j, "instance") substream, and
    policy ``name`` plays it on the ("problem", j, "policy", name)
    substream, so adding or reordering policies never changes any other
    policy's run.
    """
    if not policies:
        raise ValueError("need at least one policy")
    curves = {name: np.zeros((config.n_problems, config.horizon)) for name in policies}
    for j in range(config.n_problems):
        problem = sample_problem(
            config.d,
            config.n_actions,
            rng.substream("problem", j, "instance"),
            config.prior_variance,
        )
        for name, policy in policies.items():
            trace, _ = run_policy(
                problem, policy, config.horizon, rng.substream("problem", j, "policy", name)
            )
            curves[name][j] = trace.cumulative
    out = {}
    for name, runs in curves.items():
        se = runs.std(axis=0, ddof=1) / math.sqrt(config.n_problems) if config.n_problems > 1 else np.zeros(config.horizon)
        out[name] = PolicyEvaluation(
            mean_cumulative=runs.mean(axis=0),
            std_error=se,
            final_regrets=runs[:, -1].copy(),
        )
    return out


def tune_policy(
    family: str,
    config: BanditConfig,
    grid: Mapping[str, Sequence[float]],
    rng: RngStream,
) -> AgentPolicy:
    """Pick the grid candidate with the smallest mean final regret.

    Family N searches ``grid["lam"]`` only; families P and PW search the
    product of ``grid["lam"]`` and ``grid["anchor_variance"]``; family BP
    has nothing to tune (its single candidate is the posterior-matching
    policy). Ties break toward the earliest candidate. Callers should hand
    this a different stream than the final evaluation uses.
    """
    if family not in BANDIT_FAMILIES:
        raise ValueError(f"family must be one of {BANDIT_FAMILIES}")
    if family == "BP":
        return AgentPolicy.matched()
    lams = list(grid.get("lam", ()))
    if not lams:
        raise ValueError("grid needs at least one lam")
    if family == "N":
        candidates = [AgentPolicy.greedy(lam) for lam in lams]
    else:
        anchors = list(grid.get("anchor_variance", ()))
        if not anchors:
            raise ValueError("grid needs at least one anchor_variance")
        build = AgentPolicy.anchored if family == "P" else AgentPolicy.weighted_anchored
        candidates = [build(lam, av) for lam in lams for av in anchors]
    results = evaluate(
        config,
        {f"candidate-{i}": policy for i, policy in enumerate(candidates)},
        rng.substream("tuning"),
    )
    best = min(range(len(candidates)), key=lambda i: results[f"candidate-{i}"].mean_final)
    return candidates[best]
