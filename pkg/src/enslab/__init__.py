"""enslab: a laboratory for ensemble agents under uncertainty.

The package studies how ensembles of point estimates approximate Bayesian
posteriors, and what that buys in sequential decision problems.  It has six
parts:

- ``numkit``: deterministic random streams, symmetric linear algebra, and
  Gaussian belief arithmetic.
- ``linreg``: exact conjugate posteriors and perturbed-loss ensembles for
  heteroscedastic linear-Gaussian environments, including the spectral
  lower bound on the quality of unperturbed-data ensembles.
- ``metrics``: joint predictive KL and NLL estimators for classifiers,
  including the dyadic input-sampling scheme.
- ``testbed``: a synthetic neural-network classification benchmark with
  additive prior networks and bootstrapped data weights.
- ``bandit``: heteroscedastic linear bandits driven by Thompson sampling
  from ensemble posteriors.
- ``cli``: experiment runner, sweep harness, and report aggregation.
"""

__version__ = "0.1.0"
