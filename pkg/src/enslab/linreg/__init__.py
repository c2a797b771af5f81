"""Linear-Gaussian environments, exact posteriors, perturbed-loss ensembles."""

from .environments import (
    Dataset,
    EnvironmentSampler,
    InputSampler,
    LinRegEnvironment,
    NoiseFn,
    axis_inputs,
    constant_noise,
    environment_family,
    gaussian_inputs,
    per_axis_noise,
    quadratic_noise,
    sample_dataset,
    two_region_noise,
)
from .ensembles import (
    FAMILIES,
    EnsembleMemberDraw,
    EnsembleSpec,
    SingularSystem,
    draw_member,
    ensemble_law,
    ensemble_member,
    exact_posterior,
    is_unbiased,
    unit_weights,
    zero_noise,
)
from .snr import (
    SnrSpectrum,
    expected_kl_mc,
    kl_lower_bound,
    matched_anchor_variance,
    snr_spectrum,
)

__all__ = [
    "FAMILIES",
    "Dataset",
    "EnsembleMemberDraw",
    "EnsembleSpec",
    "EnvironmentSampler",
    "InputSampler",
    "LinRegEnvironment",
    "NoiseFn",
    "SingularSystem",
    "SnrSpectrum",
    "axis_inputs",
    "constant_noise",
    "draw_member",
    "ensemble_law",
    "ensemble_member",
    "environment_family",
    "exact_posterior",
    "expected_kl_mc",
    "gaussian_inputs",
    "is_unbiased",
    "kl_lower_bound",
    "matched_anchor_variance",
    "per_axis_noise",
    "quadratic_noise",
    "sample_dataset",
    "snr_spectrum",
    "two_region_noise",
    "unit_weights",
    "zero_noise",
]
