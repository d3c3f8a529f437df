"""Correlated device-noise models, noisy Bernstein-Vazirani simulation and
Hellinger-distance stability bounds."""

from .copula import CopulaModel, GaussianCopula, hellinger_nd
from .marginals import Family, MarginalDistribution, fit_moments, hellinger_1d
from .stability import ExperimentConfig, hellinger_max, run_experiment, stability_bound

__all__ = [
    "CopulaModel",
    "ExperimentConfig",
    "Family",
    "GaussianCopula",
    "MarginalDistribution",
    "fit_moments",
    "hellinger_1d",
    "hellinger_max",
    "hellinger_nd",
    "run_experiment",
    "stability_bound",
]
__version__ = "0.1.0"
