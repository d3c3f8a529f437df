"""Synthetic stand-ins for a heavy-hex transmon device's daily metrics.

Magnitudes are representative (readout error ~2%, CNOT error ~1%, T2 ~100 us,
single-qubit error ~3e-4); nothing here is measured data.
"""

from __future__ import annotations

import numpy as np

from .copula import CopulaModel
from .marginals import MarginalDistribution, beta, gamma
from .metrics import CATALOG, MetricClass

__all__ = ["SIGMA_PRESETS", "washington_like_sigma", "washington_like_marginals", "washington_like_model"]


def _beta_from_mean_sd(mean: float, sd: float) -> MarginalDistribution:
    common = mean * (1 - mean) / sd**2 - 1.0
    return beta(mean * common, (1 - mean) * common)


def _gamma_from_mean_sd(mean: float, sd: float) -> MarginalDistribution:
    return gamma((mean / sd) ** 2, sd**2 / mean)


def washington_like_marginals() -> tuple[MarginalDistribution, ...]:
    out = []
    for m in CATALOG:
        r = m.registers[0]
        if m.cls is MetricClass.SPAM:
            out.append(_beta_from_mean_sd(0.985 - 0.003 * r, 0.004 + 0.0005 * r))
        elif m.cls is MetricClass.CNOT:
            out.append(_beta_from_mean_sd(0.991 - 0.002 * (m.index - 4), 0.0015))
        elif m.cls is MetricClass.T2:
            out.append(_gamma_from_mean_sd(110.0 - 8.0 * r, 18.0 + 2.0 * r))
        else:
            out.append(_beta_from_mean_sd(0.99975 - 0.00003 * r, 0.00005))
    return tuple(out)


def washington_like_sigma() -> np.ndarray:
    """Factor-structured correlation: one device-wide factor, one per metric
    class and one per register, plus idiosyncratic noise."""
    class_load = {MetricClass.SPAM: 0.55, MetricClass.CNOT: 0.6, MetricClass.T2: 0.5, MetricClass.HGATE: 0.45}
    classes = list(class_load)
    n_reg = 5
    loadings = np.zeros((len(CATALOG), 1 + len(classes) + n_reg))
    for m in CATALOG:
        loadings[m.index, 0] = 0.3
        loadings[m.index, 1 + classes.index(m.cls)] = class_load[m.cls]
        for r in m.registers:
            loadings[m.index, 1 + len(classes) + r] = 0.35 / np.sqrt(len(m.registers))
    cov = loadings @ loadings.T
    cov[np.diag_indices_from(cov)] = 1.0
    return cov


SIGMA_PRESETS = {
    "identity": lambda: np.eye(len(CATALOG)),
    "washington-like": washington_like_sigma,
}


def washington_like_model(sigma_preset: str = "washington-like", epoch_label: str = "2022-01") -> CopulaModel:
    try:
        sigma = SIGMA_PRESETS[sigma_preset]()
    except KeyError:
        raise ValueError(f"unknown sigma preset {sigma_preset!r}; choose from {sorted(SIGMA_PRESETS)}") from None
    return CopulaModel(washington_like_marginals(), sigma, epoch_label, tuple(m.name for m in CATALOG))
