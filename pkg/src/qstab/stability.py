"""Noise-averaged observables, their drift between epochs, and the Hellinger bound.

The bound ties the drift ``s`` of a noise-averaged observable bounded by ``c``
to the Hellinger distance ``H`` between the two noise laws::

    s <= 2 c H sqrt(2 - H**2)

and, inverted for a tolerance ``s_tol``, ``H_max = sqrt(1 - sqrt(1 - s_tol**2 / (4 c**2)))``.
"""

from __future__ import annotations

import datetime as dt
import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ._parallel import ordered_map
from .channels import GateDurations, derive_channels
from .copula import CopulaModel, HellingerProbe, sample
from .marginals import Family, MarginalDistribution
from .qsim import CircuitSpec, build_bv_circuit, expectation, sample_shots, simulate

__all__ = [
    "ExperimentConfig",
    "EpochResult",
    "StabilityReport",
    "observable_samples",
    "mean_observable",
    "stability_metric",
    "hellinger_max",
    "stability_bound",
    "perturb_model",
    "run_experiment",
    "MAX_PERTURB_ATTEMPTS",
]

log = logging.getLogger(__name__)

MAX_PERTURB_ATTEMPTS = 100
SCHEMA_VERSION = 1


def _derived_seed(seed: int, *keys: int) -> int:
    return int(np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(keys)).generate_state(1, np.uint64)[0] >> 1)


def stability_metric(o1: float, o2: float) -> float:
    return abs(o1 - o2)


def hellinger_max(s_tol: float, c: float = 1.0) -> float:
    """Largest Hellinger distance that keeps the drift within ``s_tol``."""
    if c <= 0:
        raise ValueError("c must be positive")
    if s_tol < 0:
        raise ValueError("s_tol must be non-negative")
    phi = s_tol**2 / (4.0 * c**2)
    if phi > 1.0:
        raise ValueError(f"s_tol={s_tol} exceeds 2c={2 * c}; no Hellinger bound exists")
    # 1 - sqrt(1 - phi) == phi / (1 + sqrt(1 - phi)), stable for small phi
    return math.sqrt(phi / (1.0 + math.sqrt(1.0 - phi)))


def stability_bound(h: float, c: float = 1.0) -> float:
    """Worst-case drift ``2 c H sqrt(2 - H^2)`` for Hellinger distance ``h``."""
    if c <= 0:
        raise ValueError("c must be positive")
    if not 0.0 <= h <= 1.0:
        raise ValueError(f"Hellinger distance {h} outside [0, 1]")
    return 2.0 * c * h * math.sqrt(2.0 - h * h)


@dataclass(frozen=True)
class ExperimentConfig:
    s_tol: float = 0.20
    c: float = 1.0
    n_noise_samples_hellinger: int = 100_000
    n_circuit_samples: int = 100
    shots: int = 8192
    months: int = 15
    perturb_step: float = 0.05
    seed: int = 0
    durations: GateDurations = field(default_factory=GateDurations)
    secret: str = "0011"
    perturb_metric: int = 5
    readout_asymmetry: float = 1.0

    def __post_init__(self):
        if self.c <= 0:
            raise ValueError("c must be positive")
        if not 0 < self.s_tol <= 2 * self.c:
            raise ValueError(f"s_tol must lie in (0, 2c] = (0, {2 * self.c}]")
        for name in ("n_noise_samples_hellinger", "n_circuit_samples"):
            if getattr(self, name) < 2:
                raise ValueError(f"{name} must be at least 2")
        if self.shots < 0 or self.months < 0:
            raise ValueError("shots and months must be non-negative")
        if self.perturb_step < 0:
            raise ValueError("perturb_step must be non-negative")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["durations"] = asdict(self.durations)
        return d


@dataclass(frozen=True)
class EpochResult:
    label: str
    hellinger: float
    hellinger_stderr: float
    mean_obs: float
    mean_obs_stderr: float
    stability: float
    stability_stderr: float
    bound: float
    satisfied: bool
    perturbed_marginal: dict | None = None

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


@dataclass(frozen=True)
class StabilityReport:
    config: ExperimentConfig
    baseline: dict
    epochs: tuple[EpochResult, ...]
    hellinger_cap: float
    max_sampled_observable: float

    @property
    def summary(self) -> dict:
        hs = [e.hellinger for e in self.epochs]
        ss = [e.stability for e in self.epochs]
        return {
            "n_epochs": len(self.epochs),
            "hellinger_max_allowed": self.hellinger_cap,
            "max_hellinger": max(hs, default=0.0),
            "max_stability": max(ss, default=0.0),
            "mean_stability": float(np.mean(ss)) if ss else 0.0,
            "violations": sum(not e.satisfied for e in self.epochs),
            "all_satisfied": all(e.satisfied for e in self.epochs),
            "max_sampled_observable": self.max_sampled_observable,
        }

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "config": self.config.to_dict(),
            "baseline": self.baseline,
            "epochs": [e.to_dict() for e in self.epochs],
            "summary": self.summary,
        }


def observable_samples(
    model: CopulaModel,
    circuit: CircuitSpec,
    n: int,
    shots: int,
    seed: int,
    durations: GateDurations | None = None,
    asymmetry: float = 1.0,
) -> np.ndarray:
    """``<O_x>`` for ``n`` parameter draws; shot-estimated when ``shots > 0``."""
    xs = sample(model, n, seed)
    pairs = circuit.cnot_pairs

    def one(i):
        noise = derive_channels(xs[i], durations, cnot_pairs=pairs, asymmetry=asymmetry)
        dist = simulate(circuit, noise)
        if shots <= 0:
            return expectation(dist, circuit.secret)
        counts = sample_shots(dist, shots, _derived_seed(seed, 1, i))
        return counts.get(circuit.secret, 0) / shots

    return np.asarray(ordered_map(one, range(n)), dtype=float)


def mean_observable(
    model: CopulaModel,
    circuit: CircuitSpec,
    n: int,
    shots: int,
    seed: int,
    durations: GateDurations | None = None,
    asymmetry: float = 1.0,
) -> tuple[float, float]:
    """Monte Carlo average of ``<O_x>`` over the noise law and its standard error."""
    vals = observable_samples(model, circuit, n, shots, seed, durations, asymmetry)
    se = float(vals.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return float(vals.mean()), se


def _propose(model, metric, step, h_cap, seed, probe, label):
    marg = model.marginals[metric]
    if marg.family is not Family.BETA:
        raise ValueError(f"perturbed metric x{metric} must have a Beta marginal")
    if step == 0:
        return model.with_marginal(metric, marg, label), (0.0, 0.0)
    rng = np.random.default_rng(seed)
    for attempt in range(MAX_PERTURB_ATTEMPTS):
        eps = rng.uniform(-step, step, size=2)
        a, b = marg.p1 * (1 + eps[0]), marg.p2 * (1 + eps[1])
        if a <= 0 or b <= 0:
            continue
        candidate = model.with_marginal(metric, MarginalDistribution(Family.BETA, a, b), label)
        h, se = probe.distance(candidate)
        if h + se <= h_cap:
            log.debug("accepted perturbation after %d attempt(s): H=%.4g +- %.2g", attempt + 1, h, se)
            return candidate, (h, se)
    raise RuntimeError(
        f"no perturbation within Hellinger cap {h_cap} after {MAX_PERTURB_ATTEMPTS} proposals (step {step})"
    )


def perturb_model(
    model: CopulaModel,
    step: float,
    h_cap: float,
    seed: int,
    metric: int = 5,
    n_hellinger: int = 10_000,
) -> CopulaModel:
    """Randomly rescale one Beta marginal until the joint Hellinger distance
    (point estimate plus one standard error) stays within ``h_cap``.

    Raises ``RuntimeError`` after ``MAX_PERTURB_ATTEMPTS`` rejected proposals.
    """
    if not 0 < h_cap <= 1:
        raise ValueError("h_cap must lie in (0, 1]")
    if step < 0:
        raise ValueError("step must be non-negative")
    probe = HellingerProbe(model, n_hellinger, _derived_seed(seed, 0))
    return _propose(model, metric, step, h_cap, _derived_seed(seed, 1), probe, model.epoch_label)[0]


def _month_labels(baseline_label: str, months: int) -> list[str]:
    try:
        start = dt.datetime.strptime(baseline_label, "%Y-%m")
    except ValueError:
        return [f"epoch-{k}" for k in range(1, months + 1)]
    labels = []
    y, m = start.year, start.month
    for _ in range(months):
        y, m = (y + 1, 1) if m == 12 else (y, m + 1)
        labels.append(f"{y:04d}-{m:02d}")
    return labels


def run_experiment(config: ExperimentConfig, baseline: CopulaModel) -> StabilityReport:
    """Perturb the baseline once per month and compare each epoch against it.

    Every epoch shares the baseline's Hellinger reference draws and the
    observable's noise draws (common random numbers), so the reported drift
    reflects the change in the noise law rather than resampling noise.
    """
    circuit = build_bv_circuit(config.secret)
    h_cap = hellinger_max(config.s_tol, config.c)
    obs_seed = _derived_seed(config.seed, 2)

    def observe(model):
        vals = observable_samples(
            model, circuit, config.n_circuit_samples, config.shots, obs_seed,
            config.durations, config.readout_asymmetry,
        )
        if np.any((vals < 0) | (vals > config.c)):
            raise ValueError(f"sampled observable outside [0, c={config.c}]")
        return vals

    base_vals = observe(baseline)
    n_obs = config.n_circuit_samples
    base_mean = float(base_vals.mean())
    base_se = float(base_vals.std(ddof=1) / math.sqrt(n_obs))
    max_seen = float(base_vals.max())

    epochs = []
    probe = HellingerProbe(baseline, config.n_noise_samples_hellinger, _derived_seed(config.seed, 0)) \
        if config.months else None
    for k, label in enumerate(_month_labels(baseline.epoch_label, config.months), start=1):
        model, (h, h_se) = _propose(
            baseline, config.perturb_metric, config.perturb_step, h_cap,
            _derived_seed(config.seed, 1, k), probe, label,
        )
        vals = observe(model)
        max_seen = max(max_seen, float(vals.max()))
        mean = float(vals.mean())
        se = float(vals.std(ddof=1) / math.sqrt(n_obs))
        s = stability_metric(base_mean, mean)
        epochs.append(
            EpochResult(
                label=label,
                hellinger=h,
                hellinger_stderr=h_se,
                mean_obs=mean,
                mean_obs_stderr=se,
                stability=s,
                stability_stderr=math.hypot(se, base_se),
                bound=stability_bound(h, config.c),
                satisfied=s <= config.s_tol,
                perturbed_marginal=model.marginals[config.perturb_metric].to_dict(),
            )
        )
        log.info("%s: H=%.4f s=%.5f", label, h, s)

    baseline_info = {
        "label": baseline.epoch_label,
        "mean_obs": base_mean,
        "mean_obs_stderr": base_se,
        "model": baseline.to_dict(),
    }
    return StabilityReport(config, baseline_info, tuple(epochs), h_cap, max_seen)
