"""Noise channels driven by one sampled vector of device metrics.

Units: T2 values are in microseconds, gate durations in nanoseconds.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .density import DensityMatrix, X, Y, Z, rz
from .metrics import CATALOG, MetricClass, N_METRICS

__all__ = [
    "GateDurations",
    "NoiseChannelSet",
    "DEFAULT_CNOT_PAIRS",
    "derive_channels",
    "dephasing_probability",
    "apply_depolarizing",
    "apply_phase_flip",
    "apply_coherent_phase",
    "apply_readout_flip",
]

# logical CNOTs of the 4-bit BV circuit with secret 0011
DEFAULT_CNOT_PAIRS = ((2, 4), (3, 4))
_CNOT_METRICS = tuple(m.index for m in CATALOG if m.cls is MetricClass.CNOT)
_PROB_TOL = 1e-12


@dataclass(frozen=True)
class GateDurations:
    single_qubit_ns: float = 35.0
    two_qubit_ns: float = 300.0

    def __post_init__(self):
        if not (self.single_qubit_ns > 0 and self.two_qubit_ns > 0):
            raise ValueError("gate durations must be positive")

    def for_class(self, gate_class: str) -> float:
        return self.single_qubit_ns if gate_class == "1q" else self.two_qubit_ns


@dataclass(frozen=True)
class NoiseChannelSet:
    """Concrete channel parameters.

    ``spam_flip`` maps register -> (p(0->1), p(1->0)); ``cnot_depol`` maps a
    logical (control, target) pair -> per-qubit depolarizing probability;
    ``h_phase`` maps register -> Rz angle after each Hadamard; ``dephasing``
    maps (register, "1q" | "2q") -> Z-flip probability after a gate.
    Registers absent from a map are noiseless.
    """

    spam_flip: dict = field(default_factory=dict)
    cnot_depol: dict = field(default_factory=dict)
    h_phase: dict = field(default_factory=dict)
    dephasing: dict = field(default_factory=dict)

    @classmethod
    def noiseless(cls, cnot_pairs=()) -> "NoiseChannelSet":
        return cls(cnot_depol={tuple(p): 0.0 for p in cnot_pairs})

    def is_identity(self) -> bool:
        values = [v for pair in self.spam_flip.values() for v in pair]
        values += [*self.cnot_depol.values(), *self.h_phase.values(), *self.dephasing.values()]
        return all(v == 0 for v in values)


def dephasing_probability(t_ns: float, t2_us: float) -> float:
    """Z-flip probability giving coherence decay ``exp(-t / T2)``."""
    if t_ns < 0:
        raise ValueError("gate time must be non-negative")
    if math.isinf(t2_us):
        return 0.0
    if t2_us <= 0:
        raise ValueError("T2 must be positive")
    return -0.5 * math.expm1(-t_ns / (1000.0 * t2_us))


def _check_prob(name: str, p: float, upper: float = 1.0) -> float:
    if not (-_PROB_TOL <= p <= upper + _PROB_TOL) or math.isnan(p):
        raise ValueError(f"derived {name} = {p!r} is outside [0, {upper}]")
    return min(max(float(p), 0.0), upper)


def derive_channels(
    x,
    durations: GateDurations | None = None,
    cnot_pairs=DEFAULT_CNOT_PAIRS,
    cnot_metrics=None,
    asymmetry: float = 1.0,
) -> NoiseChannelSet:
    """Translate a 16-vector of metrics into channel parameters.

    Parameters
    ----------
    x : array-like of shape (16,)
        Fidelities for SPAM, CNOT and H metrics; T2 in microseconds.
    durations : GateDurations, optional
    cnot_pairs : sequence of (control, target)
        Logical CNOTs in circuit order.
    cnot_metrics : dict, optional
        Explicit ``pair -> metric index`` map.  By default the CNOT metrics are
        dealt out in circuit order (x4, x5, x4, ...).
    asymmetry : float
        Ratio p(0->1) / p(1->0) for readout flips; 1 is symmetric.
    """
    x = np.asarray(x, dtype=float).ravel()
    if x.size != N_METRICS:
        raise ValueError(f"expected {N_METRICS} metric values, got {x.size}")
    if asymmetry <= 0:
        raise ValueError("asymmetry ratio must be positive")
    durations = durations or GateDurations()
    if cnot_metrics is None:
        cnot_metrics = {tuple(p): _CNOT_METRICS[i % len(_CNOT_METRICS)] for i, p in enumerate(cnot_pairs)}

    spam, hphase, deph = {}, {}, {}
    for m in CATALOG:
        v = x[m.index]
        if m.cls is MetricClass.SPAM:
            err = 1.0 - v
            p01 = _check_prob(f"readout flip x{m.index}", err * 2.0 * asymmetry / (1.0 + asymmetry))
            p10 = _check_prob(f"readout flip x{m.index}", err * 2.0 / (1.0 + asymmetry))
            spam[m.registers[0]] = (p01, p10)
        elif m.cls is MetricClass.HGATE:
            f = _check_prob(f"H fidelity x{m.index}", v)
            hphase[m.registers[0]] = 2.0 * math.acos(math.sqrt(f))
        elif m.cls is MetricClass.T2:
            if not v > 0:
                raise ValueError(f"T2 value x{m.index} = {v!r} must be positive")
            for gc in ("1q", "2q"):
                deph[(m.registers[0], gc)] = dephasing_probability(durations.for_class(gc), v)

    depol = {}
    for pair, idx in cnot_metrics.items():
        f = _check_prob(f"CNOT fidelity x{idx}", x[idx])
        depol[tuple(pair)] = _check_prob(f"depolarizing probability x{idx}", 1.0 - math.sqrt(f))

    return NoiseChannelSet(spam_flip=spam, cnot_depol=depol, h_phase=hphase, dephasing=deph)


def apply_depolarizing(rho: DensityMatrix, target: int, p: float) -> DensityMatrix:
    """``(1-p) rho + p/3 (X rho X + Y rho Y + Z rho Z)`` on one register."""
    if p == 0:
        return rho
    q = (target,)
    return rho.mix([(1.0 - p, None, q), (p / 3, X, q), (p / 3, Y, q), (p / 3, Z, q)])


def apply_phase_flip(rho: DensityMatrix, target: int, p_z: float) -> DensityMatrix:
    if p_z > 0.5:
        warnings.warn(f"phase-flip probability {p_z} exceeds 1/2", RuntimeWarning, stacklevel=2)
    if p_z == 0:
        return rho
    q = (target,)
    return rho.mix([(1.0 - p_z, None, q), (p_z, Z, q)])


def apply_coherent_phase(rho: DensityMatrix, target: int, theta: float) -> DensityMatrix:
    if theta == 0:
        return rho
    return rho.apply(rz(theta), (target,))


def apply_readout_flip(dist, flip_probs) -> np.ndarray:
    """Flip each register's measured bit independently.

    ``dist`` is a probability vector over ``2**n`` bitstrings (register 0 is
    the most significant bit).  ``flip_probs`` is a sequence or dict indexed by
    register, holding either one probability or a ``(p(0->1), p(1->0))`` pair.
    """
    dist = np.asarray(dist, dtype=float)
    n = int(round(math.log2(dist.size)))
    if 2**n != dist.size:
        raise ValueError("distribution length must be a power of two")
    items = flip_probs.items() if isinstance(flip_probs, dict) else enumerate(flip_probs)
    t = dist.reshape((2,) * n) if n else dist
    for reg, p in items:
        if reg >= n:
            continue
        p01, p10 = (p, p) if np.isscalar(p) else p
        if p01 == 0 and p10 == 0:
            continue
        channel = np.array([[1.0 - p01, p10], [p01, 1.0 - p10]])
        t = np.moveaxis(np.tensordot(channel, t, axes=([1], [reg])), 0, reg)
    return t.reshape(-1)
