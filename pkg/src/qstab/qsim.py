"""Exact density-matrix simulation of the Bernstein-Vazirani circuit."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import (
    NoiseChannelSet,
    apply_coherent_phase,
    apply_depolarizing,
    apply_phase_flip,
    apply_readout_flip,
)
from .density import CNOT, H, Z, DensityMatrix

__all__ = [
    "CircuitSpec",
    "OutcomeDistribution",
    "build_bv_circuit",
    "simulate",
    "expectation",
    "sample_shots",
    "MAX_SECRET_BITS",
]

MAX_SECRET_BITS = 8
_UNITARIES = {"h": H, "z": Z, "cx": CNOT}


@dataclass(frozen=True)
class CircuitSpec:
    secret: str
    gates: tuple[tuple[str, tuple[int, ...]], ...]

    @property
    def n_data(self) -> int:
        return len(self.secret)

    @property
    def n_qubits(self) -> int:
        return self.n_data + 1

    @property
    def ancilla(self) -> int:
        return self.n_data

    @property
    def cnot_pairs(self) -> tuple[tuple[int, int], ...]:
        return tuple(q for name, q in self.gates if name == "cx")

    @property
    def measured(self) -> tuple[int, ...]:
        return next(q for name, q in self.gates if name == "measure")


@dataclass(frozen=True, eq=False)
class OutcomeDistribution:
    """Probabilities over data-register bitstrings, register 0 leftmost."""

    probs: np.ndarray
    n_bits: int

    def __getitem__(self, bitstring: str) -> float:
        return float(self.probs[int(bitstring, 2)])

    def as_dict(self, tol: float = 0.0) -> dict[str, float]:
        return {
            format(i, f"0{self.n_bits}b"): float(p) for i, p in enumerate(self.probs) if p > tol
        }

    @classmethod
    def from_dict(cls, probs: dict[str, float]) -> "OutcomeDistribution":
        n = len(next(iter(probs)))
        arr = np.zeros(2**n)
        for k, v in probs.items():
            arr[int(k, 2)] = v
        return cls(arr, n)


def _check_secret(secret: str) -> str:
    secret = str(secret)
    if not secret:
        raise ValueError("secret must be a non-empty bitstring")
    if set(secret) - {"0", "1"}:
        raise ValueError(f"secret {secret!r} is not a bitstring")
    if len(secret) > MAX_SECRET_BITS:
        raise ValueError(f"secret longer than {MAX_SECRET_BITS} bits exceeds the simulator cap")
    return secret


def build_bv_circuit(secret: str) -> CircuitSpec:
    """Ancilla to |->, Hadamards, one CNOT per set bit, Hadamards, measure data."""
    secret = _check_secret(secret)
    n = len(secret)
    data = tuple(range(n))
    gates = [("h", (n,)), ("z", (n,))]
    gates += [("h", (i,)) for i in data]
    gates += [("cx", (i, n)) for i in data if secret[i] == "1"]
    gates += [("h", (i,)) for i in data]
    gates.append(("measure", data))
    return CircuitSpec(secret, tuple(gates))


def _gate_noise(rho: DensityMatrix, name: str, qubits, noise: NoiseChannelSet) -> DensityMatrix:
    if name == "h":
        rho = apply_coherent_phase(rho, qubits[0], noise.h_phase.get(qubits[0], 0.0))
    elif name == "cx":
        try:
            p = noise.cnot_depol[tuple(qubits)]
        except KeyError:
            raise ValueError(f"no depolarizing parameter for CNOT {tuple(qubits)}") from None
        for q in qubits:
            rho = apply_depolarizing(rho, q, p)
    gate_class = "2q" if len(qubits) == 2 else "1q"
    for q in qubits:
        rho = apply_phase_flip(rho, q, noise.dephasing.get((q, gate_class), 0.0))
    return rho


def simulate(circuit: CircuitSpec, noise: NoiseChannelSet | None = None, check: bool = False) -> OutcomeDistribution:
    """Evolve the circuit exactly and return the readout distribution.

    With ``check=True`` the state is validated after every gate and its noise.
    """
    noise = noise if noise is not None else NoiseChannelSet.noiseless(circuit.cnot_pairs)
    rho = DensityMatrix.zero(circuit.n_qubits)
    for name, qubits in circuit.gates:
        if name == "measure":
            continue
        rho = rho.apply(_UNITARIES[name], qubits)
        rho = _gate_noise(rho, name, qubits, noise)
        if check and not rho.is_valid():
            raise AssertionError(f"invalid state after {name}{qubits}")
    # ancilla is the least significant qubit; trace it out
    probs = rho.probabilities().reshape(2**circuit.n_data, 2).sum(axis=1)
    probs = apply_readout_flip(probs, {r: noise.spam_flip[r] for r in circuit.measured if r in noise.spam_flip})
    probs = np.clip(probs, 0.0, None)
    return OutcomeDistribution(probs / probs.sum(), circuit.n_data)


def expectation(dist: OutcomeDistribution, secret: str) -> float:
    """Success probability, i.e. the expectation of the projector onto ``secret``."""
    return dist[secret]


def sample_shots(dist: OutcomeDistribution, shots: int, seed: int) -> dict[str, int]:
    if shots < 1:
        raise ValueError("shots must be at least 1")
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(shots, dist.probs)
    return {format(i, f"0{dist.n_bits}b"): int(c) for i, c in enumerate(counts) if c}
