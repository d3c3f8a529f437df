"""Dense n-qubit density matrices with local operator application.

Register 0 is the most significant bit of the basis index, so bitstrings print
register 0 leftmost.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["DensityMatrix", "I2", "X", "Y", "Z", "H", "rz", "CNOT"]

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2.0)
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


def rz(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    data: np.ndarray
    n_qubits: int

    def __post_init__(self):
        dim = 2**self.n_qubits
        if self.data.shape != (dim, dim):
            raise ValueError(f"expected a {dim}x{dim} matrix for {self.n_qubits} qubits")

    @classmethod
    def zero(cls, n_qubits: int) -> "DensityMatrix":
        rho = np.zeros((2**n_qubits, 2**n_qubits), dtype=complex)
        rho[0, 0] = 1.0
        return cls(rho, n_qubits)

    @classmethod
    def from_statevector(cls, psi) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=complex).ravel()
        psi = psi / np.linalg.norm(psi)
        n = int(round(np.log2(psi.size)))
        return cls(np.outer(psi, psi.conj()), n)

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    def trace(self) -> complex:
        return complex(np.trace(self.data))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(0.5 * (self.data + self.data.conj().T)).min())

    def hermiticity_error(self) -> float:
        return float(np.abs(self.data - self.data.conj().T).max())

    def is_valid(self, atol: float = 1e-12, psd_tol: float = 1e-10) -> bool:
        return (
            abs(self.trace() - 1.0) <= atol
            and self.hermiticity_error() <= atol
            and self.min_eigenvalue() >= -psd_tol
        )

    def probabilities(self) -> np.ndarray:
        return np.clip(np.real(np.diag(self.data)), 0.0, None)

    def apply(self, op: np.ndarray, qubits) -> "DensityMatrix":
        """Conjugate by the local operator ``op`` acting on ``qubits`` (in order)."""
        return DensityMatrix(_conjugate(self.data, op, tuple(qubits), self.n_qubits), self.n_qubits)

    def mix(self, terms) -> "DensityMatrix":
        """Pauli-style mixture ``sum_k w_k A_k rho A_k^dag`` for ``(w_k, A_k, qubits_k)`` terms."""
        out = np.zeros_like(self.data)
        for weight, op, qubits in terms:
            if weight == 0:
                continue
            out += weight * (self.data if op is None else _conjugate(self.data, op, tuple(qubits), self.n_qubits))
        return DensityMatrix(out, self.n_qubits)


def _conjugate(rho: np.ndarray, op: np.ndarray, qubits: tuple[int, ...], n: int) -> np.ndarray:
    k = len(qubits)
    t = rho.reshape((2,) * (2 * n))
    opt = op.reshape((2,) * (2 * k))
    ins = tuple(range(k, 2 * k))
    # rows: op @ rho
    t = np.tensordot(opt, t, axes=(ins, qubits))
    t = np.moveaxis(t, tuple(range(k)), qubits)
    # columns: rho @ op^dag
    cols = tuple(n + q for q in qubits)
    t = np.tensordot(t, opt.conj(), axes=(cols, ins))
    t = np.moveaxis(t, tuple(range(2 * n - k, 2 * n)), cols)
    return t.reshape(2**n, 2**n)
