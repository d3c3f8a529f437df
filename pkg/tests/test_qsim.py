import math
from functools import reduce

import numpy as np
import pytest

from qstab.channels import NoiseChannelSet, derive_channels
from qstab.qsim import (
    OutcomeDistribution,
    build_bv_circuit,
    expectation,
    sample_shots,
    simulate,
)

# ---------------------------------------------------------------- dense oracle
# Full 2^N x 2^N matrices built with kron, Kraus sums written out explicitly.

_I = np.eye(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]])
_Z = np.diag([1.0 + 0j, -1.0])
_H = np.array([[1, 1], [1, -1]]) / math.sqrt(2)


def _embed(op, q, n):
    return reduce(np.kron, [op if k == q else _I for k in range(n)])


def _cnot_full(c, t, n):
    dim = 2**n
    m = np.zeros((dim, dim))
    for b in range(dim):
        bits = [(b >> (n - 1 - k)) & 1 for k in range(n)]
        if bits[c]:
            bits[t] ^= 1
        m[int("".join(map(str, bits)), 2), b] = 1
    return m


def _kraus(rho, ops):
    return sum(k @ rho @ k.conj().T for k in ops)


def dense_oracle(secret, noise):
    nd = len(secret)
    n = nd + 1
    rho = np.zeros((2**n, 2**n), dtype=complex)
    rho[0, 0] = 1

    def dephase(rho, q, cls):
        p = noise.dephasing.get((q, cls), 0.0)
        return _kraus(rho, [math.sqrt(1 - p) * _embed(_I, q, n), math.sqrt(p) * _embed(_Z, q, n)])

    def had(rho, q):
        u = _embed(_H, q, n)
        rho = u @ rho @ u.conj().T
        th = noise.h_phase.get(q, 0.0)
        rzf = _embed(np.diag([np.exp(-0.5j * th), np.exp(0.5j * th)]), q, n)
        rho = rzf @ rho @ rzf.conj().T
        return dephase(rho, q, "1q")

    rho = had(rho, nd)
    zf = _embed(_Z, nd, n)
    rho = dephase(zf @ rho @ zf.conj().T, nd, "1q")
    for q in range(nd):
        rho = had(rho, q)
    for q in range(nd):
        if secret[q] == "1":
            cx = _cnot_full(q, nd, n)
            rho = cx @ rho @ cx.T
            p = noise.cnot_depol[(q, nd)]
            for r in (q, nd):
                rho = _kraus(
                    rho,
                    [math.sqrt(1 - p) * _embed(_I, r, n)]
                    + [math.sqrt(p / 3) * _embed(P, r, n) for P in (_X, _Y, _Z)],
                )
            for r in (q, nd):
                rho = dephase(rho, r, "2q")
    for q in range(nd):
        rho = had(rho, q)
    probs = np.real(np.diag(rho)).reshape(2**nd, 2).sum(axis=1)
    # classical readout matrix as a kron of per-register 2x2 stochastic maps
    mats = []
    for q in range(nd):
        p01, p10 = noise.spam_flip.get(q, (0.0, 0.0))
        mats.append(np.array([[1 - p01, p10], [p01, 1 - p10]]))
    return reduce(np.kron, mats) @ probs


# ---------------------------------------------------------------- circuit


def test_circuit_cnot_counts():
    assert len(build_bv_circuit("0000").cnot_pairs) == 0
    assert build_bv_circuit("0011").cnot_pairs == ((2, 4), (3, 4))
    assert len(build_bv_circuit("1111").cnot_pairs) == 4


def test_circuit_structure():
    c = build_bv_circuit("101")
    assert c.gates[:2] == (("h", (3,)), ("z", (3,)))
    assert c.measured == (0, 1, 2)
    assert c.gates[-1] == ("measure", (0, 1, 2))
    assert c.n_qubits == 4


@pytest.mark.parametrize("secret", ["", "012", "1" * 9])
def test_circuit_rejects_bad_secrets(secret):
    with pytest.raises(ValueError):
        build_bv_circuit(secret)


# ---------------------------------------------------------------- simulate


def test_noiseless_delta():
    dist = simulate(build_bv_circuit("0011"))
    assert dist.as_dict(1e-12) == {"0011": pytest.approx(1.0, abs=1e-12)}
    assert expectation(dist, "0011") == pytest.approx(1.0, abs=1e-10)


def test_noiseless_random_secrets():
    rng = np.random.default_rng(0)
    for _ in range(20):
        n = int(rng.integers(2, 7))
        secret = "".join(rng.choice(["0", "1"], size=n))
        assert expectation(simulate(build_bv_circuit(secret), check=True), secret) == pytest.approx(1.0, abs=1e-10)


def test_spam_flip_register_zero():
    noise = NoiseChannelSet(spam_flip={0: (1.0, 1.0)}, cnot_depol={(2, 4): 0.0, (3, 4): 0.0})
    dist = simulate(build_bv_circuit("0011"), noise)
    assert dist["1011"] == pytest.approx(1.0)


def test_full_cnot_depolarizing_against_dense_oracle():
    noise = NoiseChannelSet(cnot_depol={(2, 4): 0.75, (3, 4): 0.75})
    circuit = build_bv_circuit("0011")
    got = simulate(circuit, noise, check=True)
    want = dense_oracle("0011", noise)
    np.testing.assert_allclose(got.probs, want, atol=1e-12)
    assert expectation(got, "0011") < 1.0
    assert expectation(got, "0011") == pytest.approx(want[0b0011], abs=1e-12)


@pytest.mark.parametrize("secret", ["0011", "1011", "0110"])
def test_random_noise_against_dense_oracle(secret, washington):
    from qstab.copula import sample

    circuit = build_bv_circuit(secret)
    rng = np.random.default_rng(5)
    for x in sample(washington, 3, seed=int(rng.integers(1000))):
        # exaggerate the noise so every channel matters
        x = x.copy()
        x[[0, 1, 2, 3, 4, 5, 11, 12, 13, 14, 15]] -= 0.08
        x[6:11] *= 0.01
        noise = derive_channels(x, cnot_pairs=circuit.cnot_pairs, asymmetry=2.0)
        np.testing.assert_allclose(simulate(circuit, noise, check=True).probs, dense_oracle(secret, noise), atol=1e-12)


def test_missing_cnot_parameter():
    with pytest.raises(ValueError, match="CNOT"):
        simulate(build_bv_circuit("0011"), NoiseChannelSet(cnot_depol={(2, 4): 0.0}))


def test_noiseless_dominates_noisy(washington):
    from qstab.copula import sample

    circuit = build_bv_circuit("0011")
    ideal = expectation(simulate(circuit), "0011")
    for x in sample(washington, 20, seed=2):
        value = expectation(simulate(circuit, derive_channels(x, cnot_pairs=circuit.cnot_pairs)), "0011")
        assert 0.0 <= value <= ideal


# ---------------------------------------------------------------- outcomes


def test_expectation_examples():
    assert expectation(OutcomeDistribution.from_dict({"0011": 1.0}), "0011") == 1.0
    uniform = OutcomeDistribution(np.full(16, 1 / 16), 4)
    assert expectation(uniform, "0101") == pytest.approx(1 / 16)
    mixed = OutcomeDistribution.from_dict({"0011": 0.9, "0000": 0.1})
    assert expectation(mixed, "0011") == pytest.approx(0.9)


def test_shots_delta():
    counts = sample_shots(OutcomeDistribution.from_dict({"0011": 1.0, "0000": 0.0}), 8192, seed=1)
    assert counts == {"0011": 8192}


def test_shots_binomial_spread_and_determinism():
    dist = OutcomeDistribution(np.array([0.5, 0.5]), 1)
    counts = sample_shots(dist, 100_000, seed=4)
    assert sum(counts.values()) == 100_000
    assert abs(counts["0"] - 50_000) <= 3 * math.sqrt(0.25 * 100_000)
    assert sample_shots(dist, 1000, seed=9) == sample_shots(dist, 1000, seed=9)
    with pytest.raises(ValueError):
        sample_shots(dist, 0, seed=0)
