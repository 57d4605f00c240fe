"""Partial-SWAP extraction: pulling environment amplitude onto the system.

pswap(theta) = exp(-i*(theta/2)*(XX + YY + ZZ)) acting on (environment,
system).  Repeated rounds of feeding |0> into the system, applying the gate
and measuring drive the environment to |0> at a rate set by cos(theta):
after k rounds Pr[env = |0>] = 1 - |beta|^2 * cos(theta)^(2k).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..ensembles import RngStream
from ..linalg import (
    CNOT,
    HADAMARD,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    S_GATE,
    StateVector,
    dagger,
    expm_hermitian,
    identity,
    kron,
)

_HEISENBERG = kron(PAULI_X, PAULI_X) + kron(PAULI_Y, PAULI_Y) + kron(PAULI_Z, PAULI_Z)


def pswap_gate(theta: float) -> np.ndarray:
    """exp(-i*(theta/2)*(XX + YY + ZZ)) on two qubits."""
    return expm_hermitian(_HEISENBERG, theta / 2)


@dataclass(frozen=True)
class Gate:
    """Circuit element on wires (0 = environment, 1 = system)."""

    name: str
    qubits: tuple
    matrix: np.ndarray
    clifford: bool


def _one_qubit(name: str, wire: int, m: np.ndarray, clifford: bool) -> Gate:
    full = kron(m, identity(2)) if wire == 0 else kron(identity(2), m)
    return Gate(name, (wire,), full, clifford)


def _rz(theta: float) -> np.ndarray:
    return np.diag([np.exp(-1j * theta / 2), np.exp(1j * theta / 2)]).astype(complex)


def pswap_decompose(theta: float) -> list:
    """Clifford + three Rz(theta) realization of the partial SWAP.

    The generator splits into commuting XX, YY, ZZ factors; each one is the
    ZZ interaction conjugated by single-qubit Cliffords, and the ZZ
    interaction itself is CNOT . (Rz on the target) . CNOT with the target
    on the system wire.  Gates are listed first-applied first; the three
    non-Clifford Rz(theta) all act on the system, and for theta = pi/4 they
    are T gates up to global phase.
    """
    gates: list = []

    def zz_core():
        gates.append(Gate("cnot", (0, 1), CNOT, True))
        gates.append(_one_qubit("rz", 1, _rz(theta), False))
        gates.append(Gate("cnot", (0, 1), CNOT, True))

    # ZZ factor
    zz_core()
    # XX factor: conjugate by H on both wires
    for w in (0, 1):
        gates.append(_one_qubit("h", w, HADAMARD, True))
    zz_core()
    for w in (0, 1):
        gates.append(_one_qubit("h", w, HADAMARD, True))
    # YY factor: Y = (S H) Z (S H)^dag, so conjugate by H S^dag ... S H
    for w in (0, 1):
        gates.append(_one_qubit("sdg", w, dagger(S_GATE), True))
        gates.append(_one_qubit("h", w, HADAMARD, True))
    zz_core()
    for w in (0, 1):
        gates.append(_one_qubit("h", w, HADAMARD, True))
        gates.append(_one_qubit("s", w, S_GATE, True))
    return gates


def recompose(gates) -> np.ndarray:
    """Matrix product of a gate list (first-applied first)."""
    out = identity(4)
    for g in gates:
        out = g.matrix @ out
    return out


@dataclass(frozen=True)
class PswapExperiment:
    """Repeated feed-|0>/pswap/measure rounds against a one-qubit environment."""

    theta: float
    k: int
    env_state: StateVector

    def __post_init__(self):
        if not 0 < self.theta <= np.pi:
            raise ValueError("theta must lie in (0, pi]")
        if self.k < 1:
            raise ValueError("need k >= 1")
        if self.env_state.num_qubits != 1:
            raise ValueError("the reduction analyses a single environment qubit")

    def closed_form_ground_probability(self) -> float:
        beta2 = float(abs(self.env_state.amplitudes[1]) ** 2)
        return 1.0 - beta2 * np.cos(self.theta) ** (2 * self.k)


@dataclass(frozen=True)
class PswapResult:
    exact_prob: float
    empirical_prob: float
    system_bits: np.ndarray  # (shots, k)
    env_bits: np.ndarray  # (shots,)


def pswap_extraction(exp: PswapExperiment, rng: RngStream, shots: int = 10_000) -> PswapResult:
    """Simulate the extraction rounds; exact and sampled ground probability.

    The exact value comes from density-matrix evolution (measure-and-discard
    is a partial trace); the empirical value from per-shot trajectories with
    a final environment measurement.
    """
    p = pswap_gate(exp.theta)
    e0 = np.array([1, 0], dtype=complex)

    # exact: env density through k rounds, wires ordered (env, ancilla)
    rho = np.outer(exp.env_state.amplitudes, exp.env_state.amplitudes.conj())
    for _ in range(exp.k):
        joint = p @ kron(rho, np.outer(e0, e0)) @ dagger(p)
        rho = joint.reshape(2, 2, 2, 2)
        rho = np.einsum("eafa->ef", rho)
    exact = float(rho[0, 0].real)

    # sampled trajectories, batched over shots; state (4, shots) on (env, anc)
    g = rng.gen
    env = np.repeat(exp.env_state.amplitudes[:, None], shots, axis=1)
    bits = np.zeros((shots, exp.k), dtype=np.uint8)
    for r in range(exp.k):
        v = np.zeros((4, shots), dtype=complex)
        v[0] = env[0]
        v[2] = env[1]
        v = p @ v
        p0 = (np.abs(v[0]) ** 2 + np.abs(v[2]) ** 2).real
        take1 = g.random(shots) >= p0
        bits[:, r] = take1
        env = np.where(take1[None, :], v[(1, 3), :], v[(0, 2), :])
        norm = np.sqrt(np.maximum(np.where(take1, 1 - p0, p0), 1e-300))
        env = env / norm[None, :]
    p_env0 = np.abs(env[0]) ** 2
    env_bits = (g.random(shots) >= p_env0).astype(np.uint8)
    return PswapResult(exact, float(np.mean(env_bits == 0)), bits, env_bits)
