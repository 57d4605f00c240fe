"""Commuting-gate (Z-diagonal) dilated dynamics and its fast classical sampler.

The system is qubit 0 of an n-qubit register; the circuit is a list of
two-qubit phase gates exp(i * angle * Z_a Z_b) conjugated by full Hadamard
layers.  Splitting the gate list into k segments gives a k-step process.
Because every gate is Z-diagonal, the environment's computational-basis
value is a conserved classical latent variable, which is what makes the
single-qubit Monte Carlo sampler below exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..ensembles import RngStream
from ..instruments import Instrument, comp_basis
from ..linalg import HADAMARD, StateVector, basis_state, kron
from ..process import MAX_DENSE_QUBITS, ProcessSpec, Schedule, as_schedule


@dataclass(frozen=True)
class IqpCircuit:
    """Z-diagonal two-qubit gates on n qubits; qubit 0 is the system."""

    num_qubits: int
    z_diag_gates: tuple  # (qubit_a, qubit_b, angle) triples
    system_index: int = 0

    def __post_init__(self):
        gates = tuple((int(a), int(b), float(t)) for a, b, t in self.z_diag_gates)
        object.__setattr__(self, "z_diag_gates", gates)
        if self.system_index != 0:
            raise ValueError("the system is qubit 0 by convention")
        if self.num_qubits < 2:
            raise ValueError("need at least two qubits")
        for a, b, _ in gates:
            if a == b or not (0 <= a < self.num_qubits and 0 <= b < self.num_qubits):
                raise ValueError(f"invalid gate pair ({a}, {b})")
        if len(gates) > 64 * self.num_qubits**2:
            raise ValueError("gate count exceeds the declared polynomial bound")


def random_iqp_circuit(
    num_qubits: int, num_gates: int, rng: RngStream
) -> IqpCircuit:
    """Uniform random qubit pairs with angles from the pi/8 lattice."""
    g = rng.gen
    gates = []
    for _ in range(num_gates):
        a = int(g.integers(num_qubits))
        b = int(g.integers(num_qubits - 1))
        if b >= a:
            b += 1
        gates.append((a, b, (np.pi / 8) * int(g.integers(1, 16))))
    return IqpCircuit(num_qubits, tuple(gates))


def partition_gates(circuit: IqpCircuit, k: int) -> list:
    """Split the gate list into k contiguous segments, even by position."""
    if k < 1:
        raise ValueError("need k >= 1")
    gates = circuit.z_diag_gates
    bounds = [round(len(gates) * i / k) for i in range(k + 1)]
    return [list(gates[bounds[i] : bounds[i + 1]]) for i in range(k)]


def _segment_diagonal(circuit: IqpCircuit, segment) -> np.ndarray:
    """Diagonal (as a vector of phases) of one segment on the full register."""
    n = circuit.num_qubits
    diag = np.zeros(2**n)
    idx = np.arange(2**n)
    for a, b, angle in segment:
        za = 1.0 - 2.0 * ((idx >> (n - 1 - a)) & 1)
        zb = 1.0 - 2.0 * ((idx >> (n - 1 - b)) & 1)
        diag += angle * za * zb
    return np.exp(1j * diag)


def iqp_process(circuit: IqpCircuit, k: int) -> ProcessSpec:
    """k-step process with Hadamard-conjugated Z-diagonal layers as steps."""
    n = circuit.num_qubits
    if n > MAX_DENSE_QUBITS:
        raise ValueError("dense register capped; use the classical sampler instead")
    hn = kron(*([HADAMARD] * n))
    us = []
    for segment in partition_gates(circuit, k):
        d = _segment_diagonal(circuit, segment)
        us.append(hn @ (d[:, None] * hn))
    return ProcessSpec(
        (0,), tuple(range(1, n)), StateVector(basis_state(n, 0)), tuple(us)
    )


@dataclass(frozen=True)
class DiagonalDecomposition:
    """Two-qubit diagonal split into local phases plus a controlled phase.

    ``gate = (env_phase ⊗ sys_phase) . C[controlled_sys_phase]`` where the
    controlled factor applies a diagonal to the system when the environment
    wire is 1.  Every factor is read off the diagonal, so recomposition is
    exact.
    """

    env_phase: np.ndarray
    sys_phase: np.ndarray
    controlled_sys_phase: np.ndarray

    def recompose(self) -> np.ndarray:
        d = np.empty(4, dtype=complex)
        for e in range(2):
            for b in range(2):
                val = self.env_phase[e] * self.sys_phase[b]
                if e == 1:
                    val *= self.controlled_sys_phase[b]
                d[2 * e + b] = val
        return np.diag(d)


def iqp_decompose(gate: np.ndarray) -> DiagonalDecomposition:
    """Split a two-qubit Z-diagonal gate (wires: env, system) into a
    controlled phase on the system plus single-qubit diagonals."""
    gate = np.asarray(gate, dtype=complex)
    if gate.shape != (4, 4) or np.abs(gate - np.diag(np.diagonal(gate))).max() > 1e-12:
        raise ValueError("gate must be a 4x4 diagonal matrix")
    d = np.diagonal(gate)
    if np.abs(np.abs(d) - 1).max() > 1e-12:
        raise ValueError("gate must be unitary")
    env = np.array([d[0], d[2]])
    sys_ = np.array([1.0, d[1] / d[0]])
    ctrl = np.array([1.0, d[0] * d[3] / (d[1] * d[2])])
    return DiagonalDecomposition(env, sys_, ctrl)


# ---------------------------------------------------------------------------
# Efficient classical sampler
# ---------------------------------------------------------------------------


def _system_couplings(circuit: IqpCircuit, k: int) -> list:
    """Per segment: (env_qubit_indices, angles) of gates touching the system."""
    out = []
    for segment in partition_gates(circuit, k):
        envs, angles = [], []
        for a, b, angle in segment:
            if a == 0:
                envs.append(b - 1)
                angles.append(angle)
            elif b == 0:
                envs.append(a - 1)
                angles.append(angle)
        out.append((np.array(envs, dtype=np.int64), np.array(angles)))
    return out


def iqp_classical_sample_batch(
    circuit: IqpCircuit, k: int, shots: int, rng: RngStream
) -> np.ndarray:
    """Weak simulation of the process under computational-basis instruments.

    Environment bit-strings are drawn uniformly (the conserved latent
    variable); conditioned on a string, each step acts on the system as
    cos(a) I + i sin(a) X with a the signed sum of coupling angles, and the
    single qubit is strongly simulated.  Runtime is O(shots * (k + gates)),
    polynomial in n and k.  Returns outcome bits of shape (shots, k+1).
    """
    n = circuit.num_qubits
    couplings = _system_couplings(circuit, k)
    g = rng.gen
    z = g.random((shots, n - 1)) < 0.5  # uniform environment bit-strings
    signs = 1.0 - 2.0 * z.astype(float)
    alphas = np.empty((k, shots))
    for seg, (envs, angles) in enumerate(couplings):
        if envs.size:
            alphas[seg] = signs[:, envs] @ angles
        else:
            alphas[seg] = 0.0
    bits = np.zeros((shots, k + 1), dtype=np.uint8)
    u = g.random((shots, k + 1))
    a0 = np.zeros(shots, dtype=complex)  # system amplitudes, |0> component
    a1 = np.zeros(shots, dtype=complex)
    a0[:] = 1.0

    def measure(col):
        nonlocal a0, a1
        p0 = (a0 * a0.conj()).real
        p1 = (a1 * a1.conj()).real
        tot = p0 + p1
        take1 = u[:, col] >= p0 / tot
        bits[:, col] = take1
        norm0 = np.sqrt(np.maximum(p0, 1e-300))  # guards the branch not taken
        norm1 = np.sqrt(np.maximum(p1, 1e-300))
        a0 = np.where(take1, 0.0, a0 / norm0)
        a1 = np.where(take1, a1 / norm1, 0.0)

    measure(0)
    for seg in range(k):
        c = np.cos(alphas[seg])
        s = 1j * np.sin(alphas[seg])
        a0, a1 = c * a0 + s * a1, s * a0 + c * a1  # H diag(e^{ia}, e^{-ia}) H
        measure(seg + 1)
    return bits


def iqp_classical_sample(circuit: IqpCircuit, k: int, rng: RngStream) -> tuple:
    """One outcome string (length k+1) from the efficient sampler."""
    return tuple(int(b) for b in iqp_classical_sample_batch(circuit, k, 1, rng)[0])


def iqp_branch_unitaries(circuit: IqpCircuit, k: int, env_bits) -> list:
    """Single-qubit step unitaries conditioned on an environment bit-string."""
    signs = 1.0 - 2.0 * np.asarray(env_bits, dtype=float)
    out = []
    for envs, angles in _system_couplings(circuit, k):
        a = float(signs[envs] @ angles) if envs.size else 0.0
        out.append(
            np.array(
                [[np.cos(a), 1j * np.sin(a)], [1j * np.sin(a), np.cos(a)]],
                dtype=complex,
            )
        )
    return out


def iqp_exact_probability(
    circuit: IqpCircuit, k: int, outcomes, schedule: Schedule | None = None
) -> float:
    """Strong simulation of an outcome string by summing over the 2^(n-1)
    environment branches; exact, exponential only in n."""
    n = circuit.num_qubits
    outcomes = [int(x) for x in outcomes]
    if len(outcomes) != k + 1:
        raise ValueError("need one outcome per time slot")
    policy = as_schedule(schedule if schedule is not None else uniform_comp(k), k)
    total = 0.0
    for z in range(2 ** (n - 1)):
        env_bits = [(z >> (n - 2 - m)) & 1 for m in range(n - 1)]
        us = iqp_branch_unitaries(circuit, k, env_bits)
        psi = np.array([1.0, 0.0], dtype=complex)
        p = 1.0
        for j in range(k + 1):
            if j > 0:
                psi = us[j - 1] @ psi
            cp = policy(j, tuple(outcomes[:j])).outcomes[outcomes[j]]
            imgs = [kk @ psi for kk in cp.kraus_ops]
            w = sum(float(np.vdot(v, v).real) for v in imgs)
            p *= w
            if w == 0.0:
                break
            if len(imgs) > 1:
                raise ValueError("strong simulation supports single-Kraus outcomes only")
            psi = imgs[0] / np.sqrt(w)
        total += p
    return total / 2 ** (n - 1)


def uniform_comp(k: int) -> list:
    """Computational-basis instruments at every one of the k+1 slots."""
    inst = comp_basis(2)
    return [inst] * (k + 1)
