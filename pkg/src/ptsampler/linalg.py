"""Dense complex linear algebra for multi-qubit registers.

Conventions used throughout the package:

* Qubit 0 is the *most significant* bit of a computational-basis index, so
  a basis state ``|b_0 b_1 ... b_{n-1}>`` has index ``sum(b_i << (n-1-i))``.
* States are 1-D complex ndarrays of length ``2**n``; operators are square
  2-D complex ndarrays.

All functions are pure; nothing here keeps mutable state.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

# Tolerances shared across the package.
ATOL_UNITARY = 1e-10
ATOL_HERMITIAN = 1e-10
ATOL_TRACE = 1e-10
EIG_FLOOR = -1e-8  # positivity floor tolerating roundoff in Choi operators

# Positivity is verified at construction only up to this dimension; above it
# the eigensolve cost dominates everything else and callers check on demand.
_POSITIVITY_CHECK_MAX_DIM = 1 << 10

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S_GATE = np.diag([1, 1j]).astype(complex)
T_GATE = np.diag([1, np.exp(1j * np.pi / 4)]).astype(complex)
CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)
SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)

KET_PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)
KET_MINUS = np.array([1, -1], dtype=complex) / np.sqrt(2)


def identity(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=complex)


def basis_state(num_qubits: int, index: int) -> np.ndarray:
    """Computational basis vector ``|index>`` on `num_qubits` qubits."""
    psi = np.zeros(2**num_qubits, dtype=complex)
    psi[index] = 1.0
    return psi


def dagger(m: np.ndarray) -> np.ndarray:
    return m.conj().T


def kron(*operands: np.ndarray) -> np.ndarray:
    """Kronecker product of one or more matrices or vectors (left to right)."""
    if not operands:
        raise ValueError("kron needs at least one operand")
    for op in operands:
        if not np.all(np.isfinite(op)):
            raise ValueError("kron operand contains non-finite entries")
    return reduce(np.kron, operands)


def is_hermitian(m: np.ndarray, atol: float = ATOL_HERMITIAN) -> bool:
    return m.shape[0] == m.shape[1] and np.abs(m - m.conj().T).max() <= atol


def is_unitary(m: np.ndarray, atol: float = ATOL_UNITARY) -> bool:
    if m.shape[0] != m.shape[1]:
        return False
    return np.abs(m.conj().T @ m - np.eye(m.shape[0])).max() <= atol


def expm_hermitian(h: np.ndarray, t: float = 1.0) -> np.ndarray:
    """exp(-i*h*t) for Hermitian `h` via eigendecomposition.

    `t` is the dimensionless phase (time times energy scale).  Raises
    ValueError if `h` is not Hermitian within tolerance.
    """
    if not is_hermitian(h):
        raise ValueError("expm_hermitian requires a Hermitian matrix")
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def _num_qubits_of(dim: int) -> int:
    n = dim.bit_length() - 1
    if 2**n != dim or n < 0:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n


@dataclass(frozen=True)
class StateVector:
    """Pure state of a labeled multi-qubit register (unit norm)."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex)
        object.__setattr__(self, "amplitudes", amp)
        if amp.ndim != 1:
            raise ValueError("amplitudes must be a 1-D array")
        _num_qubits_of(amp.shape[0])
        if not np.all(np.isfinite(amp)):
            raise ValueError("amplitudes contain non-finite entries")
        norm = np.linalg.norm(amp)
        if abs(norm - 1.0) > ATOL_TRACE:
            raise ValueError(f"state norm {norm} deviates from 1 beyond 1e-10")

    @property
    def num_qubits(self) -> int:
        return _num_qubits_of(self.amplitudes.shape[0])

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def density(self) -> "DensityOperator":
        return DensityOperator(np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True)
class DensityOperator:
    """Mixed state: Hermitian, unit trace, positive within roundoff.

    Positivity (eigenvalue floor -1e-8) is checked at construction for
    dimensions up to 1024 and available via :meth:`min_eigenvalue` above that.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", m)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("density matrix must be square")
        _num_qubits_of(m.shape[0])
        if not is_hermitian(m):
            raise ValueError("density matrix is not Hermitian within 1e-10")
        tr = np.trace(m)
        if abs(tr - 1.0) > ATOL_TRACE:
            raise ValueError(f"density matrix trace {tr} deviates from 1")
        if m.shape[0] <= _POSITIVITY_CHECK_MAX_DIM:
            lo = float(np.linalg.eigvalsh(m)[0])
            if lo < EIG_FLOOR:
                raise ValueError(f"density matrix has eigenvalue {lo} < -1e-8")

    @property
    def num_qubits(self) -> int:
        return _num_qubits_of(self.matrix.shape[0])

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix)[0])


def partial_trace_matrix(mat: np.ndarray, keep: Iterable[int], num_qubits: int) -> np.ndarray:
    """Partial trace of a raw density-like matrix, keeping `keep` qubits.

    The kept qubits retain their relative order (qubit 0 = MSB).
    """
    keep = sorted(set(int(q) for q in keep))
    if not keep:
        raise ValueError("keep must be a nonempty set of qubit indices")
    if keep[0] < 0 or keep[-1] >= num_qubits:
        raise ValueError(f"keep indices {keep} out of range for {num_qubits} qubits")
    drop = [q for q in range(num_qubits) if q not in keep]
    t = mat.reshape((2,) * (2 * num_qubits))
    # contract each dropped ket axis with the matching bra axis
    for q in reversed(drop):
        nq = t.ndim // 2
        t = np.trace(t, axis1=q, axis2=nq + q)
    d = 2 ** len(keep)
    return t.reshape(d, d)


def partial_trace(rho: DensityOperator, keep: Iterable[int]) -> DensityOperator:
    """Trace out all qubits not in `keep`."""
    return DensityOperator(partial_trace_matrix(rho.matrix, keep, rho.num_qubits))


def permute_qubits(op: np.ndarray, perm: Sequence[int]) -> np.ndarray:
    """Relabel qubit wires: wire `perm[i]` of the input becomes wire `i`.

    Works for both state vectors and square operators.
    """
    n = len(perm)
    if sorted(perm) != list(range(n)):
        raise ValueError("perm must be a permutation of 0..n-1")
    if op.ndim == 1:
        return op.reshape((2,) * n).transpose(perm).reshape(-1)
    axes = list(perm) + [n + p for p in perm]
    return op.reshape((2,) * (2 * n)).transpose(axes).reshape(op.shape)


def embed_operator(op: np.ndarray, qubits: Sequence[int], num_qubits: int) -> np.ndarray:
    """Embed an operator acting on `qubits` into the full register.

    `qubits` lists which wire each tensor factor of `op` acts on, in order.
    """
    m = len(qubits)
    if op.shape != (2**m, 2**m):
        raise ValueError("operator dimension does not match qubit count")
    if len(set(qubits)) != m or any(q < 0 or q >= num_qubits for q in qubits):
        raise ValueError("invalid qubit indices")
    rest = [q for q in range(num_qubits) if q not in qubits]
    full = kron(op, identity(2 ** (num_qubits - m)))
    # full currently acts on wires [qubits..., rest...]; permute back
    order = list(qubits) + rest
    inv = [0] * num_qubits
    for pos, wire in enumerate(order):
        inv[wire] = pos
    return permute_qubits(full, inv)


def apply_to_qubits(op: np.ndarray, qubits: Sequence[int], psi: np.ndarray) -> np.ndarray:
    """Apply a local operator to the given wires of a state vector."""
    n = _num_qubits_of(psi.shape[0])
    m = len(qubits)
    t = psi.reshape((2,) * n)
    t = np.tensordot(op.reshape((2,) * (2 * m)), t, axes=(range(m, 2 * m), qubits))
    return np.moveaxis(t, range(m), qubits).reshape(-1)


def bell_pair(dim: int = 2, normalized: bool = True) -> np.ndarray:
    """Maximally entangled pair sum_i |ii> on two dim-`dim` factors."""
    v = np.eye(dim, dtype=complex).reshape(-1)
    return v / np.sqrt(dim) if normalized else v


def swap_operator(dim: int) -> np.ndarray:
    """Exchange operator on two dim-`dim` factors."""
    s = np.zeros((dim * dim, dim * dim), dtype=complex)
    for i in range(dim):
        for j in range(dim):
            s[i * dim + j, j * dim + i] = 1.0
    return s
