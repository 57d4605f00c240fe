"""Experimental interventions: CP maps with outcome labels and their Chois.

An instrument is a collection of trace non-increasing completely positive
maps, one per outcome, that together are trace preserving.  Choi matrices
use the unnormalized convention built from sum_i |ii> (so the identity map
has Choi trace d); the process Choi state uses normalized Bell pairs and the
bookkeeping factor between the two lives in
:func:`ptsampler.process.born_rule_contract`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    ATOL_UNITARY,
    HADAMARD,
    KET_MINUS,
    KET_PLUS,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    S_GATE,
    T_GATE,
    expm_hermitian,
    identity,
    is_hermitian,
)


@dataclass(frozen=True)
class CpMap:
    """Trace non-increasing CP map in Kraus form, tagged with an outcome label."""

    kraus_ops: tuple
    label: str = ""

    def __post_init__(self):
        ops = tuple(np.asarray(k, dtype=complex) for k in self.kraus_ops)
        object.__setattr__(self, "kraus_ops", ops)
        if not ops:
            raise ValueError("CpMap needs at least one Kraus operator")
        d = ops[0].shape
        if any(k.shape != d for k in ops) or d[0] != d[1]:
            raise ValueError("Kraus operators must be square and share dimensions")
        tot = sum(k.conj().T @ k for k in ops)
        top = float(np.linalg.eigvalsh(tot)[-1])
        if top > 1.0 + ATOL_UNITARY:
            raise ValueError(f"map is trace increasing (max eig of sum K^dag K = {top})")

    @property
    def dim(self) -> int:
        return self.kraus_ops[0].shape[0]

    def effect(self) -> np.ndarray:
        """POVM element sum_K K^dag K governing the outcome probability."""
        return sum(k.conj().T @ k for k in self.kraus_ops)


@dataclass(frozen=True)
class Instrument:
    """Set of outcome CP maps summing to a trace-preserving map."""

    outcomes: tuple
    name: str = ""

    def __post_init__(self):
        outs = tuple(self.outcomes)
        object.__setattr__(self, "outcomes", outs)
        if not outs:
            raise ValueError("instrument needs at least one outcome")
        d = outs[0].dim
        if any(o.dim != d for o in outs):
            raise ValueError("outcome maps must share dimensions")
        tot = sum(o.effect() for o in outs)
        if np.abs(tot - identity(d)).max() > ATOL_UNITARY:
            raise ValueError("instrument is not trace preserving overall")

    @property
    def dim(self) -> int:
        return self.outcomes[0].dim

    @property
    def num_outcomes(self) -> int:
        return len(self.outcomes)


def apply(cp_map: CpMap, rho: np.ndarray) -> tuple:
    """Apply the map; returns (unnormalized output, probability weight)."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (cp_map.dim, cp_map.dim):
        raise ValueError("state dimension does not match the map")
    out = sum(k @ rho @ k.conj().T for k in cp_map.kraus_ops)
    return out, float(np.trace(out).real)


def choi_of(cp_map: CpMap) -> np.ndarray:
    """Unnormalized Choi matrix sum_K vec(K) vec(K)^dag, ordered (out, in)."""
    d = cp_map.dim
    out = np.zeros((d * d, d * d), dtype=complex)
    for k in cp_map.kraus_ops:
        v = k.reshape(-1)  # row-major flatten == (K ⊗ I) sum_i |ii>
        out += np.outer(v, v.conj())
    return out


def choi_apply(choi: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """Evaluate the channel from its (out, in)-ordered unnormalized Choi."""
    d = rho.shape[0]
    c = choi.reshape(d, d, d, d)  # (out, in, out', in')
    return np.einsum("aibj,ij->ab", c, rho)


def kraus_from_choi(choi: np.ndarray, tol: float = 1e-12) -> tuple:
    """Recover a Kraus decomposition from an (out, in)-ordered Choi matrix."""
    d = int(round(np.sqrt(choi.shape[0])))
    w, v = np.linalg.eigh(choi)
    ops = []
    for lam, vec in zip(w, v.T):
        if lam > tol:
            ops.append(np.sqrt(lam) * vec.reshape(d, d))
    return tuple(ops)


def instrument_chois(instrument: Instrument) -> list:
    """Per-outcome Choi matrices of an instrument."""
    return [choi_of(o) for o in instrument.outcomes]


# ---------------------------------------------------------------------------
# Built-in library
# ---------------------------------------------------------------------------

_NAMED_UNITARIES = {
    "h": HADAMARD,
    "x": PAULI_X,
    "y": PAULI_Y,
    "z": PAULI_Z,
    "s": S_GATE,
    "t": T_GATE,
}


def identity_instrument(dim: int = 2) -> Instrument:
    """Single trivial outcome; leaves the state untouched."""
    return Instrument((CpMap((identity(dim),), "0"),), name="identity")


def unitary_instrument(u: np.ndarray, name: str = "unitary") -> Instrument:
    return Instrument((CpMap((np.asarray(u, dtype=complex),), "0"),), name=name)


def comp_basis(dim: int = 2) -> Instrument:
    """Projective computational-basis measurement (post-state kept)."""
    outs = []
    for i in range(dim):
        p = np.zeros((dim, dim), dtype=complex)
        p[i, i] = 1.0
        outs.append(CpMap((p,), str(i)))
    return Instrument(tuple(outs), name="comp_basis")


def measure_and_prepare(basis_states, prepared: np.ndarray, name: str) -> Instrument:
    """Measure in the given orthonormal basis and feed `prepared` forward."""
    outs = []
    for i, b in enumerate(basis_states):
        k = np.outer(prepared, np.asarray(b).conj())
        outs.append(CpMap((k,), str(i)))
    return Instrument(tuple(outs), name=name)


def x_basis_prepare_plus() -> Instrument:
    """Measure in the X basis, re-prepare |+>."""
    return measure_and_prepare((KET_PLUS, KET_MINUS), KET_PLUS, "x_basis_prepare_plus")


def comp_basis_prepare_plus() -> Instrument:
    """Measure in the computational basis, re-prepare |+>.

    This is the instrument under which the modular-multiplication process
    yields an independent fair coin at every step.
    """
    e0 = np.array([1, 0], dtype=complex)
    e1 = np.array([0, 1], dtype=complex)
    return measure_and_prepare((e0, e1), KET_PLUS, "comp_basis_prepare_plus")


def shor_rotation(previous_outcomes) -> Instrument:
    """Feed-forward step of the semiclassical inverse Fourier transform.

    Applies R = diag(1, phi), measures in the X basis and re-prepares |+>.
    With history (m_1, ..., m_{j-1}), oldest first, the correction phase is
    phi = exp(-2*pi*i * sum_k m_{j-k} / 2^(k+1)), i.e. the most recent
    outcome carries weight 1/4, exactly cancelling the residual binary
    fraction accumulated by the controlled powers.
    """
    hist = [int(b) for b in previous_outcomes]
    m = len(hist)
    ang = -2 * np.pi * sum(hist[m - k] / 2 ** (k + 1) for k in range(1, m + 1))
    r = np.diag([1.0, np.exp(1j * ang)]).astype(complex)
    outs = []
    for i, b in enumerate((KET_PLUS, KET_MINUS)):
        k = np.outer(KET_PLUS, b.conj()) @ r
        outs.append(CpMap((k,), str(i)))
    return Instrument(tuple(outs), name="shor_feedforward")


def driven_identity(h: np.ndarray) -> CpMap:
    """Unitary map exp(-iH); its Choi is the driven maximally entangled pair."""
    if not is_hermitian(np.asarray(h, dtype=complex)):
        raise ValueError("driven_identity requires a Hermitian generator")
    return CpMap((expm_hermitian(np.asarray(h, dtype=complex)),), "0")


def instrument_by_name(name: str, dim: int = 2) -> Instrument:
    """Resolve a library instrument by its config-facing name.

    `shor_feedforward` is adaptive and must be resolved per time step via
    :func:`shor_rotation`; asking for it here raises.
    """
    if name == "comp_basis":
        return comp_basis(dim)
    if name == "identity":
        return identity_instrument(dim)
    if name == "x_basis_prepare_plus":
        return x_basis_prepare_plus()
    if name == "comp_basis_prepare_plus":
        return comp_basis_prepare_plus()
    if name.startswith("unitary:"):
        key = name.split(":", 1)[1]
        if key not in _NAMED_UNITARIES:
            raise KeyError(f"unknown unitary name {key!r}")
        return unitary_instrument(_NAMED_UNITARIES[key], name=name)
    if name == "shor_feedforward":
        raise KeyError("shor_feedforward is adaptive; build it with shor_rotation(history)")
    raise KeyError(f"unknown instrument name {name!r}")
