"""Multi-time processes: trajectory sampling, Choi states, map extraction.

A :class:`ProcessSpec` fixes the uncontrollable part of an experiment: the
initial system-environment state and the interleaving unitaries.  Probing it
with a schedule of instruments produces outcome strings; the same statistics
are reproduced by projecting the process Choi state onto the instrument
Chois (the spatiotemporal Born rule), which the test suite enforces.

Leg conventions for the Choi state (canonical "time" layout, leg 0 most
significant): ``[o0, i1, o1, i2, ..., ik, ok]`` where ``o_j`` is the system
emitted at time ``t_j`` and ``i_j`` is the state fed back in afterwards.
The "reversed" layout is the same list read backwards.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from .ensembles import RngStream, haar_unitary, standard_normal_complex
from .instruments import CpMap, Instrument, choi_of, comp_basis, identity_instrument
from .linalg import (
    ATOL_TRACE,
    ATOL_UNITARY,
    EIG_FLOOR,
    DensityOperator,
    StateVector,
    basis_state,
    bell_pair,
    embed_operator,
    identity,
    is_unitary,
    kron,
    permute_qubits,
    swap_operator,
    SWAP,
)

MAX_DENSE_QUBITS = 13  # dense operators are capped at dimension 2**13

Schedule = Union[Sequence[Instrument], Callable[[int, tuple], Instrument]]


class TrajectoryUnderflowError(RuntimeError):
    """Raised when a trajectory weight falls below 1e-300."""


@dataclass(frozen=True)
class ProcessSpec:
    """Initial SE state plus the ordered dilated unitaries of a process.

    `system_qubits` and `env_qubits` must partition the register; internally
    everything is permuted so the system occupies the most significant wires.
    """

    system_qubits: tuple
    env_qubits: tuple
    initial_state: Union[StateVector, DensityOperator]
    unitaries: tuple
    times: tuple | None = None

    def __post_init__(self):
        sys_q = tuple(int(q) for q in self.system_qubits)
        env_q = tuple(int(q) for q in self.env_qubits)
        object.__setattr__(self, "system_qubits", sys_q)
        object.__setattr__(self, "env_qubits", env_q)
        us = tuple(np.asarray(u, dtype=complex) for u in self.unitaries)
        object.__setattr__(self, "unitaries", us)
        n = self.initial_state.num_qubits
        if sorted(sys_q + env_q) != list(range(n)):
            raise ValueError("system and environment qubits must partition the register")
        if not sys_q:
            raise ValueError("need at least one system qubit")
        if len(us) < 1:
            raise ValueError("a process needs at least one step")
        dim = 2**n
        for u in us:
            if u.shape != (dim, dim):
                raise ValueError("unitary dimension does not match the register")
            if not is_unitary(u):
                raise ValueError("step operator is not unitary within 1e-10")
        if self.times is not None and len(self.times) != len(us) + 1:
            raise ValueError("times must label t_0..t_k")

    @property
    def num_qubits(self) -> int:
        return len(self.system_qubits) + len(self.env_qubits)

    @property
    def num_steps(self) -> int:
        return len(self.unitaries)

    @property
    def system_dim(self) -> int:
        return 2 ** len(self.system_qubits)

    @property
    def env_dim(self) -> int:
        return 2 ** len(self.env_qubits)

    def _canonical_perm(self) -> list:
        return list(self.system_qubits) + list(self.env_qubits)

    def canonical_unitaries(self) -> list:
        """Step unitaries with the system moved to the leading wires."""
        perm = self._canonical_perm()
        if perm == list(range(self.num_qubits)):
            return list(self.unitaries)
        return [permute_qubits(u, perm) for u in self.unitaries]

    def canonical_initial(self) -> tuple:
        """(array, is_pure) with the system on the leading wires."""
        perm = self._canonical_perm()
        trivial = perm == list(range(self.num_qubits))
        if isinstance(self.initial_state, StateVector):
            amp = self.initial_state.amplitudes
            return (amp if trivial else permute_qubits(amp, perm)), True
        mat = self.initial_state.matrix
        return (mat if trivial else permute_qubits(mat, perm)), False


@dataclass(frozen=True)
class TrajectoryRecord:
    """One sampled outcome string and its exact probability."""

    outcomes: tuple
    probability: float
    instrument_names: tuple


# ---------------------------------------------------------------------------
# Schedules
# ---------------------------------------------------------------------------


def as_schedule(instruments: Schedule, num_steps: int) -> Callable[[int, tuple], Instrument]:
    """Normalize a list of instruments or an adaptive policy to a policy."""
    if callable(instruments):
        return instruments
    seq = list(instruments)
    if len(seq) != num_steps + 1:
        raise ValueError(f"schedule must cover {num_steps + 1} time slots")
    return lambda j, history: seq[j]


def uniform_schedule(instrument: Instrument) -> Callable[[int, tuple], Instrument]:
    return lambda j, history: instrument


# ---------------------------------------------------------------------------
# Trajectory simulation
# ---------------------------------------------------------------------------


def _purified(spec: ProcessSpec) -> tuple:
    """(psi0, env_dim_eff, unitaries) with mixed states purified into an ancilla."""
    init, pure = spec.canonical_initial()
    us = spec.canonical_unitaries()
    if pure:
        return init, spec.env_dim, us
    w, v = np.linalg.eigh(init)
    keep = w > 1e-14
    w, v = w[keep], v[:, keep]
    r = int(w.shape[0])
    psi = (v * np.sqrt(w)).reshape(-1)  # axes [SE, anc]
    us = [kron(u, identity(r)) for u in us]
    return psi, spec.env_dim * r, us


def _apply_sys_kraus(k: np.ndarray, psi: np.ndarray, de: int) -> np.ndarray:
    """(K ⊗ I_env) psi for a system-block operator, without building the kron."""
    return (k @ psi.reshape(k.shape[1], de)).reshape(-1)


def sample_trajectory(spec: ProcessSpec, instruments: Schedule, rng: RngStream) -> TrajectoryRecord:
    """Sample one outcome string by sequential collapse (quantum-jump style).

    At every slot the instrument outcome is drawn with probability equal to
    its trace weight and the state renormalized; the returned probability is
    the exact joint probability of the outcome string.
    """
    policy = as_schedule(instruments, spec.num_steps)
    psi, de, us = _purified(spec)
    ds = spec.system_dim
    g = rng.gen
    outcomes: list = []
    names: list = []
    used: list = []
    prob = 1.0
    branched = False

    def intervene(psi: np.ndarray) -> np.ndarray:
        nonlocal prob, branched
        inst = policy(len(outcomes), tuple(outcomes))
        if inst.dim != ds:
            raise ValueError("instrument dimension does not match the system")
        used.append(inst)
        names.append(inst.name)
        cand = []  # per outcome: list of (kraus image, squared norm)
        weights = []
        for out in inst.outcomes:
            imgs = [_apply_sys_kraus(k, psi, de) for k in out.kraus_ops]
            norms = [float(np.vdot(v, v).real) for v in imgs]
            cand.append(list(zip(imgs, norms)))
            weights.append(sum(norms))
        total = sum(weights)
        u = g.random() * total
        acc = 0.0
        x = len(weights) - 1
        for idx, w in enumerate(weights):
            acc += w
            if u < acc:
                x = idx
                break
        w_x = weights[x] / total
        prob *= w_x
        if prob < 1e-300:
            raise TrajectoryUnderflowError(f"trajectory weight underflow at slot {len(outcomes)}")
        outcomes.append(x)
        branch = cand[x]
        if len(branch) > 1:
            branched = True
            norms = np.array([n for _, n in branch])
            b = int(g.choice(len(branch), p=norms / norms.sum()))
        else:
            b = 0
        v, n2 = branch[b]
        return v / np.sqrt(n2)

    psi = intervene(psi)
    for u in us:
        psi = u @ psi
        psi = intervene(psi)

    if branched:
        # multi-Kraus branches make the running weight conditional on the
        # branch path; recompute the exact string probability
        prob = trajectory_probability(spec, used, outcomes)
    return TrajectoryRecord(tuple(outcomes), float(prob), tuple(names))


def trajectory_probability(spec: ProcessSpec, instruments: Schedule, outcomes) -> float:
    """Exact probability of a given outcome string (deterministic evaluation)."""
    outcomes = [int(x) for x in outcomes]
    if len(outcomes) != spec.num_steps + 1:
        raise ValueError("need one outcome per time slot")
    policy = as_schedule(instruments, spec.num_steps)
    init, pure = spec.canonical_initial()
    rho = np.outer(init, init.conj()) if pure else init
    us = spec.canonical_unitaries()
    ds, de = spec.system_dim, spec.env_dim

    def select(rho: np.ndarray, j: int) -> np.ndarray:
        inst = policy(j, tuple(outcomes[:j]))
        if not 0 <= outcomes[j] < inst.num_outcomes:
            raise ValueError(f"outcome {outcomes[j]} out of range at slot {j}")
        cp = inst.outcomes[outcomes[j]]
        out = np.zeros_like(rho)
        for k in cp.kraus_ops:
            kf = kron(k, identity(de))
            out += kf @ rho @ kf.conj().T
        return out

    rho = select(rho, 0)
    for j, u in enumerate(us):
        rho = u @ rho @ u.conj().T
        rho = select(rho, j + 1)
    return float(max(np.trace(rho).real, 0.0))


def sample_comp_basis(
    spec: ProcessSpec,
    shots: int,
    rng: RngStream,
    measured_slots: Sequence[int] | None = None,
) -> tuple:
    """Batched sampler for projective computational-basis schedules.

    Slots in `measured_slots` (default: all) measure the system in the
    computational basis and keep the post-measurement state; all other slots
    apply the identity instrument.  Cross-checked against
    :func:`sample_trajectory` by the test suite.  Returns ``(outcomes,
    probs)`` of shapes (shots, n_measured) and (shots,), where probs are the
    exact probabilities of the sampled strings.
    """
    k = spec.num_steps
    measured = sorted(set(range(k + 1) if measured_slots is None else map(int, measured_slots)))
    if measured and (measured[0] < 0 or measured[-1] > k):
        raise ValueError("measured slot out of range")
    psi0, de, us = _purified(spec)
    ds = spec.system_dim
    # shots-as-rows layout: fancy row indexing stays cache friendly
    state = np.repeat(psi0[None, :], shots, axis=0)
    sys_idx = None  # set after a measurement while the system is in a basis state
    probs = np.ones(shots)
    bits = np.zeros((shots, len(measured)), dtype=np.int64)
    u_draws = rng.gen.random((shots, len(measured)))
    col = 0

    def measure(state: np.ndarray, col: int):
        nonlocal probs
        s3 = state.reshape(shots, ds, de)
        p = (s3.real**2 + s3.imag**2).sum(axis=2)  # (shots, ds)
        tot = p.sum(axis=1)
        cum = np.cumsum(p / tot[:, None], axis=1)
        idx = np.minimum((u_draws[:, col][:, None] > cum).sum(axis=1), ds - 1)
        p_chosen = np.take_along_axis(p, idx[:, None], axis=1)[:, 0]
        probs *= p_chosen / tot
        env = np.take_along_axis(s3, idx[:, None, None], axis=1)[:, 0, :]
        env = env / np.sqrt(p_chosen)[:, None]
        bits[:, col] = idx
        return env, idx

    def step(u: np.ndarray, state: np.ndarray, sys_idx):
        if sys_idx is None:
            return state @ u.T
        out = np.empty((shots, ds * de), dtype=complex)
        for b in range(ds):
            rows = np.nonzero(sys_idx == b)[0]
            if rows.size:
                out[rows] = state[rows] @ u[:, b * de : (b + 1) * de].T
        return out

    if 0 in measured:
        state, sys_idx = measure(state, col)
        col += 1
    for j, u in enumerate(us, start=1):
        state = step(u, state, sys_idx)
        sys_idx = None
        if j in measured:
            state, sys_idx = measure(state, col)
            col += 1
    return bits, probs


def enumerate_comp_basis(
    spec: ProcessSpec, measured_slots: Sequence[int] | None = None
) -> np.ndarray:
    """Exact probabilities of every outcome string of a comp-basis schedule.

    Branches are kept unnormalized so each branch's squared norm is its joint
    probability.  The returned array is indexed by the outcome string read as
    a base-d_s integer, first measured slot most significant.  Exponential in
    the number of measured slots; meant for oracle-grade checks.
    """
    k = spec.num_steps
    measured = sorted(set(range(k + 1) if measured_slots is None else map(int, measured_slots)))
    psi0, de, us = _purified(spec)
    ds = spec.system_dim
    if ds ** len(measured) > 2**20:
        raise ValueError("enumeration capped at 2^20 outcome strings")
    states = psi0[None, :].copy()  # (branches, dim), unnormalized

    def split(states: np.ndarray) -> np.ndarray:
        b = states.shape[0]
        s3 = states.reshape(b, ds, de)
        out = np.zeros((b, ds, ds, de), dtype=complex)  # (branch, outcome, sys, env)
        for x in range(ds):
            out[:, x, x, :] = s3[:, x, :]
        return out.reshape(b * ds, ds * de)

    if 0 in measured:
        states = split(states)
    for j, u in enumerate(us, start=1):
        states = states @ u.T
        if j in measured:
            states = split(states)
    return np.einsum("bd,bd->b", states, states.conj()).real


# ---------------------------------------------------------------------------
# Choi state
# ---------------------------------------------------------------------------


def _permute_legs(matrix: np.ndarray, perm: Sequence[int], d: int, n_legs: int) -> np.ndarray:
    t = matrix.reshape((d,) * (2 * n_legs))
    axes = list(perm) + [n_legs + p for p in perm]
    return t.transpose(axes).reshape(matrix.shape)


def _time_labels(k: int) -> tuple:
    labels = ["o0"]
    for j in range(1, k + 1):
        labels += [f"i{j}", f"o{j}"]
    return tuple(labels)


_LAYOUT_TAGS = {"time": 0, "reversed": 1}
_LAYOUT_NAMES = {v: n for n, v in _LAYOUT_TAGS.items()}
_EXPORT_MAGIC = b"PTCH"
_EXPORT_HEADER = struct.Struct("<4sHHIIQ")  # magic, version, layout, k, d_s, dim


@dataclass(frozen=True)
class ChoiState:
    """Many-body state equivalent of a k-step process (unit trace, PSD).

    `layout` is "time" for legs ``[o0, i1, o1, ..., ik, ok]`` (leg 0 most
    significant) or "reversed" for the same list backwards.
    """

    num_steps: int
    system_dim: int
    matrix: np.ndarray
    layout: str = "time"

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", m)
        if self.layout not in _LAYOUT_TAGS:
            raise ValueError(f"unknown layout {self.layout!r}")
        dim = self.system_dim ** (2 * self.num_steps + 1)
        if m.shape != (dim, dim):
            raise ValueError("Choi matrix dimension does not match num_steps")
        if abs(np.trace(m) - 1.0) > ATOL_TRACE:
            raise ValueError("Choi state must have unit trace")

    @property
    def num_legs(self) -> int:
        return 2 * self.num_steps + 1

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def leg_labels(self) -> tuple:
        labels = _time_labels(self.num_steps)
        return labels if self.layout == "time" else tuple(reversed(labels))

    def with_layout(self, layout: str) -> "ChoiState":
        if layout not in _LAYOUT_TAGS:
            raise ValueError(f"unknown layout {layout!r}")
        if layout == self.layout:
            return self
        perm = list(reversed(range(self.num_legs)))
        m = _permute_legs(self.matrix, perm, self.system_dim, self.num_legs)
        return ChoiState(self.num_steps, self.system_dim, m, layout)

    def to_density_operator(self) -> DensityOperator:
        return DensityOperator(self.matrix)

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix)[0])

    def export_bytes(self) -> bytes:
        """Flat binary record: 24-byte little-endian header then the matrix
        as row-major little-endian complex doubles."""
        header = _EXPORT_HEADER.pack(
            _EXPORT_MAGIC, 1, _LAYOUT_TAGS[self.layout], self.num_steps,
            self.system_dim, self.dim,
        )
        return header + np.ascontiguousarray(self.matrix).astype("<c16").tobytes()

    @classmethod
    def from_bytes(cls, blob: bytes) -> "ChoiState":
        magic, version, layout, k, d_s, dim = _EXPORT_HEADER.unpack_from(blob)
        if magic != _EXPORT_MAGIC or version != 1:
            raise ValueError("not a Choi export record")
        m = np.frombuffer(blob, dtype="<c16", offset=_EXPORT_HEADER.size)
        return cls(k, d_s, m.astype(complex).reshape(dim, dim), _LAYOUT_NAMES[layout])


def build_choi(spec: ProcessSpec) -> ChoiState:
    """Construct the process Choi state by swapping in fresh Bell halves.

    At each time the system wire is exchanged with one half of a normalized
    maximally entangled pair; the partner half dangles as the input leg.
    After the final step the environment is traced out, leaving a unit-trace
    positive operator on 2k+1 legs in the canonical time layout.
    """
    k = spec.num_steps
    ds = spec.system_dim
    if ds ** (2 * k + 1) > 2**MAX_DENSE_QUBITS:
        raise ValueError(f"dense Choi construction capped at dimension 2^{MAX_DENSE_QUBITS}")
    psi0, de, us = _purified(spec)
    bell = identity(ds) / np.sqrt(ds)  # axes (kept, through)
    psi = psi0.reshape(ds, de)
    n_legs = 0
    for u in us:
        psi = np.multiply.outer(psi, bell)
        s_ax, e_ax = n_legs, n_legs + 1
        kept_ax, through_ax = n_legs + 2, n_legs + 3
        # swapping the system wire with the incoming half == transposing axes;
        # the axis left holding the old system content becomes leg o_j
        psi = np.swapaxes(psi, s_ax, through_ax)
        perm = list(range(n_legs)) + [through_ax, kept_ax, s_ax, e_ax]
        psi = np.transpose(psi, perm)
        n_legs += 2
        flat = psi.reshape(-1, ds * de)
        psi = (flat @ u.T).reshape(psi.shape)
    m = psi.reshape(ds ** (2 * k + 1), de)
    choi = m @ m.conj().T
    return ChoiState(k, ds, choi, "time")


def born_rule_contract(
    choi: ChoiState,
    final_povm_effect: np.ndarray,
    instrument_chois: Sequence[np.ndarray],
) -> float:
    """Probability of an outcome string from the Choi state.

    `instrument_chois` are the (out, in)-ordered unnormalized Chois of the
    realized outcome maps at slots 0..k-1; `final_povm_effect` is the POVM
    element measured at the last time.  The d^k factor converts between the
    normalized Bell pairs inside the process Choi and the unnormalized
    instrument Choi convention, making the result match
    :func:`trajectory_probability` exactly.
    """
    if choi.layout != "time":
        choi = choi.with_layout("time")
    k, d = choi.num_steps, choi.system_dim
    if len(instrument_chois) != k:
        raise ValueError(f"need {k} instrument Chois, got {len(instrument_chois)}")
    sw = swap_operator(d)
    op = np.array([[1.0 + 0j]])
    for a in instrument_chois:
        if a.shape != (d * d, d * d):
            raise ValueError("instrument Choi has wrong dimension")
        op = np.kron(op, (sw @ a @ sw).T)  # slot legs are ordered (o_j, i_{j+1})
    op = np.kron(op, final_povm_effect)
    return float((d**k) * np.trace(choi.matrix @ op).real)


# ---------------------------------------------------------------------------
# Stochastic maps and state embedding
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExtractedMap:
    """System channel between two sampling times, as an (out, in) Choi."""

    choi: np.ndarray
    start: int
    stop: int
    min_eigenvalue: float
    tp_deviation: float

    @property
    def is_cp(self) -> bool:
        return self.min_eigenvalue >= EIG_FLOOR

    @property
    def is_tp(self) -> bool:
        return self.tp_deviation <= 1e-8


def extract_stochastic_map(spec: ProcessSpec, i: int, j: int) -> ExtractedMap:
    """Channel from the state fed in at time t_i to the output at t_j.

    Identity instruments act everywhere else: the dynamics run freely to
    t_i, the system is exchanged against half of a maximally entangled pair
    (discarding what came out), and the evolution continues to t_j.  The
    result carries CP/TP diagnostics rather than raising, since projected
    objects are not guaranteed completely positive for correlated dynamics.
    """
    k = spec.num_steps
    if not 0 <= i < j <= k:
        raise ValueError(f"need 0 <= i < j <= k, got ({i}, {j}) with k={k}")
    psi0, de, us = _purified(spec)
    ds = spec.system_dim
    psi = psi0.copy()
    for u in us[:i]:
        psi = u @ psi
    bell = identity(ds) / np.sqrt(ds)
    t = np.multiply.outer(psi.reshape(ds, de), bell)  # [S, E, kept, through]
    t = np.swapaxes(t, 0, 3)  # axis 0: fresh system wire; axis 3: discarded output
    for u in us[i:j]:
        t = (u @ t.reshape(ds * de, -1)).reshape(t.shape)
    # Choi on (out = evolved system, in = kept half); trace E and the discard
    m = t.transpose(0, 2, 1, 3).reshape(ds * ds, de * ds)
    choi = ds * (m @ m.conj().T)
    tr_out = np.einsum("aiaj->ij", choi.reshape(ds, ds, ds, ds))
    tp_dev = float(np.abs(tr_out - identity(ds)).max())
    min_eig = float(np.linalg.eigvalsh(choi)[0])
    return ExtractedMap(choi, i, j, min_eig, tp_dev)


def embed_state_sampling(state_prep: np.ndarray) -> ProcessSpec:
    """Process whose multi-time statistics equal a state's measurement statistics.

    The prepared n-qubit state enters as the initial SE state; each step
    exchanges the system with the next environment wire, so computational
    measurements at the n successive times read out the state bit by bit.
    """
    state_prep = np.asarray(state_prep, dtype=complex)
    dim = state_prep.shape[0]
    n = dim.bit_length() - 1
    if n < 2 or 2**n != dim:
        raise ValueError("state preparation must act on at least two qubits")
    if not is_unitary(state_prep):
        raise ValueError("state preparation must be unitary")
    psi0 = state_prep @ basis_state(n, 0)
    swaps = tuple(embed_operator(SWAP, (0, m), n) for m in range(1, n))
    return ProcessSpec((0,), tuple(range(1, n)), StateVector(psi0), swaps)


# ---------------------------------------------------------------------------
# Random instances (diagnostics and the Born-rule equivalence suite)
# ---------------------------------------------------------------------------


def random_cp_instrument(dim: int, n_outcomes: int, rng: RngStream, n_kraus: int = 1) -> Instrument:
    """Random trace-preserving instrument with Ginibre-generated Kraus sets."""
    blocks = [
        [standard_normal_complex((dim, dim), rng) for _ in range(n_kraus)]
        for _ in range(n_outcomes)
    ]
    tot = sum(g.conj().T @ g for gs in blocks for g in gs)
    w, v = np.linalg.eigh(tot)
    whiten = (v * (w**-0.5)) @ v.conj().T
    outs = tuple(
        CpMap(tuple(g @ whiten for g in gs), str(i)) for i, gs in enumerate(blocks)
    )
    return Instrument(outs, name="random")


def random_process_spec(env_qubits: int, k: int, rng: RngStream) -> ProcessSpec:
    """Random pure initial state and Haar step unitaries on one system qubit."""
    dim = 2 ** (1 + env_qubits)
    psi = standard_normal_complex(dim, rng)
    psi /= np.linalg.norm(psi)
    us = tuple(haar_unitary(dim, rng) for _ in range(k))
    return ProcessSpec((0,), tuple(range(1, 1 + env_qubits)), StateVector(psi), us)
