"""Haar-random matrix product states and perfect sequential sampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ensembles import RngStream, standard_normal_complex


@dataclass(frozen=True)
class MatrixProductState:
    """Open-boundary MPS with site tensors of shape (left, 2, right)."""

    site_tensors: tuple

    def __post_init__(self):
        tensors = tuple(np.asarray(t, dtype=complex) for t in self.site_tensors)
        object.__setattr__(self, "site_tensors", tensors)
        if not tensors:
            raise ValueError("MPS needs at least one site")
        if tensors[0].shape[0] != 1 or tensors[-1].shape[2] != 1:
            raise ValueError("boundary bond dimensions must be 1")
        for a, b in zip(tensors[:-1], tensors[1:]):
            if a.shape[2] != b.shape[0]:
                raise ValueError("mismatched bond dimensions between sites")
        for t in tensors:
            if t.ndim != 3 or t.shape[1] != 2:
                raise ValueError("site tensors must have shape (left, 2, right)")

    @property
    def num_sites(self) -> int:
        return len(self.site_tensors)

    @property
    def bond_dims(self) -> tuple:
        return tuple(t.shape[0] for t in self.site_tensors) + (1,)

    @property
    def max_bond(self) -> int:
        return max(self.bond_dims)

    def to_statevector(self) -> np.ndarray:
        """Full contraction; feasible only for small site counts."""
        v = self.site_tensors[0].reshape(2, -1)
        for t in self.site_tensors[1:]:
            v = np.tensordot(v, t, axes=(v.ndim - 1, 0))
        return v.reshape(-1)


def bond_profile(num_sites: int, chi: int) -> list:
    """Interior bond dimensions min(2^i, 2^(n-i), chi) including boundaries."""
    return [min(2**i, 2 ** (num_sites - i), chi) for i in range(num_sites + 1)]


def random_mps(num_sites: int, chi: int, rng: RngStream) -> MatrixProductState:
    """Haar-random MPS with bond dimension capped at `chi`.

    Each site tensor, reshaped to (left*2, right), is a Haar isometry drawn
    by Ginibre + QR with phase fix; the state is normalized by construction.
    """
    if num_sites < 1 or chi < 1:
        raise ValueError("need num_sites >= 1 and chi >= 1")
    dims = bond_profile(num_sites, chi)
    tensors = []
    for i in range(num_sites):
        dl, dr = dims[i], dims[i + 1]
        a = standard_normal_complex((dl * 2, dr), rng) / np.sqrt(2)
        q, r = np.linalg.qr(a)
        d = np.diagonal(r)
        q = q * (d / np.abs(d))
        tensors.append(q.reshape(dl, 2, dr))
    return MatrixProductState(tuple(tensors))


def _right_environments(psi: MatrixProductState) -> list:
    """R[i] = contraction of sites i..n-1 with their conjugates (PSD)."""
    n = psi.num_sites
    envs = [None] * (n + 1)
    envs[n] = np.ones((1, 1), dtype=complex)
    for i in range(n - 1, -1, -1):
        t = psi.site_tensors[i]
        # sum_x A^x R A^x(dag)
        tr = np.tensordot(t, envs[i + 1], axes=(2, 0))  # (l, 2, r')
        envs[i] = np.tensordot(tr, t.conj(), axes=((1, 2), (1, 2)))
    return envs


def sample_mps_bitstrings(
    psi: MatrixProductState,
    shots: int,
    rng: RngStream,
    num_sampled: int | None = None,
) -> tuple:
    """Draw bit-strings from |<x|psi>|^2, site by site, batched over shots.

    Sampling the first `num_sampled` sites marginalizes the remainder (the
    cached right environments already account for them).  Returns
    ``(bits, probs)`` with shapes (shots, num_sampled) and (shots,), where
    probs are the exact probabilities of the sampled (marginal) strings.
    """
    n = psi.num_sites
    m = n if num_sampled is None else int(num_sampled)
    if not 1 <= m <= n:
        raise ValueError("num_sampled out of range")
    envs = _right_environments(psi)
    left = np.ones((shots, 1), dtype=complex)
    probs = np.ones(shots)
    bits = np.zeros((shots, m), dtype=np.uint8)
    u = rng.gen.random((shots, m))
    for i in range(m):
        t = psi.site_tensors[i]
        r = envs[i + 1]
        cand0 = left @ t[:, 0, :]  # (shots, right)
        cand1 = left @ t[:, 1, :]
        p0 = np.einsum("sa,ab,sb->s", cand0, r, cand0.conj()).real
        p1 = np.einsum("sa,ab,sb->s", cand1, r, cand1.conj()).real
        tot = p0 + p1  # equals 1 up to roundoff; kept as a guard
        take1 = u[:, i] >= (p0 / tot)
        bits[:, i] = take1
        chosen = np.where(take1[:, None], cand1, cand0)
        p_chosen = np.where(take1, p1, p0)
        probs *= p_chosen / tot
        # renormalize the left vectors so the quadratic forms stay conditional
        left = chosen / np.sqrt(p_chosen)[:, None]
    return bits, probs


def mps_sample(psi: MatrixProductState, rng: RngStream) -> tuple:
    """One bit-string drawn from the Born distribution of the MPS."""
    bits, _ = sample_mps_bitstrings(psi, 1, rng)
    return tuple(int(b) for b in bits[0])
