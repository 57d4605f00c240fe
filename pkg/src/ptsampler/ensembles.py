"""Random-object generation: seeded streams, CUE unitaries, GUE Hamiltonians.

Randomness is counter-based (Philox) and fully determined by a
``(seed, stream_id)`` pair, so shot loops and repeat loops can be handed
disjoint child streams and run in any order or in parallel without changing
the results.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_MASK64 = (1 << 64) - 1


def _splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


@dataclass
class RngStream:
    """Deterministic random stream keyed by (seed, stream_id).

    The same key yields the same draw sequence on every platform.  Use
    :meth:`child` to derive independent streams for parallel work items;
    never share one stream between concurrent callers.
    """

    seed: int
    stream_id: int = 0
    _gen: np.random.Generator | None = field(default=None, repr=False, compare=False)

    @property
    def gen(self) -> np.random.Generator:
        if self._gen is None:
            key = ((self.seed & _MASK64), (self.stream_id & _MASK64))
            self._gen = np.random.Generator(np.random.Philox(key=key))
        return self._gen

    def child(self, *indices: int) -> "RngStream":
        """Independent stream addressed by one or more integer indices."""
        sid = self.stream_id & _MASK64
        for ix in indices:
            sid = _splitmix64(sid ^ _splitmix64((int(ix) + 1) & _MASK64))
        return RngStream(self.seed, sid)


def standard_normal_complex(shape, rng: RngStream) -> np.ndarray:
    """Entries x + i*y with independent x, y ~ N(0, 1)."""
    g = rng.gen
    return g.standard_normal(shape) + 1j * g.standard_normal(shape)


def haar_unitary(dim: int, rng: RngStream) -> np.ndarray:
    """Haar-distributed unitary (CUE) of the given dimension.

    Ginibre draw followed by QR with the R-diagonal phase correction; plain
    QR alone is not Haar distributed.
    """
    if dim < 2:
        raise ValueError("haar_unitary requires dim >= 2")
    a = standard_normal_complex((dim, dim), rng) / np.sqrt(2)
    q, r = np.linalg.qr(a)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def gue_hamiltonian(
    dim: int, locality_cutoff: bool, rng: RngStream, cutoff_length: float = 1.0
) -> np.ndarray:
    """GUE draw, optionally with exponentially suppressed off-diagonals.

    Entries of a complex Gaussian matrix A (real and imaginary parts N(0,1))
    are Hermitized as (A + A^dag)/2, giving off-diagonal components of
    standard deviation 1/sqrt(2) and a real N(0,1) diagonal.  With
    `locality_cutoff` the off-diagonals are scaled by
    exp(-|i-j| / cutoff_length).
    """
    if dim < 2:
        raise ValueError("gue_hamiltonian requires dim >= 2")
    if cutoff_length <= 0:
        raise ValueError("cutoff_length must be positive")
    a = standard_normal_complex((dim, dim), rng)
    h = (a + a.conj().T) / 2
    if locality_cutoff:
        idx = np.arange(dim)
        h = h * np.exp(-np.abs(idx[:, None] - idx[None, :]) / cutoff_length)
    return h


def random_timestep(rng: RngStream) -> float:
    """Time step drawn uniformly from (0, 2*pi)."""
    while True:
        dt = 2 * np.pi * rng.gen.random()
        if dt > 0.0:
            return dt
