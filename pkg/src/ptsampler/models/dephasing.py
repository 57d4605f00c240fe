"""Two-time sampling of a pure-dephasing interaction.

The coupling |0><0|_S x H_E evolves |+>_S |0>_E into a branch state whose
system coherence equals the environment survival amplitude: measuring the
system in the X and Y bases gives <X>^2 + <Y>^2 = |<0|w_t|0>|^2 with
w_t = exp(-i H_E t).  Over random times the values follow an
exponential-shaped density.
"""

from __future__ import annotations

import numpy as np

from ..ensembles import RngStream, gue_hamiltonian, random_timestep


def dephasing_demo(
    env_qubits: int,
    t_samples: int,
    rng: RngStream,
    locality_cutoff: bool = True,
    cutoff_length: float = 6.0,
) -> list:
    """Returns (t, <X>^2 + <Y>^2, |<0|w_t|0>|^2) for random times under one
    GUE environment Hamiltonian.  The expectation column is computed from the
    evolved SE state, the overlap column directly from the spectrum; the two
    agree to solver precision.  The default suppression length matches the
    random-Hamiltonian process model; a unit length localizes the
    environment so strongly that the overlap hugs 1 instead of spreading
    into an exponential-shaped density."""
    if env_qubits < 1 or t_samples < 1:
        raise ValueError("need env_qubits >= 1 and t_samples >= 1")
    de = 2**env_qubits
    h = gue_hamiltonian(de, locality_cutoff, rng, cutoff_length=cutoff_length)
    w, v = np.linalg.eigh(h)
    weights = np.abs(v[0, :]) ** 2  # |<0|m>|^2 over eigenvectors
    records = []
    for _ in range(t_samples):
        t = random_timestep(rng)
        wt = (v * np.exp(-1j * w * t)) @ v.conj().T
        # |Psi> = (|0>_S w_t|0>_E + |1>_S |0>_E)/sqrt(2)
        psi = np.zeros(2 * de, dtype=complex)
        psi[:de] = wt[:, 0] / np.sqrt(2)
        psi[de] = 1 / np.sqrt(2)
        rho01 = np.sum(psi[:de] * psi[de:].conj())  # system coherence
        exp_x = 2 * rho01.real
        exp_y = -2 * rho01.imag
        overlap_sq = float(np.abs(np.sum(weights * np.exp(-1j * w * t))) ** 2)
        records.append((float(t), float(exp_x**2 + exp_y**2), overlap_sq))
    return records
