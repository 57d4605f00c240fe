"""Order finding as a single-qubit multi-time process, plus factoring.

The environment is an n-qubit register holding integers mod N, initialized
to 1; step j applies a modular multiplication by a^(2^(2n-j)) controlled on
the system qubit.  Probing with the feed-forward instruments of the
semiclassical inverse Fourier transform yields phase-estimation bits (least
significant first); probing with measure-and-reprepare-|+> instruments
yields independent fair coins.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd

import numpy as np

from ..ensembles import RngStream
from ..instruments import (
    Instrument,
    comp_basis_prepare_plus,
    identity_instrument,
    shor_rotation,
)
from ..linalg import KET_PLUS, StateVector, basis_state, kron
from ..process import ProcessSpec, sample_trajectory


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def _is_prime_power(n: int) -> bool:
    for p in range(2, n.bit_length() + 1):
        root = round(n ** (1.0 / p))
        for r in (root - 1, root, root + 1):
            if r >= 2 and r**p == n:
                return True
    return False


def validate_factoring_target(n: int):
    """Order-finding preconditions: N odd, composite, not a prime power."""
    if n % 2 == 0:
        raise ValueError("N must be odd")
    if _is_prime(n) or n < 4:
        raise ValueError("N must be composite")
    if _is_prime_power(n):
        raise ValueError("N must not be a prime power")


@dataclass(frozen=True)
class ShorSpec:
    """Factoring instance: odd composite non-prime-power N and coprime base a."""

    N: int
    a: int

    def __post_init__(self):
        validate_factoring_target(self.N)
        if not 1 < self.a < self.N:
            raise ValueError("need 1 < a < N")
        if gcd(self.a, self.N) != 1:
            raise ValueError("a must be coprime to N")

    @property
    def n_bits(self) -> int:
        return self.N.bit_length()

    @property
    def num_steps(self) -> int:
        return 2 * self.n_bits


def mod_mult_unitary(c: int, modulus: int, n_bits: int) -> np.ndarray:
    """Permutation |y> -> |c*y mod modulus> on an n-bit register (y >= modulus fixed)."""
    dim = 2**n_bits
    p = np.zeros((dim, dim), dtype=complex)
    for y in range(dim):
        p[(c * y) % modulus if y < modulus else y, y] = 1.0
    return p


def controlled_mod_mult_process(N: int, a: int, n_bits: int, k: int) -> ProcessSpec:
    """k controlled modular multiplications by descending powers a^(2^(k-j)).

    Initial state |+>_system (x) |1>_register; the largest power acts first
    so that feed-forward estimation reads the phase bits least significant
    first.
    """
    de = 2**n_bits
    us = []
    for j in range(1, k + 1):
        c = pow(a, 2 ** (k - j), N)
        u = np.zeros((2 * de, 2 * de), dtype=complex)
        u[:de, :de] = np.eye(de)
        u[de:, de:] = mod_mult_unitary(c, N, n_bits)
        us.append(u)
    psi0 = kron(KET_PLUS, basis_state(n_bits, 1))
    return ProcessSpec(
        (0,), tuple(range(1, n_bits + 1)), StateVector(psi0), tuple(us)
    )


def shor_process(spec: ShorSpec) -> tuple:
    """The order-finding process and its feed-forward instrument schedule."""
    proc = controlled_mod_mult_process(spec.N, spec.a, spec.n_bits, spec.num_steps)
    return proc, shor_feedforward_schedule()


def shor_feedforward_schedule():
    """Adaptive policy: identity at t_0 (the |+> is already prepared), then
    the rotated X-basis measure-and-reprepare steps."""

    def policy(j: int, history: tuple) -> Instrument:
        if j == 0:
            return identity_instrument(2)
        return shor_rotation(history[1:])  # drop the dummy slot-0 outcome

    return policy


def shor_comp_basis_schedule():
    """Measure-and-reprepare-|+> at every slot: each outcome is a fair coin."""
    inst = comp_basis_prepare_plus()
    return lambda j, history: inst


def measured_phase_integer(outcomes) -> int:
    """Assemble the 2n-bit estimate; slot-0 outcome is a placeholder, the
    first measured bit is least significant."""
    bits = list(outcomes)[1:]
    return sum(b << i for i, b in enumerate(bits))


def order_from_phase(y: int, num_bits: int, N: int, a: int) -> int | None:
    """Continued-fraction recovery of the multiplicative order from y/2^bits.

    The convergent denominator (bounded by N) may be a divisor of the true
    order, so small multiples are tried as well.
    """
    frac = Fraction(y, 2**num_bits).limit_denominator(N)
    r0 = frac.denominator
    m = 1
    while m * r0 <= N:
        if pow(a, m * r0, N) == 1:
            return m * r0
        m += 1
    return None


def shor_factor_attempt(N: int, rng: RngStream) -> tuple | None:
    """One attempt: random base, one sampled trajectory, classical post-processing."""
    a = int(rng.gen.integers(2, N))
    g = gcd(a, N)
    if g != 1:
        return tuple(sorted((g, N // g)))
    spec = ShorSpec(N, a)
    proc, schedule = shor_process(spec)
    record = sample_trajectory(proc, schedule, rng)
    y = measured_phase_integer(record.outcomes)
    r = order_from_phase(y, spec.num_steps, N, a)
    if r is None or r % 2 == 1:
        return None
    x = pow(a, r // 2, N)
    if x == N - 1:
        return None
    for g in (gcd(x - 1, N), gcd(x + 1, N)):
        if 1 < g < N:
            return tuple(sorted((g, N // g)))
    return None


def shor_factor(N: int, rng: RngStream, max_attempts: int = 40) -> tuple | None:
    """Repeat attempts until a nontrivial factor pair is found or the retry
    budget is exhausted.  Preconditions: N odd, composite, not a prime
    power, and at desk scale (N <= 1024)."""
    if N > 1024:
        raise ValueError("factoring capped at N <= 1024")
    validate_factoring_target(N)
    for _ in range(max_attempts):
        result = shor_factor_attempt(N, rng)
        if result is not None:
            return result
    return None
