import numpy as np
import pytest
from numpy.testing import assert_allclose

from ptsampler.linalg import (
    CNOT,
    HADAMARD,
    PAULI_X,
    PAULI_Z,
    SWAP,
    DensityOperator,
    StateVector,
    apply_to_qubits,
    basis_state,
    bell_pair,
    embed_operator,
    expm_hermitian,
    identity,
    is_hermitian,
    is_unitary,
    kron,
    partial_trace,
    partial_trace_matrix,
    permute_qubits,
    swap_operator,
)

rng = np.random.default_rng(1234)


def random_density(n):
    d = 2**n
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    m = a @ a.conj().T
    return m / np.trace(m)


def random_herm(d):
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (a + a.conj().T) / 2


class TestKron:
    def test_identity_case(self):
        assert_allclose(kron(identity(2), identity(2)), identity(4))

    def test_pauli_x_z_forced_entries(self):
        got = kron(PAULI_X, PAULI_Z)
        want = np.zeros((4, 4))
        want[0, 2], want[1, 3] = 1, -1
        want[2, 0], want[3, 1] = 1, -1
        assert_allclose(got, want)

    def test_matches_index_loop_oracle(self):
        a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        b = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        got = kron(a, b)
        for i in range(2):
            for j in range(2):
                for k in range(3):
                    for l in range(3):
                        assert got[i * 3 + k, j * 3 + l] == pytest.approx(a[i, j] * b[k, l])

    def test_mixed_product_property(self):
        for _ in range(5):
            a, b = (rng.standard_normal((2, 2)) + 0j for _ in range(2))
            c, d = (rng.standard_normal((3, 3)) + 0j for _ in range(2))
            lhs = kron(a, c) @ kron(b, d)
            rhs = kron(a @ b, c @ d)
            assert np.abs(lhs - rhs).max() < 1e-10

    def test_rejects_non_finite(self):
        bad = np.array([[np.inf, 0], [0, 1]])
        with pytest.raises(ValueError):
            kron(bad, identity(2))


class TestPartialTrace:
    def test_product_state(self):
        rho_s, rho_e = random_density(1), random_density(2)
        joint = DensityOperator(kron(rho_s, rho_e))
        assert_allclose(partial_trace(joint, {0}).matrix, rho_s, atol=1e-12)

    def test_bell_state_both_sides(self):
        bell = bell_pair(2)
        rho = DensityOperator(np.outer(bell, bell.conj()))
        for keep in ({0}, {1}):
            assert_allclose(partial_trace(rho, keep).matrix, identity(2) / 2, atol=1e-12)

    def test_against_index_summation_oracle(self):
        rho = random_density(3)
        got = partial_trace_matrix(rho, {0, 2}, 3)
        # explicit sum over the traced (middle) index
        want = np.zeros((4, 4), dtype=complex)
        t = rho.reshape(2, 2, 2, 2, 2, 2)
        for a in range(2):
            for c in range(2):
                for ap in range(2):
                    for cp in range(2):
                        want[a * 2 + c, ap * 2 + cp] = sum(
                            t[a, b, c, ap, b, cp] for b in range(2)
                        )
        assert np.abs(got - want).max() < 1e-12
        assert abs(np.trace(got) - np.trace(rho)) < 1e-12

    def test_linearity_and_trace_preservation(self):
        r1, r2 = random_density(2), random_density(2)
        lhs = partial_trace_matrix(0.3 * r1 + 0.7 * r2, {1}, 2)
        rhs = 0.3 * partial_trace_matrix(r1, {1}, 2) + 0.7 * partial_trace_matrix(r2, {1}, 2)
        assert np.abs(lhs - rhs).max() < 1e-12

    def test_invalid_keep(self):
        rho = DensityOperator(random_density(2))
        with pytest.raises(ValueError):
            partial_trace(rho, set())
        with pytest.raises(ValueError):
            partial_trace(rho, {5})


class TestExpmHermitian:
    def test_zero_time_gives_identity(self):
        assert_allclose(expm_hermitian(random_herm(8), 0.0), identity(8), atol=1e-12)

    def test_pauli_z_closed_form(self):
        got = expm_hermitian(PAULI_Z, np.pi / 2)
        assert_allclose(got, np.diag([np.exp(-1j * np.pi / 2), np.exp(1j * np.pi / 2)]), atol=1e-12)

    def test_against_taylor_series_oracle(self):
        h = random_herm(8)
        t = 0.3
        got = expm_hermitian(h, t)
        term = identity(8)
        acc = identity(8).astype(complex)
        for n in range(1, 40):
            term = term @ (-1j * t * h) / n
            acc = acc + term
        assert np.abs(got - acc).max() < 1e-9

    def test_group_property(self):
        h = random_herm(6)
        lhs = expm_hermitian(h, 0.4) @ expm_hermitian(h, 0.9)
        assert np.abs(lhs - expm_hermitian(h, 1.3)).max() < 1e-9

    def test_unitarity(self):
        assert is_unitary(expm_hermitian(random_herm(16), 2.7))

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            expm_hermitian(np.array([[0, 1], [0, 0]], dtype=complex))


class TestStateTypes:
    def test_state_vector_norm_enforced(self):
        with pytest.raises(ValueError):
            StateVector(np.array([1.0, 1.0]))
        psi = StateVector(np.array([1.0, 1.0]) / np.sqrt(2))
        assert psi.num_qubits == 1

    def test_state_vector_dimension(self):
        with pytest.raises(ValueError):
            StateVector(np.array([1.0, 0.0, 0.0]))

    def test_density_validation(self):
        with pytest.raises(ValueError):
            DensityOperator(np.array([[0.5, 0.1], [0.3, 0.5]]))  # not Hermitian
        with pytest.raises(ValueError):
            DensityOperator(np.diag([0.7, 0.7]))  # trace 1.4
        with pytest.raises(ValueError):
            DensityOperator(np.diag([1.2, -0.2]))  # negative eigenvalue
        rho = DensityOperator(np.diag([0.25, 0.75]))
        assert rho.min_eigenvalue() == pytest.approx(0.25)

    def test_density_from_state(self):
        psi = StateVector(basis_state(2, 3))
        assert_allclose(psi.density().matrix, np.diag([0, 0, 0, 1.0]))


class TestWirePlumbing:
    def test_permute_qubits_state(self):
        # |01> with wire swap becomes |10>
        psi = basis_state(2, 0b01)
        assert_allclose(permute_qubits(psi, [1, 0]), basis_state(2, 0b10))

    def test_permute_qubits_operator_roundtrip(self):
        op = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
        perm = [2, 0, 1]
        inv = [perm.index(i) for i in range(3)]
        assert_allclose(permute_qubits(permute_qubits(op, perm), inv), op)

    def test_embed_operator_matches_kron(self):
        assert_allclose(embed_operator(PAULI_X, (1,), 2), kron(identity(2), PAULI_X))
        assert_allclose(embed_operator(CNOT, (0, 1), 2), CNOT)

    def test_embed_operator_nonadjacent(self):
        got = embed_operator(SWAP, (0, 2), 3)
        psi = basis_state(3, 0b100)
        assert_allclose(got @ psi, basis_state(3, 0b001))

    def test_apply_to_qubits_matches_embedding(self):
        psi = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        psi /= np.linalg.norm(psi)
        full = embed_operator(HADAMARD, (1,), 3) @ psi
        assert_allclose(apply_to_qubits(HADAMARD, (1,), psi), full, atol=1e-12)

    def test_swap_operator(self):
        assert_allclose(swap_operator(2), SWAP)


class TestChecks:
    def test_is_hermitian_and_unitary(self):
        assert is_hermitian(PAULI_X)
        assert not is_hermitian(1j * PAULI_X)
        assert is_unitary(HADAMARD)
        assert not is_unitary(2 * HADAMARD)
