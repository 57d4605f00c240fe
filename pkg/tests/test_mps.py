import numpy as np
import pytest
from numpy.testing import assert_allclose

from ptsampler.ensembles import RngStream
from ptsampler.mps import (
    MatrixProductState,
    bond_profile,
    mps_sample,
    random_mps,
    sample_mps_bitstrings,
)


def zeros_mps(n):
    t = np.zeros((1, 2, 1), dtype=complex)
    t[0, 0, 0] = 1.0
    return MatrixProductState(tuple(t.copy() for _ in range(n)))


class TestConstruction:
    def test_bond_profile(self):
        assert bond_profile(10, 32) == [1, 2, 4, 8, 16, 32, 16, 8, 4, 2, 1]
        assert bond_profile(12, 20)[6] == 20

    def test_random_mps_respects_chi(self):
        psi = random_mps(12, 20, RngStream(0))
        assert psi.max_bond == 20
        assert psi.bond_dims[0] == psi.bond_dims[-1] == 1

    def test_dense_contraction_unit_norm(self):
        psi = random_mps(10, 32, RngStream(1))
        v = psi.to_statevector()
        assert v.shape == (1024,)
        assert abs(np.linalg.norm(v) - 1.0) < 1e-8

    def test_chi_one_is_product_state(self):
        psi = random_mps(6, 1, RngStream(2))
        v = np.abs(psi.to_statevector()) ** 2
        # marginal product check: joint equals product of single-site marginals
        t = v.reshape((2,) * 6)
        marg = [t.sum(axis=tuple(j for j in range(6) if j != i)) for i in range(6)]
        prod = marg[0]
        for m in marg[1:]:
            prod = np.multiply.outer(prod, m)
        assert np.abs(t - prod).max() < 1e-10

    def test_validation(self):
        with pytest.raises(ValueError):
            MatrixProductState((np.zeros((2, 2, 1)),))  # bad left boundary
        with pytest.raises(ValueError):
            random_mps(0, 4, RngStream(0))


class TestSampling:
    def test_deterministic_all_zero_state(self):
        psi = zeros_mps(5)
        assert mps_sample(psi, RngStream(3)) == (0, 0, 0, 0, 0)

    def test_matches_dense_distribution(self):
        psi = random_mps(8, 8, RngStream(4))
        dense = np.abs(psi.to_statevector()) ** 2
        bits, probs = sample_mps_bitstrings(psi, 100_000, RngStream(5))
        idx = np.zeros(bits.shape[0], dtype=np.int64)
        for j in range(8):
            idx = (idx << 1) | bits[:, j]
        emp = np.bincount(idx, minlength=256) / bits.shape[0]
        assert 0.5 * np.abs(emp - dense).sum() < 0.02
        # exact probability column
        assert np.abs(dense[idx] - probs).max() < 1e-10

    def test_site0_marginal_matches_reduced_density(self):
        psi = random_mps(7, 6, RngStream(6))
        v = psi.to_statevector().reshape(2, -1)
        p0 = float(np.vdot(v[0], v[0]).real)
        bits, _ = sample_mps_bitstrings(psi, 10_000, RngStream(7))
        emp = float(np.mean(bits[:, 0] == 0))
        se = np.sqrt(p0 * (1 - p0) / 10_000)
        assert abs(emp - p0) < 3 * se

    def test_marginal_sampling_probabilities(self):
        # sampling a prefix marginalizes the tail
        psi = random_mps(6, 4, RngStream(8))
        dense = np.abs(psi.to_statevector()) ** 2
        marg = dense.reshape(8, 8).sum(axis=1)  # first three sites
        bits, probs = sample_mps_bitstrings(psi, 2000, RngStream(9), num_sampled=3)
        idx = (bits[:, 0] << 2) | (bits[:, 1] << 1) | bits[:, 2]
        assert np.abs(marg[idx] - probs).max() < 1e-10

    def test_partial_sampling_peaked_near_one(self):
        # few sampled sites of a maximal-bond state: rescaled values pile near Np=1
        psi = random_mps(12, 64, RngStream(10))
        _, probs = sample_mps_bitstrings(psi, 5000, RngStream(11), num_sampled=7)
        np_vals = (2.0**7) * probs
        frac_near_one = np.mean((np_vals > 0.5) & (np_vals < 1.5))
        assert frac_near_one > 0.5  # Porter-Thomas would give ~0.38
