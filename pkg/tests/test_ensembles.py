import numpy as np
import pytest
from scipy import stats as sps

from ptsampler.ensembles import (
    RngStream,
    gue_hamiltonian,
    haar_unitary,
    random_timestep,
)
from ptsampler.linalg import is_hermitian, is_unitary


class TestRngStream:
    def test_same_key_same_sequence(self):
        a = RngStream(42, 7).gen.random(100)
        b = RngStream(42, 7).gen.random(100)
        assert np.array_equal(a, b)

    def test_children_are_deterministic_and_distinct(self):
        base = RngStream(42)
        c1 = base.child(3, 5)
        c2 = RngStream(42).child(3, 5)
        assert c1.stream_id == c2.stream_id
        assert base.child(3, 5).stream_id != base.child(5, 3).stream_id
        assert base.child(0).stream_id != base.child(1).stream_id

    def test_draws_advance_state(self):
        s = RngStream(1)
        assert s.gen.random() != s.gen.random()


class TestHaarUnitary:
    def test_unitarity(self):
        rng = RngStream(5)
        for dim in (2, 3, 8):
            assert is_unitary(haar_unitary(dim, rng))

    def test_rejects_small_dim(self):
        with pytest.raises(ValueError):
            haar_unitary(1, RngStream(0))

    def test_first_moment(self):
        # E|U_00|^2 = 1/d; var of |U|^2 is 2/(d(d+1)) - 1/d^2
        rng = RngStream(11)
        draws = 10_000
        vals = np.array([abs(haar_unitary(4, rng)[0, 0]) ** 2 for _ in range(draws)])
        se = np.sqrt((2 / (4 * 5) - 1 / 16) / draws)
        assert abs(vals.mean() - 0.25) < 3 * se

    def test_eigenphase_uniformity(self):
        rng = RngStream(13)
        phases = []
        for _ in range(10_000):
            w = np.linalg.eigvals(haar_unitary(2, rng))
            phases.extend(np.mod(np.angle(w), 2 * np.pi))
        stat = sps.kstest(np.array(phases) / (2 * np.pi), "uniform")
        assert stat.pvalue > 0.01

    def test_left_invariance_first_moment(self):
        # fixing V and averaging |(VU)_00|^2 must agree with the Haar moment 1/d
        rng = RngStream(17)
        v = haar_unitary(4, rng)
        draws = 10_000
        vals = np.array(
            [abs((v @ haar_unitary(4, rng))[0, 0]) ** 2 for _ in range(draws)]
        )
        se = np.sqrt((2 / 20 - 1 / 16) / draws)
        assert abs(vals.mean() - 0.25) < 3 * se


class TestGueHamiltonian:
    def test_hermitian_by_construction(self):
        h = gue_hamiltonian(16, False, RngStream(3))
        assert np.abs(h - h.conj().T).max() == 0.0
        assert np.abs(np.linalg.eigvalsh(h).imag).max() < 1e-10

    def test_cutoff_scale_factor(self):
        # same stream: the cutoff draw is the uncut draw times exp(-|i-j|)
        uncut = gue_hamiltonian(8, False, RngStream(9))
        cut = gue_hamiltonian(8, True, RngStream(9))
        ratio = cut[0, 3] / uncut[0, 3]
        assert abs(ratio - np.exp(-3)) < 1e-12
        assert abs(abs(ratio) - 0.0498) < 1e-3
        idx = np.arange(8)
        mask = np.exp(-np.abs(idx[:, None] - idx[None, :]))
        assert np.abs(cut - uncut * mask).max() < 1e-12

    def test_cutoff_length_parameter(self):
        uncut = gue_hamiltonian(8, False, RngStream(9))
        cut = gue_hamiltonian(8, True, RngStream(9), cutoff_length=6.0)
        assert abs(cut[0, 3] / uncut[0, 3] - np.exp(-0.5)) < 1e-12

    def test_semicircle_law(self):
        rng = RngStream(21)
        dim, draws = 64, 200
        eigs = np.concatenate(
            [np.linalg.eigvalsh(gue_hamiltonian(dim, False, rng)) for _ in range(draws)]
        )
        x = eigs / np.sqrt(dim)
        edges = np.linspace(-2.2, 2.2, 23)
        emp, _ = np.histogram(x, bins=edges)
        emp = emp / emp.sum()

        def cdf(v):
            v = np.clip(v, -2, 2)
            return 0.5 + (v * np.sqrt(4 - v**2) + 4 * np.arcsin(v / 2)) / (4 * np.pi)

        ref = np.diff([cdf(e) for e in edges])
        tvd = 0.5 * np.abs(emp - ref).sum()
        assert tvd < 0.1

    def test_moment_conventions(self):
        # diagonal real N(0,1); off-diagonal components sd 1/sqrt(2)
        rng = RngStream(33)
        h = gue_hamiltonian(400, False, rng)
        diag = np.diagonal(h)
        assert np.abs(diag.imag).max() == 0.0
        assert abs(diag.real.std() - 1.0) < 0.15
        off = h[np.triu_indices(400, k=1)]
        assert abs(off.real.std() - 1 / np.sqrt(2)) < 0.02
        assert abs(off.imag.std() - 1 / np.sqrt(2)) < 0.02


class TestRandomTimestep:
    def test_range_and_moments(self):
        rng = RngStream(8)
        draws = np.array([random_timestep(rng) for _ in range(100_000)])
        assert draws.min() > 0 and draws.max() < 2 * np.pi
        se = 2 * np.pi / np.sqrt(12 * draws.size)
        assert abs(draws.mean() - np.pi) < 3 * se

    def test_determinism(self):
        a = [random_timestep(RngStream(4, 2)) for _ in range(3)]
        b = [random_timestep(RngStream(4, 2)) for _ in range(3)]
        # fresh streams restart the sequence
        assert a[0] == b[0]
        s1, s2 = RngStream(4, 2), RngStream(4, 2)
        assert [random_timestep(s1) for _ in range(5)] == [
            random_timestep(s2) for _ in range(5)
        ]
