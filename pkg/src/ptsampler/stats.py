"""Output statistics: rescaled-probability densities and KL against e^{-Np}.

A sampled bit-string x with exact probability p contributes at the rescaled
coordinate Np (N = 2^k).  Histogramming sampled strings directly estimates
the p-weighted density; weighting each sample by 1/(N p) instead unbiases it
to the per-string density, which is what the Porter-Thomas reference
describes.  Both estimators are available; the unbiased one is the default.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .ensembles import RngStream
from .process import ProcessSpec, sample_comp_basis

DEFAULT_NP_MAX = 10.0
DEFAULT_BINS = 50


def default_edges(np_max: float = DEFAULT_NP_MAX, bins: int = DEFAULT_BINS) -> np.ndarray:
    """Linear bins on [0, np_max] plus an overflow bin to infinity."""
    return np.append(np.linspace(0.0, np_max, bins + 1), np.inf)


def porter_thomas_mass(low: float, high: float) -> float:
    """Integral of e^{-u} over [low, high]."""
    if not 0 <= low < high:
        raise ValueError("need 0 <= low < high")
    upper = 0.0 if np.isinf(high) else np.exp(-high)
    return float(np.exp(-low) - upper)


def porter_thomas_reference(edges: np.ndarray) -> np.ndarray:
    """Per-bin masses of the ideal e^{-Np} density."""
    return np.array([porter_thomas_mass(a, b) for a, b in zip(edges[:-1], edges[1:])])


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Binned density of rescaled probabilities Np."""

    bin_edges: np.ndarray
    bin_masses: np.ndarray
    shots: int
    estimator_tag: str

    def __post_init__(self):
        edges = np.asarray(self.bin_edges, dtype=float)
        masses = np.asarray(self.bin_masses, dtype=float)
        object.__setattr__(self, "bin_edges", edges)
        object.__setattr__(self, "bin_masses", masses)
        if edges.ndim != 1 or np.any(np.diff(edges) <= 0):
            raise ValueError("bin edges must be strictly increasing")
        if masses.shape != (edges.shape[0] - 1,):
            raise ValueError("need one mass per bin")
        if np.any(masses < 0):
            raise ValueError("bin masses must be nonnegative")
        if abs(masses.sum() - 1.0) > 1e-9:
            raise ValueError("bin masses must sum to 1")


def _extract_probs(samples) -> np.ndarray:
    if isinstance(samples, np.ndarray) and samples.ndim == 1:
        return samples.astype(float)
    return np.array([float(p) for _, p in samples])


def _histogram_edges(edges: np.ndarray) -> np.ndarray:
    """np.histogram rejects an infinite top edge; cap it at float max."""
    e = np.asarray(edges, dtype=float).copy()
    if np.isinf(e[-1]):
        e[-1] = np.finfo(float).max
    return e


def build_distribution(
    samples,
    k: int,
    edges: np.ndarray | None = None,
    estimator: str = "weighted",
) -> EmpiricalDistribution:
    """Histogram of Np over sampled strings.

    `samples` is either a plain array of exact probabilities or an iterable
    of (bit-string, probability) pairs; `k` fixes the rescaling N = 2^k.
    `estimator` is "weighted" (each sample carries 1/(N p), unbiasing the
    sampling measure) or "direct" (raw histogram of sampled values).
    """
    probs = _extract_probs(samples)
    if probs.size == 0:
        raise ValueError("no samples")
    if np.any(probs <= 0):
        raise ValueError("zero or negative probability encountered")
    if edges is None:
        edges = default_edges()
    n = 2.0**k
    values = n * probs
    if estimator == "weighted":
        weights = 1.0 / values
    elif estimator == "direct":
        weights = np.ones_like(values)
    else:
        raise ValueError(f"unknown estimator {estimator!r}")
    hist, _ = np.histogram(values, bins=_histogram_edges(edges), weights=weights)
    total = hist.sum()
    if total == 0:
        raise ValueError("all samples fell outside the bins")
    return EmpiricalDistribution(edges, hist / total, probs.size, estimator)


def enumerate_distribution(
    all_probs: np.ndarray, k: int, edges: np.ndarray | None = None
) -> EmpiricalDistribution:
    """Exact density from the full probability table (one weight per string)."""
    probs = np.asarray(all_probs, dtype=float)
    if edges is None:
        edges = default_edges()
    values = (2.0**k) * probs
    hist, _ = np.histogram(values, bins=_histogram_edges(edges))
    return EmpiricalDistribution(edges, hist / hist.sum(), probs.size, "enumerated")


def kl_divergence(p: EmpiricalDistribution, q: np.ndarray) -> float:
    """sum_i P_i ln(P_i/Q_i), restricted to bins with P_i > 0."""
    q = np.asarray(q, dtype=float)
    masses = p.bin_masses
    if q.shape != masses.shape:
        raise ValueError("reference masses must match the binning")
    support = masses > 0
    if np.any(q[support] <= 0):
        raise ValueError("reference vanishes on the support of p")
    return float(np.sum(masses[support] * np.log(masses[support] / q[support])))


@dataclass(frozen=True)
class KlReport:
    """Mean and spread of the KL divergence at one sampling depth."""

    k: int
    mean_kl: float
    std_kl: float
    repeats: int

    def __post_init__(self):
        if self.repeats < 1 or self.std_kl < 0:
            raise ValueError("invalid report")


def _process_factory(model: str):
    from .models import gue_process, haar_process

    if model == "haar":
        return haar_process
    if model == "gue":
        return gue_process
    raise ValueError(f"unknown sweep model {model!r}")


def sample_np_distribution(
    spec: ProcessSpec,
    shots: int,
    rng: RngStream,
    edges: np.ndarray | None = None,
    estimator: str = "weighted",
) -> EmpiricalDistribution:
    """Sample a process in the computational basis at t_1..t_k and bin Np.

    The slot at t_0 is left unmeasured (the initial state is |0...0>, so it
    carries no information), giving k-bit strings and N = 2^k.
    """
    k = spec.num_steps
    _, probs = sample_comp_basis(spec, shots, rng, measured_slots=range(1, k + 1))
    return build_distribution(probs, k, edges=edges, estimator=estimator)


def sweep_sample(
    model: str, env_qubits: int, k: int, rep: int, shots: int, rng: RngStream
) -> tuple:
    """Bits and exact probabilities for one (k, repeat) sweep work item.

    The process draw and the shot noise use disjoint child streams keyed by
    (k, rep), so work items can run in any order or in parallel; t_0 is left
    unmeasured as in :func:`sample_np_distribution`.
    """
    stream = rng.child(k, rep)
    spec = _process_factory(model)(env_qubits, k, stream)
    return sample_comp_basis(
        spec, shots, stream.child(1_000_003), measured_slots=range(1, k + 1)
    )


def k_sweep(
    model: str,
    k_values,
    repeats: int,
    shots: int,
    rng: RngStream,
    env_qubits: int = 5,
    edges: np.ndarray | None = None,
    max_workers: int = 1,
) -> list:
    """KL-versus-depth summary: `repeats` fresh processes per k, `shots` each.

    Work items get disjoint child streams keyed by (k, repeat), so results
    do not depend on scheduling order or worker count.
    """
    if edges is None:
        edges = default_edges()
    reference = porter_thomas_reference(edges)
    k_values = [int(k) for k in k_values]

    def one(k: int, rep: int) -> float:
        _, probs = sweep_sample(model, env_qubits, k, rep, shots, rng)
        dist = build_distribution(probs, k, edges=edges)
        return kl_divergence(dist, reference)

    work = [(k, rep) for k in k_values for rep in range(repeats)]
    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            kls = list(pool.map(lambda kr: one(*kr), work))
    else:
        kls = [one(*kr) for kr in work]
    reports = []
    for idx, k in enumerate(k_values):
        vals = np.array(kls[idx * repeats : (idx + 1) * repeats])
        reports.append(KlReport(k, float(vals.mean()), float(vals.std()), repeats))
    return reports
