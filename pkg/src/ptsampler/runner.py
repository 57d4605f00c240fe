"""Experiment orchestration: dispatch, deterministic outputs, manifests.

Every run writes its artifacts atomically into the config's output
directory and finishes with a ``manifest.json`` echoing the config and
recording a checksum per output.  Re-running with the same config and seed
reproduces every emitted byte; only the manifest's wall-time field varies.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import gcd
from pathlib import Path

import numpy as np
from scipy import stats as sps

from ._version import __version__
from .config import ConfigError, ExperimentConfig, k_values_of, validate
from .ensembles import RngStream
from .instruments import choi_of, instrument_chois
from .mps import random_mps, sample_mps_bitstrings
from .models import (
    ShorSpec,
    dephasing_demo,
    iqp_classical_sample_batch,
    iqp_exact_probability,
    iqp_process,
    measured_phase_integer,
    order_from_phase,
    random_iqp_circuit,
    shor_comp_basis_schedule,
    shor_factor_attempt,
    shor_process,
    PswapExperiment,
    pswap_extraction,
)
from .linalg import StateVector
from .process import (
    born_rule_contract,
    build_choi,
    enumerate_comp_basis,
    random_cp_instrument,
    random_process_spec,
    sample_trajectory,
    trajectory_probability,
)
from .stats import (
    build_distribution,
    default_edges,
    kl_divergence,
    porter_thomas_reference,
    sweep_sample,
)


class BudgetError(RuntimeError):
    """Config is valid but exceeds the declared compute budget."""


@dataclass
class RunManifest:
    experiment: str
    config: dict
    version: str
    wall_time_s: float
    outputs: dict


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("PTSAMPLER_THREADS", "1")))
    except ValueError:
        return 1


def _fmt(x) -> str:
    # plain-Python conversions keep the bytes stable across numpy versions
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return str(x)


class _Writer:
    """Serialized atomic file writes with checksum bookkeeping."""

    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.checksums: dict = {}
        out_dir.mkdir(parents=True, exist_ok=True)

    def write_text(self, name: str, text: str):
        data = text.encode()
        tmp = self.out_dir / f".{name}.tmp-{os.getpid()}"
        tmp.write_bytes(data)
        os.replace(tmp, self.out_dir / name)
        self.checksums[name] = hashlib.sha256(data).hexdigest()

    def write_csv(self, name: str, header, rows):
        lines = [",".join(header)]
        lines += [",".join(_fmt(v) for v in row) for row in rows]
        self.write_text(name, "\n".join(lines) + "\n")


def _hist_rows(edges, masses, reference):
    return [
        (float(lo), float(hi), float(m), float(q))
        for lo, hi, m, q in zip(edges[:-1], edges[1:], masses, reference)
    ]


def _bits_str(row) -> str:
    return "".join(str(int(b)) for b in row)


def _edges_for(cfg: ExperimentConfig) -> np.ndarray:
    return default_edges(
        np_max=float(cfg.get("np_max", 10.0)), bins=int(cfg.get("bins", 50))
    )


# ---------------------------------------------------------------------------
# Experiment bodies
# ---------------------------------------------------------------------------


def _run_sweep(cfg: ExperimentConfig, writer: _Writer, model: str):
    env = int(cfg.parameters["env_qubits"])
    shots = int(cfg.parameters["shots"])
    repeats = int(cfg.parameters["repeats"])
    ks = k_values_of(cfg)
    edges = _edges_for(cfg)
    reference = porter_thomas_reference(edges)
    rng = RngStream(cfg.seed)
    emit = bool(cfg.get("emit_samples", False))

    def one(k, rep):
        bits, probs = sweep_sample(model, env, k, rep, shots, rng)
        dist = build_distribution(probs, k, edges=edges)
        return bits, probs, dist.bin_masses, kl_divergence(dist, reference)

    work = [(k, rep) for k in ks for rep in range(repeats)]
    workers = _threads()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda kr: one(*kr), work))
    else:
        results = [one(*kr) for kr in work]

    sweep_rows = []
    for idx, k in enumerate(ks):
        chunk = results[idx * repeats : (idx + 1) * repeats]
        kls = np.array([c[3] for c in chunk])
        sweep_rows.append((k, float(kls.mean()), float(kls.std()), repeats, shots, cfg.seed))
        masses = np.mean([c[2] for c in chunk], axis=0)
        writer.write_csv(
            f"hist_k{k}.csv", ("np_low", "np_high", "mass", "pt_mass"),
            _hist_rows(edges, masses, reference),
        )
        if emit:
            rows = []
            for bits, probs, _, _ in chunk:
                rows += [(_bits_str(b), float(p)) for b, p in zip(bits, probs)]
            writer.write_csv(f"samples_k{k}.csv", ("bits", "probability"), rows)
    writer.write_csv(
        "sweep.csv", ("k", "mean_kl", "std_kl", "repeats", "shots", "seed"), sweep_rows
    )


def _run_mps(cfg: ExperimentConfig, writer: _Writer):
    sites = int(cfg.parameters["num_sites"])
    chi = int(cfg.parameters["chi"])
    shots = int(cfg.parameters["shots"])
    draws = int(cfg.parameters["draws"])
    sampled = int(cfg.get("num_sampled", sites))
    edges = _edges_for(cfg)
    reference = porter_thomas_reference(edges)
    rng = RngStream(cfg.seed)
    emit = bool(cfg.get("emit_samples", False))
    kl_rows, all_masses, sample_rows = [], [], []
    for d in range(draws):
        stream = rng.child(d)
        psi = random_mps(sites, chi, stream)
        bits, probs = sample_mps_bitstrings(psi, shots, stream.child(1), num_sampled=sampled)
        dist = build_distribution(probs, sampled, edges=edges)
        kl_rows.append((d, chi, float(kl_divergence(dist, reference))))
        all_masses.append(dist.bin_masses)
        if emit:
            sample_rows += [(_bits_str(b), float(p)) for b, p in zip(bits, probs)]
    writer.write_csv("kl.csv", ("draw", "chi", "kl"), kl_rows)
    writer.write_csv(
        "hist.csv", ("np_low", "np_high", "mass", "pt_mass"),
        _hist_rows(edges, np.mean(all_masses, axis=0), reference),
    )
    if emit:
        writer.write_csv("samples.csv", ("bits", "probability"), sample_rows)


def _run_iqp(cfg: ExperimentConfig, writer: _Writer):
    n = int(cfg.parameters["n"])
    k = int(cfg.parameters["k"])
    shots = int(cfg.parameters["shots"])
    gates = int(cfg.get("gates", 3 * n * (n - 1) // 2))
    rng = RngStream(cfg.seed)
    circuit = random_iqp_circuit(n, gates, rng.child(0))
    spec = iqp_process(circuit, k)
    exact = enumerate_comp_basis(spec)
    bits = iqp_classical_sample_batch(circuit, k, shots, rng.child(1))
    idx = np.zeros(shots, dtype=np.int64)
    for j in range(k + 1):
        idx = (idx << 1) | bits[:, j]
    counts = np.bincount(idx, minlength=2 ** (k + 1))
    tvd = 0.5 * float(np.abs(counts / shots - exact).sum())
    writer.write_csv(
        "iqp_report.csv", ("n", "k", "gates", "shots", "tvd"), [(n, k, gates, shots, tvd)]
    )
    if bool(cfg.get("emit_samples", False)):
        cache: dict = {}
        rows = []
        for b in bits:
            key = _bits_str(b)
            if key not in cache:
                cache[key] = iqp_exact_probability(circuit, k, [int(c) for c in key])
            rows.append((key, float(cache[key])))
        writer.write_csv("samples.csv", ("bits", "probability"), rows)


def _run_iqp_classical(cfg: ExperimentConfig, writer: _Writer):
    n = int(cfg.parameters["n"])
    k = int(cfg.parameters["k"])
    shots = int(cfg.parameters["shots"])
    gates = int(cfg.get("gates", 3 * n * (n - 1) // 2))
    rng = RngStream(cfg.seed)
    circuit = random_iqp_circuit(n, gates, rng.child(0))
    bits = iqp_classical_sample_batch(circuit, k, shots, rng.child(1))
    ones = bits.sum(axis=0)
    writer.write_csv(
        "marginals.csv", ("slot", "ones", "shots"),
        [(j, int(ones[j]), shots) for j in range(k + 1)],
    )
    if bool(cfg.get("emit_samples", False)):
        cache: dict = {}
        rows = []
        for b in bits:
            key = _bits_str(b)
            if key not in cache:
                cache[key] = iqp_exact_probability(circuit, k, [int(c) for c in key])
            rows.append((key, float(cache[key])))
        writer.write_csv("samples.csv", ("bits", "probability"), rows)


def _run_shor(cfg: ExperimentConfig, writer: _Writer):
    n_val = int(cfg.parameters["N"])
    mode = str(cfg.get("mode", "feedforward"))
    rng = RngStream(cfg.seed)
    fixed_a = cfg.get("a")
    if mode == "computational":
        shots = int(cfg.get("shots", 10_000))
        a = int(fixed_a) if fixed_a is not None else 7
        spec = ShorSpec(n_val, a)
        proc, _ = shor_process(spec)
        schedule = shor_comp_basis_schedule()
        counts = np.zeros(spec.num_steps + 1, dtype=np.int64)
        for s in range(shots):
            rec = sample_trajectory(proc, schedule, rng.child(s))
            counts += np.array(rec.outcomes)
        rows = []
        for j, ones in enumerate(counts):
            zeros = shots - int(ones)
            chi2 = (zeros - shots / 2) ** 2 / (shots / 2) + (ones - shots / 2) ** 2 / (shots / 2)
            rows.append((j, zeros, int(ones), float(chi2), float(sps.chi2.sf(chi2, df=1))))
        writer.write_csv("fairness.csv", ("slot", "zeros", "ones", "chi_sq", "p_value"), rows)
        return
    attempts = int(cfg.get("attempts", 40))
    rows, factors = [], None
    for t in range(attempts):
        stream = rng.child(t)
        if fixed_a is not None:
            spec = ShorSpec(n_val, int(fixed_a))
            proc, schedule = shor_process(spec)
            rec = sample_trajectory(proc, schedule, stream)
            y = measured_phase_integer(rec.outcomes)
            r = order_from_phase(y, spec.num_steps, n_val, spec.a)
            result = None
            if r is not None and r % 2 == 0:
                x = pow(spec.a, r // 2, n_val)
                if x != n_val - 1:
                    for g in (gcd(x - 1, n_val), gcd(x + 1, n_val)):
                        if 1 < g < n_val:
                            result = tuple(sorted((g, n_val // g)))
                            break
            rows.append((t, spec.a, y, r if r is not None else -1, result is not None))
        else:
            result = shor_factor_attempt(n_val, stream)
            rows.append((t, -1, -1, -1, result is not None))
        if result is not None:
            factors = result
            break
    writer.write_csv("attempts.csv", ("attempt", "a", "y", "order", "success"), rows)
    if factors is not None:
        writer.write_csv("factors.csv", ("p", "q"), [factors])
    else:
        writer.write_csv("factors.csv", ("p", "q"), [])


def _run_pswap(cfg: ExperimentConfig, writer: _Writer):
    theta = float(cfg.parameters["theta"])
    k = int(cfg.parameters["k"])
    beta_sq = float(cfg.parameters["beta_sq"])
    shots = int(cfg.parameters["shots"])
    rng = RngStream(cfg.seed)
    env = StateVector(np.array([np.sqrt(1 - beta_sq), np.sqrt(beta_sq)], dtype=complex))
    exp = PswapExperiment(theta, k, env)
    res = pswap_extraction(exp, rng, shots=shots)
    writer.write_csv(
        "pswap.csv",
        ("theta", "k", "beta_sq", "exact", "closed_form", "empirical", "shots"),
        [(theta, k, beta_sq, res.exact_prob, exp.closed_form_ground_probability(),
          res.empirical_prob, shots)],
    )


def _run_dephasing(cfg: ExperimentConfig, writer: _Writer):
    env = int(cfg.parameters["env_qubits"])
    t_samples = int(cfg.parameters["t_samples"])
    rng = RngStream(cfg.seed)
    records = dephasing_demo(env, t_samples, rng)
    writer.write_csv("dephasing.csv", ("t", "xy_squared", "overlap_squared"), records)


def _run_born_check(cfg: ExperimentConfig, writer: _Writer):
    instances = int(cfg.parameters["instances"])
    env_max = int(cfg.get("env_max", 2))
    k_max = int(cfg.get("k_max", 3))
    rows = born_check_rows(instances, cfg.seed, env_max, k_max)
    writer.write_csv("born.csv", ("instance", "env_qubits", "k", "max_abs_diff"), rows)


def born_check_rows(instances: int, seed: int, env_max: int = 2, k_max: int = 3) -> list:
    """Trajectory-versus-Choi probabilities on random specs and instruments.

    For every instance all outcome strings are compared; rows carry the
    per-instance worst absolute deviation.
    """
    rng = RngStream(seed, stream_id=0xB0C)
    rows = []
    for i in range(instances):
        stream = rng.child(i)
        g = stream.gen
        env = 1 + int(g.integers(env_max))
        k = 1 + int(g.integers(k_max))
        spec = random_process_spec(env, k, stream)
        n_kraus = 1 + i % 2
        insts = [random_cp_instrument(2, 2, stream, n_kraus=n_kraus) for _ in range(k + 1)]
        choi = build_choi(spec)
        chois = [instrument_chois(inst) for inst in insts[:k]]
        worst = 0.0
        for code in range(2 ** (k + 1)):
            outs = [(code >> (k - j)) & 1 for j in range(k + 1)]
            p_traj = trajectory_probability(spec, insts, outs)
            effect = insts[k].outcomes[outs[k]].effect()
            p_choi = born_rule_contract(
                choi, effect, [chois[j][outs[j]] for j in range(k)]
            )
            worst = max(worst, abs(p_traj - p_choi))
        rows.append((i, env, k, worst))
    return rows


_BODIES = {
    "haar": lambda cfg, w: _run_sweep(cfg, w, "haar"),
    "gue": lambda cfg, w: _run_sweep(cfg, w, "gue"),
    "iqp": _run_iqp,
    "iqp-classical": _run_iqp_classical,
    "shor": _run_shor,
    "pswap": _run_pswap,
    "mps": _run_mps,
    "dephasing": _run_dephasing,
    "born-check": _run_born_check,
}


def run(cfg: ExperimentConfig) -> RunManifest:
    """Execute a validated config; writes outputs and the manifest."""
    diags = validate(cfg)
    if diags:
        budget = [d for d in diags if "budget" in d or "caps it" in d]
        if budget and len(budget) == len(diags):
            raise BudgetError("; ".join(diags))
        raise ConfigError("; ".join(diags))
    writer = _Writer(Path(cfg.output_dir))
    start = time.perf_counter()
    _BODIES[cfg.experiment](cfg, writer)
    wall = time.perf_counter() - start
    manifest = RunManifest(
        experiment=cfg.experiment,
        config={"experiment": cfg.experiment, "seed": cfg.seed,
                "output_dir": str(cfg.output_dir), **cfg.parameters},
        version=__version__,
        wall_time_s=wall,
        outputs=dict(sorted(writer.checksums.items())),
    )
    blob = json.dumps(
        {
            "experiment": manifest.experiment,
            "config": manifest.config,
            "artifact_version": manifest.version,
            "wall_time_s": manifest.wall_time_s,
            "outputs": manifest.outputs,
        },
        indent=2,
        sort_keys=True,
    )
    writer.write_text("manifest.json", blob + "\n")
    return manifest
