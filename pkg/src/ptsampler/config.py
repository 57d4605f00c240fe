"""Experiment configuration: flat key=value files, validation diagnostics.

One experiment per file; lines are ``key=value``, blank lines and ``#``
comments ignored.  ``k_range`` takes ``start:stop:step`` (inclusive stop).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd
from pathlib import Path

EXPERIMENTS = (
    "haar",
    "gue",
    "iqp",
    "iqp-classical",
    "shor",
    "pswap",
    "mps",
    "dephasing",
    "born-check",
)

# keys every experiment accepts
_COMMON = {"experiment", "seed", "output_dir", "emit_samples", "np_max", "bins"}

_REQUIRED = {
    "haar": {"env_qubits", "shots", "repeats"},
    "gue": {"env_qubits", "shots", "repeats"},
    "iqp": {"n", "k", "shots"},
    "iqp-classical": {"n", "k", "shots"},
    "shor": {"N"},
    "pswap": {"theta", "k", "beta_sq", "shots"},
    "mps": {"num_sites", "chi", "shots", "draws"},
    "dephasing": {"env_qubits", "t_samples"},
    "born-check": {"instances"},
}

_OPTIONAL = {
    "haar": {"k", "k_range"},
    "gue": {"k", "k_range"},
    "iqp": {"gates"},
    "iqp-classical": {"gates"},
    "shor": {"a", "mode", "shots", "attempts"},
    "pswap": set(),
    "mps": {"num_sampled"},
    "dephasing": set(),
    "born-check": {"env_max", "k_max"},
}

# compute-budget ceilings; validate() refuses configs beyond these
MAX_ENV_QUBITS = 12
MAX_WORK_UNITS = 2 * 10**8  # max_k * shots * repeats
MAX_SHOR_N = 1024
MAX_MPS_SITES = 24


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass
class ExperimentConfig:
    experiment: str
    parameters: dict
    seed: int
    output_dir: Path = field(default_factory=lambda: Path("runs"))

    def get(self, key, default=None):
        return self.parameters.get(key, default)


def _parse_value(raw: str):
    raw = raw.strip()
    low = raw.lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        pass
    return raw


def parse_config_text(text: str) -> ExperimentConfig:
    pairs = {}
    for ln, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {ln}: expected key=value, got {line!r}")
        key, raw = line.split("=", 1)
        key = key.strip()
        if key in pairs:
            raise ConfigError(f"line {ln}: duplicate key {key!r}")
        pairs[key] = _parse_value(raw)
    if "experiment" not in pairs:
        raise ConfigError("missing required key 'experiment'")
    if "seed" not in pairs:
        raise ConfigError("missing required key 'seed'")
    experiment = str(pairs.pop("experiment"))
    seed = pairs.pop("seed")
    if not isinstance(seed, int):
        raise ConfigError("seed must be an integer")
    out_dir = Path(str(pairs.pop("output_dir", "runs")))
    return ExperimentConfig(experiment, pairs, seed, out_dir)


def parse_config_file(path) -> ExperimentConfig:
    return parse_config_text(Path(path).read_text())


def parse_k_range(raw) -> list:
    parts = str(raw).split(":")
    if len(parts) != 3:
        raise ConfigError("k_range must be start:stop:step")
    start, stop, step = (int(p) for p in parts)
    if step <= 0 or stop < start:
        raise ConfigError("k_range must be increasing with positive step")
    return list(range(start, stop + 1, step))


def k_values_of(cfg: ExperimentConfig) -> list:
    if "k_range" in cfg.parameters:
        return parse_k_range(cfg.parameters["k_range"])
    if "k" in cfg.parameters:
        return [int(cfg.parameters["k"])]
    raise ConfigError("config needs k or k_range")


def validate(cfg: ExperimentConfig) -> list:
    """Diagnostics for a config without executing it (empty list = valid)."""
    diags = []
    exp = cfg.experiment
    if exp not in EXPERIMENTS:
        return [f"unknown experiment {exp!r}; choose from {', '.join(EXPERIMENTS)}"]
    params = cfg.parameters
    missing = _REQUIRED[exp] - params.keys()
    for key in sorted(missing):
        diags.append(f"missing required parameter {key!r}")
    allowed = _REQUIRED[exp] | _OPTIONAL[exp] | _COMMON
    for key in sorted(params.keys() - allowed):
        diags.append(f"unknown parameter {key!r} for experiment {exp!r}")

    def num(key, lo=None, hi=None, kind=int):
        if key not in params:
            return None
        v = params[key]
        if not isinstance(v, (int, float)) or (kind is int and not isinstance(v, int)):
            diags.append(f"{key} must be {'an integer' if kind is int else 'numeric'}")
            return None
        if lo is not None and v < lo:
            diags.append(f"{key} must be >= {lo}")
            return None
        if hi is not None and v > hi:
            diags.append(f"{key} is {v}; compute budget caps it at {hi}")
            return None
        return v

    if exp in ("haar", "gue"):
        num("env_qubits", 1, MAX_ENV_QUBITS)
        shots = num("shots", 1)
        repeats = num("repeats", 1)
        if "k" not in params and "k_range" not in params:
            diags.append("config needs k or k_range")
        else:
            try:
                ks = k_values_of(cfg)
                if min(ks) < 1:
                    diags.append("k values must be >= 1")
                elif shots and repeats and max(ks) * shots * repeats > MAX_WORK_UNITS:
                    diags.append(
                        f"k*shots*repeats exceeds the compute budget ({MAX_WORK_UNITS})"
                    )
            except ConfigError as err:
                diags.append(str(err))
    elif exp in ("iqp", "iqp-classical"):
        num("n", 2, 20 if exp == "iqp-classical" else 12)
        num("k", 1, 10**4 if exp == "iqp-classical" else 18)  # dense side enumerates 2^(k+1)
        num("shots", 1, 10**7)
        num("gates", 0, 10**5)
    elif exp == "shor":
        n_val = params.get("N")
        if isinstance(n_val, int):
            if n_val > MAX_SHOR_N:
                diags.append(f"N is {n_val}; desk scale caps it at {MAX_SHOR_N}")
            elif n_val % 2 == 0 or n_val < 4:
                diags.append("N must be odd composite")
            else:
                from .models.shor import validate_factoring_target

                try:
                    validate_factoring_target(n_val)
                except ValueError as err:
                    diags.append(str(err))
                a = params.get("a")
                if isinstance(a, int) and (not 1 < a < n_val or gcd(a, n_val) != 1):
                    diags.append("a must satisfy 1 < a < N and gcd(a, N) = 1")
        elif n_val is not None:
            diags.append("N must be an integer")
        mode = params.get("mode", "feedforward")
        if mode not in ("feedforward", "computational"):
            diags.append("mode must be feedforward or computational")
        num("shots", 1, 10**6)
        num("attempts", 1, 10**4)
    elif exp == "pswap":
        theta = params.get("theta")
        if not isinstance(theta, (int, float)) or not 0 < theta <= 3.14159265359:
            diags.append("theta must lie in (0, pi]")
        num("k", 1, 10**3)
        num("shots", 1, 10**7)
        b2 = params.get("beta_sq")
        if not isinstance(b2, (int, float)) or not 0 <= b2 <= 1:
            diags.append("beta_sq must lie in [0, 1]")
    elif exp == "mps":
        sites = num("num_sites", 1, MAX_MPS_SITES)
        num("chi", 1, 256)
        num("shots", 1, 10**7)
        num("draws", 1, 10**3)
        ns = params.get("num_sampled")
        if ns is not None and sites is not None and not (isinstance(ns, int) and 1 <= ns <= sites):
            diags.append("num_sampled must lie in 1..num_sites")
    elif exp == "dephasing":
        num("env_qubits", 1, MAX_ENV_QUBITS)
        num("t_samples", 1, 10**6)
    elif exp == "born-check":
        num("instances", 1, 10**4)
        num("env_max", 1, 3)
        num("k_max", 1, 4)

    if "bins" in params:
        num("bins", 2, 10**4)
    if "np_max" in params:
        v = params["np_max"]
        if not isinstance(v, (int, float)) or v <= 0:
            diags.append("np_max must be positive")
    if "emit_samples" in params and not isinstance(params["emit_samples"], bool):
        diags.append("emit_samples must be true or false")
    return diags
