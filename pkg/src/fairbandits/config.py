"""Experiment configuration: YAML loading, presets and validation."""
from __future__ import annotations

import copy
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
import yaml

ALGORITHMS = ("known_theta", "full", "full_multi")
GENERATORS = ("iid_unit_sphere", "fixed_cycle", "adversarial_script")
SCRIPT_PRESETS = ("near_duplicate",)
SEED_MAX = 2**64 - 1


class ConfigError(ValueError):
    """Raised when a config file cannot be parsed or fails validation."""

    def __init__(self, diagnostics: list[str]):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(self.diagnostics))


@dataclass
class EnvironmentConfig:
    # theta and A default to random draws from the instance seed
    theta: list[float] | None = None
    A: list[float] | None = None  # row-major d*d entries
    metric_frobenius: float = 1.0
    generator: str = "iid_unit_sphere"
    contexts: list | None = None  # fixed_cycle: explicit list of k*d context sets
    cycle_length: int = 5
    script_path: str | None = None  # adversarial_script: numeric file
    script: str | None = None  # adversarial_script: built-in preset name
    script_spread: float = 0.05
    # draw theta, A and fixed contexts from this seed instead of each run seed
    instance_seed: int | None = None


@dataclass
class ExperimentConfig:
    algorithm: str = "full"
    k: int = 4
    d: int = 3
    T: int = 20000
    epsilon: float = 0.05
    epsilon_sq: float | None = None
    lam: float = 1.0
    delta: float = 0.05
    noise_sigma: float = 1.0
    B1: float = 1.0
    prune: bool = True
    environment: EnvironmentConfig = field(default_factory=EnvironmentConfig)
    seeds: list[int] = field(default_factory=lambda: [0])
    output_dir: str = "runs"
    dump_estimators: bool = False

    @property
    def mode(self) -> str:
        return "multi" if self.algorithm == "full_multi" else "single"

    @property
    def effective_epsilon_sq(self) -> float:
        return self.epsilon_sq if self.epsilon_sq is not None else self.epsilon**2

    def to_dict(self) -> dict:
        out = asdict(self)
        out["lambda"] = out.pop("lam")
        return out


PRESETS = {
    "desk_scale": {"k": 4, "d": 3, "T": 20000, "epsilon": 0.05, "lambda": 1.0, "delta": 0.05},
    # epsilon is filled in from k and T once the rest of the config is known
    "paper_defaults": {"epsilon": "auto", "lambda": 1.0, "delta": 0.05},
}


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in over.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def from_dict(raw: dict) -> ExperimentConfig:
    """Build a config from a plain mapping; unknown keys raise :class:`ConfigError`."""
    if not isinstance(raw, dict):
        raise ConfigError(["config: top level must be a mapping"])
    raw = dict(raw)
    preset = raw.pop("preset", None)
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError([f"preset: unknown preset {preset!r} (choose from {sorted(PRESETS)})"])
        raw = _merge(PRESETS[preset], raw)
    if "lambda" in raw:
        raw["lam"] = raw.pop("lambda")

    problems = []
    top = {f.name for f in fields(ExperimentConfig)}
    env_keys = {f.name for f in fields(EnvironmentConfig)}
    problems += [f"{key}: unknown field" for key in raw if key not in top]
    env_raw = raw.pop("environment", None) or {}
    if not isinstance(env_raw, dict):
        problems.append("environment: must be a mapping")
        env_raw = {}
    problems += [f"environment.{key}: unknown field" for key in env_raw if key not in env_keys]
    if problems:
        raise ConfigError(problems)

    cfg = ExperimentConfig(**raw, environment=EnvironmentConfig(**env_raw))
    if cfg.epsilon == "auto":
        cfg.epsilon = 1.0 / (cfg.k**3 * cfg.T) if _is_int(cfg.k) and _is_int(cfg.T) and cfg.k > 0 and cfg.T > 0 else 0.0
    return cfg


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError([f"config: cannot read {path}: {exc.strerror or exc}"]) from exc
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError([f"config: YAML parse error: {exc}"]) from exc
    return from_dict(raw if raw is not None else {})


def preset(name: str, **overrides) -> ExperimentConfig:
    return from_dict({"preset": name, **overrides})


def _is_int(v) -> bool:
    return isinstance(v, (int, np.integer)) and not isinstance(v, bool)


def _is_real(v) -> bool:
    return isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) and np.isfinite(v)


def validate(cfg: ExperimentConfig) -> list[str]:
    """Diagnostics of the form ``field: constraint``; empty iff the config is usable."""
    out = []
    if cfg.algorithm not in ALGORITHMS:
        out.append(f"algorithm: must be one of {ALGORITHMS}, got {cfg.algorithm!r}")
    for name, lo in (("k", 2), ("d", 1), ("T", 1)):
        v = getattr(cfg, name)
        if not _is_int(v) or v < lo:
            out.append(f"{name}: must be an integer >= {lo}, got {v!r}")
    if not _is_real(cfg.epsilon) or cfg.epsilon < 0:
        out.append(f"epsilon: must be a real >= 0, got {cfg.epsilon!r}")
    if cfg.epsilon_sq is not None and (not _is_real(cfg.epsilon_sq) or cfg.epsilon_sq <= 0):
        out.append(f"epsilon_sq: must be a real > 0 when given, got {cfg.epsilon_sq!r}")
    elif cfg.epsilon_sq is None and _is_real(cfg.epsilon) and cfg.epsilon == 0:
        out.append("epsilon_sq: estimator accuracy is zero; set epsilon > 0 or give epsilon_sq")
    if not _is_real(cfg.lam) or cfg.lam <= 0:
        out.append(f"lambda: must be a real > 0, got {cfg.lam!r}")
    if not _is_real(cfg.delta) or not 0 < cfg.delta < 1:
        out.append(f"delta: must lie strictly between 0 and 1, got {cfg.delta!r}")
    if not _is_real(cfg.noise_sigma) or cfg.noise_sigma < 0:
        out.append(f"noise_sigma: must be a real >= 0, got {cfg.noise_sigma!r}")
    if not _is_real(cfg.B1) or cfg.B1 <= 0:
        out.append(f"B1: must be a real > 0, got {cfg.B1!r}")
    if not isinstance(cfg.prune, bool):
        out.append("prune: must be a boolean")
    if not isinstance(cfg.seeds, list) or not cfg.seeds:
        out.append("seeds: must be a non-empty list")
    else:
        for n, s in enumerate(cfg.seeds):
            if not _is_int(s) or not 0 <= s <= SEED_MAX:
                out.append(f"seeds[{n}]: must be an integer in [0, 2^64), got {s!r}")
    if not isinstance(cfg.output_dir, str) or not cfg.output_dir:
        out.append("output_dir: must be a non-empty path")
    if out:
        # dimension checks below rely on k and d being sane
        return out + _validate_env(cfg, dims_ok=_is_int(cfg.k) and _is_int(cfg.d) and cfg.k >= 2 and cfg.d >= 1)
    return _validate_env(cfg, dims_ok=True)


def _validate_env(cfg: ExperimentConfig, dims_ok: bool) -> list[str]:
    env = cfg.environment
    out = []
    if env.generator not in GENERATORS:
        out.append(f"environment.generator: must be one of {GENERATORS}, got {env.generator!r}")
    if env.instance_seed is not None and (not _is_int(env.instance_seed) or not 0 <= env.instance_seed <= SEED_MAX):
        out.append("environment.instance_seed: must be an integer in [0, 2^64)")
    if not _is_real(env.metric_frobenius) or env.metric_frobenius <= 0:
        out.append("environment.metric_frobenius: must be a real > 0")
    if not dims_ok:
        return out
    k, d = cfg.k, cfg.d
    if env.theta is not None:
        theta = np.asarray(env.theta, dtype=float) if _numeric_list(env.theta) else None
        if theta is None or theta.shape != (d,):
            out.append(f"environment.theta: must be a list of {d} reals")
        elif np.linalg.norm(theta) > 1 + 1e-12:
            out.append("environment.theta: norm must be at most 1")
    if env.A is not None:
        A = np.asarray(env.A, dtype=float) if _numeric_list(env.A) else None
        if A is None or A.size != d * d:
            out.append(f"environment.A: must be a row-major list of {d * d} reals")
        elif _is_real(cfg.B1):
            A = A.reshape(d, d)
            if np.abs(A.T @ A).max() > cfg.B1:
                out.append("environment.A: entries of A^T A exceed B1, the estimator's bounding box")
    elif _is_real(env.metric_frobenius) and _is_real(cfg.B1) and env.metric_frobenius > cfg.B1:
        out.append("environment.metric_frobenius: random metric may leave the estimator's box; keep it <= B1")
    if env.generator == "fixed_cycle":
        if env.contexts is not None:
            out += _check_contexts(env.contexts, k, d, "environment.contexts")
        elif not _is_int(env.cycle_length) or env.cycle_length < 1:
            out.append("environment.cycle_length: must be an integer >= 1")
    if env.generator == "adversarial_script":
        if (env.script_path is None) == (env.script is None):
            out.append("environment.script_path: give exactly one of script_path or script")
        elif env.script_path is not None and not Path(env.script_path).is_file():
            out.append(f"environment.script_path: no such file {env.script_path!r}")
        elif env.script is not None and env.script not in SCRIPT_PRESETS:
            out.append(f"environment.script: must be one of {SCRIPT_PRESETS}")
    return out


def _numeric_list(v) -> bool:
    try:
        arr = np.asarray(v, dtype=float)
    except (TypeError, ValueError):
        return False
    return bool(np.all(np.isfinite(arr)))


def _check_contexts(raw, k: int, d: int, name: str) -> list[str]:
    if not isinstance(raw, list) or not raw:
        return [f"{name}: must be a non-empty list of context sets"]
    for n, c in enumerate(raw):
        if not _numeric_list(c) or np.asarray(c, dtype=float).size != k * d:
            return [f"{name}[{n}]: must hold {k}x{d} reals"]
        if np.linalg.norm(np.asarray(c, dtype=float).reshape(k, d), axis=1).max() > 1 + 1e-12:
            return [f"{name}[{n}]: every context must have norm at most 1"]
    return []


def require_valid(cfg: ExperimentConfig) -> ExperimentConfig:
    problems = validate(cfg)
    if problems:
        raise ConfigError(problems)
    return cfg
