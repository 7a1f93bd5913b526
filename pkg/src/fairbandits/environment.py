"""Ground truth for simulations: contexts, noisy rewards and the fairness oracle."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

from fairbandits.errors import InvalidInputError
from fairbandits.fair_lp import LpInstance, Mode, solve_fair_lp
from fairbandits.geometry import ContextSet, MetricSpec, pairs, true_distance_vector

ORACLE_TOL = 1e-12

GeneratorKind = Literal["iid_unit_sphere", "fixed_cycle", "adversarial_script"]


@dataclass
class EnvironmentSpec:
    theta: np.ndarray
    metric: MetricSpec
    k: int
    noise_sigma: float = 1.0
    generator: GeneratorKind = "iid_unit_sphere"
    contexts: list[ContextSet] = field(default_factory=list)
    seed: int = 0

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float).reshape(-1)
        if np.linalg.norm(self.theta) > 1 + 1e-12:
            raise InvalidInputError("theta must have norm at most 1")
        if self.theta.size != self.metric.d:
            raise InvalidInputError("theta and metric dimensions differ")
        if self.noise_sigma < 0:
            raise InvalidInputError("noise_sigma must be nonnegative")
        if self.generator not in ("iid_unit_sphere", "fixed_cycle", "adversarial_script"):
            raise InvalidInputError(f"unknown generator {self.generator!r}")
        if self.generator != "iid_unit_sphere" and not self.contexts:
            raise InvalidInputError(f"{self.generator} needs a non-empty list of context sets")
        for c in self.contexts:
            if c.k != self.k or c.d != self.d:
                raise InvalidInputError(f"context set of shape {c.contexts.shape} does not match k={self.k}, d={self.d}")

    @property
    def d(self) -> int:
        return self.metric.d


def unit_sphere(rng: np.random.Generator, k: int, d: int) -> np.ndarray:
    X = rng.standard_normal((k, d))
    return X / np.linalg.norm(X, axis=1, keepdims=True)


def load_context_script(path: str | Path, k: int, d: int) -> list[ContextSet]:
    """Read a whitespace- or comma-separated file with one round of ``k*d`` numbers per row."""
    text = Path(path).read_text().replace(",", " ")
    rows = [line.split() for line in text.splitlines() if line.strip() and not line.lstrip().startswith("#")]
    out = []
    for n, row in enumerate(rows, start=1):
        if len(row) != k * d:
            raise InvalidInputError(f"{path}:{n}: expected {k * d} numbers, got {len(row)}")
        out.append(ContextSet(np.array(row, dtype=float).reshape(k, d)))
    return out


def near_duplicate_script(rng: np.random.Generator, k: int, d: int, T: int, spread: float = 0.05) -> list[ContextSet]:
    """Scripted hard case: each round's contexts are tiny perturbations of one direction."""
    out = []
    for _ in range(T):
        base = unit_sphere(rng, 1, d)[0]
        X = base + spread * rng.standard_normal((k, d))
        X /= np.maximum(np.linalg.norm(X, axis=1, keepdims=True), 1.0)
        out.append(ContextSet(X))
    return out


class Environment:
    """Simulation of one run.  Contexts and rewards use separate RNG streams."""

    def __init__(self, spec: EnvironmentSpec, mode: Mode = "single"):
        self.spec = spec
        self.mode = mode
        self.reward_rng = np.random.default_rng(np.random.SeedSequence(spec.seed, spawn_key=(1,)))

    @property
    def theta(self) -> np.ndarray:
        return self.spec.theta

    @property
    def metric(self) -> MetricSpec:
        return self.spec.metric

    def next_contexts(self, t: int) -> ContextSet:
        """Contexts for round ``t`` (1-based); a pure function of the spec and ``t``."""
        if t < 1:
            raise InvalidInputError("rounds are numbered from 1")
        spec = self.spec
        if spec.generator == "iid_unit_sphere":
            rng = np.random.default_rng(np.random.SeedSequence(spec.seed, spawn_key=(0, t)))
            return ContextSet(unit_sphere(rng, spec.k, spec.d))
        if spec.generator == "fixed_cycle":
            return spec.contexts[(t - 1) % len(spec.contexts)]
        if t > len(spec.contexts):
            raise InvalidInputError(f"context script exhausted at round {t} (length {len(spec.contexts)})")
        return spec.contexts[t - 1]

    def expected_rewards(self, ctx: ContextSet) -> np.ndarray:
        return ctx.contexts @ self.theta

    def sample_reward(self, x, rng: np.random.Generator | None = None) -> float:
        rng = self.reward_rng if rng is None else rng
        mean = float(np.asarray(x, dtype=float) @ self.theta)
        if self.spec.noise_sigma == 0:
            return mean
        return mean + self.spec.noise_sigma * float(rng.standard_normal())

    def true_distances(self, ctx: ContextSet) -> np.ndarray:
        return true_distance_vector(self.metric, ctx)

    def oracle_violations(self, ctx: ContextSet, policy, distances: np.ndarray | None = None) -> set[tuple[int, int]]:
        """Pairs whose probability gap strictly exceeds their true distance."""
        p = np.asarray(policy, dtype=float)
        dbar = self.true_distances(ctx) if distances is None else distances
        return {
            (i, j) for n, (i, j) in enumerate(pairs(ctx.k)) if abs(p[i] - p[j]) > dbar[n] + ORACLE_TOL
        }

    def epsilon_unfair_count(self, ctx: ContextSet, policy, eps: float, distances: np.ndarray | None = None) -> int:
        if eps < 0:
            raise InvalidInputError("eps must be nonnegative")
        p = np.asarray(policy, dtype=float)
        dbar = self.true_distances(ctx) if distances is None else distances
        return sum(abs(p[i] - p[j]) > dbar[n] + eps for n, (i, j) in enumerate(pairs(ctx.k)))

    def best_fair_value(self, ctx: ContextSet, distances: np.ndarray | None = None) -> float:
        """Value of the best policy that respects the true fairness constraints."""
        dbar = self.true_distances(ctx) if distances is None else distances
        return solve_fair_lp(LpInstance(self.expected_rewards(ctx), dbar, self.mode)).objective


def fixed_cycle_contexts(rng: np.random.Generator, k: int, d: int, length: int) -> list[ContextSet]:
    return [ContextSet(unit_sphere(rng, k, d)) for _ in range(length)]


def random_theta(rng: np.random.Generator, d: int) -> np.ndarray:
    return unit_sphere(rng, 1, d)[0]


def as_context_sets(raw: Sequence, k: int, d: int) -> list[ContextSet]:
    return [ContextSet(np.asarray(c, dtype=float).reshape(k, d)) for c in raw]
