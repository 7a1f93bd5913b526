"""Learners that play the fairness LP against estimated distances.

All three share one loop body: estimate pairwise distances, solve the LP with
the round's reward vector, sample, then turn the oracle's answer into
feedback for the distance estimators.  They differ only in the reward vector
fed to the LP and in how arms are pulled:

* :class:`KnownThetaLearner` uses the true expected rewards;
* :class:`FullLearner` uses ridge upper confidence bounds and pulls one arm;
* :class:`MultiActionLearner` uses the same bounds but pulls every arm
  independently with its LP probability.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from fairbandits.errors import InvalidInputError
from fairbandits.fair_lp import LpInstance, Mode, solve_fair_lp
from fairbandits.geometry import ContextSet
from fairbandits.metric_learner import EstimatorBank, FeedbackReport, RoundQuery
from fairbandits.reward_ucb import RidgeState


@dataclass
class RoundDecision:
    t: int
    policy: np.ndarray
    # single mode: arm index or None ("pull nothing"); multi mode: tuple of arms
    chosen: int | None | tuple[int, ...]
    distance_estimates: np.ndarray
    reward_inputs: np.ndarray
    tight_pairs: frozenset
    query: RoundQuery
    widths: np.ndarray | None = None
    estimates: np.ndarray | None = None
    norms: np.ndarray | None = None

    @property
    def pulled(self) -> tuple[int, ...]:
        if self.chosen is None:
            return ()
        if isinstance(self.chosen, tuple):
            return self.chosen
        return (self.chosen,)


@dataclass
class History:
    """Append-only record of ``(contexts, decision, rewards, violations)``."""

    entries: list[tuple[ContextSet, RoundDecision, dict, frozenset]] = field(default_factory=list)

    def append(self, ctx: ContextSet, decision: RoundDecision, rewards: dict, violations: Iterable) -> None:
        self.entries.append((ctx, decision, dict(rewards), frozenset(violations)))

    def __len__(self) -> int:
        return len(self.entries)


def sample_single(policy: np.ndarray, rng: np.random.Generator) -> int | None:
    """Draw an arm from a sub-distribution; the leftover mass means no pull."""
    u = rng.random()
    idx = int(np.searchsorted(np.cumsum(policy), u, side="right"))
    return idx if idx < policy.size else None


def sample_multi(policy: np.ndarray, rng: np.random.Generator) -> tuple[int, ...]:
    return tuple(int(i) for i in np.flatnonzero(rng.random(policy.size) < policy))


class FairLearner:
    mode: Mode = "single"

    def __init__(self, k: int, d: int, epsilon_sq: float, bound: float = 1.0, seed: int = 0, prune: bool = True):
        if k < 2:
            raise InvalidInputError("need at least two arms")
        self.k, self.d = k, d
        self.bank = EstimatorBank(k, d, epsilon_sq, bound, prune)
        self.rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(2,)))

    def reward_vector(self, ctx: ContextSet, t: int) -> dict:
        raise NotImplementedError

    def decide(self, ctx: ContextSet, t: int) -> RoundDecision:
        info = self.reward_vector(ctx, t)
        query = self.bank.estimate_distances(ctx)
        sol = solve_fair_lp(LpInstance(info["rewards"], query.d_hat, self.mode))
        if self.mode == "single":
            chosen = sample_single(sol.policy, self.rng)
        else:
            chosen = sample_multi(sol.policy, self.rng)
        return RoundDecision(
            t=t,
            policy=sol.policy,
            chosen=chosen,
            distance_estimates=query.d_hat,
            reward_inputs=info["rewards"],
            tight_pairs=sol.tight_pairs,
            query=query,
            widths=info.get("widths"),
            estimates=info.get("estimates"),
            norms=info.get("norms"),
        )

    def observe_rewards(self, decision: RoundDecision, rewards: dict[int, float]) -> None:
        pass

    def update(
        self,
        decision: RoundDecision,
        rewards: dict[int, float],
        violations: Iterable[tuple[int, int]],
        alpha_true: np.ndarray | None = None,
    ) -> FeedbackReport:
        self.observe_rewards(decision, rewards)
        return self.bank.apply_oracle_round(decision.query, violations, decision.tight_pairs, alpha_true)


class KnownThetaLearner(FairLearner):
    def __init__(self, theta, k: int, epsilon_sq: float, bound: float = 1.0, seed: int = 0, prune: bool = True):
        theta = np.asarray(theta, dtype=float).reshape(-1)
        if np.linalg.norm(theta) > 1 + 1e-12:
            raise InvalidInputError("theta must have norm at most 1")
        super().__init__(k, theta.size, epsilon_sq, bound, seed, prune)
        self.theta = theta

    def reward_vector(self, ctx: ContextSet, t: int) -> dict:
        return {"rewards": ctx.contexts @ self.theta}


class FullLearner(FairLearner):
    """Optimistic learner: the LP sees ``clip(r_tilde) + w``.

    Ridge estimates are clipped to ``[-1, 1]``, the known range of expected
    rewards; this never moves an estimate away from the truth, so the
    confidence intervals stay valid and the LP input stays within ``[-1, 2]``.
    """

    def __init__(self, k: int, d: int, epsilon_sq: float, lam: float = 1.0, delta: float = 0.05,
                 bound: float = 1.0, seed: int = 0, prune: bool = True):
        super().__init__(k, d, epsilon_sq, bound, seed, prune)
        self.ridge = RidgeState(d, lam, delta)

    def reward_vector(self, ctx: ContextSet, t: int) -> dict:
        X = ctx.contexts
        r_tilde = np.clip(X @ self.ridge.theta, -1.0, 1.0)
        norms = np.sqrt(np.maximum(np.einsum("ij,jk,ik->i", X, self.ridge.V_inv, X), 0.0))
        w = np.minimum(norms * self.ridge.radius(t), 1.0)
        return {"rewards": r_tilde + w, "widths": w, "estimates": r_tilde, "norms": norms}

    def observe_rewards(self, decision: RoundDecision, rewards: dict[int, float]) -> None:
        X = decision.query.ctx.contexts
        for i in decision.pulled:
            self.ridge.update(X[i], rewards[i])


class MultiActionLearner(FullLearner):
    mode: Mode = "multi"
