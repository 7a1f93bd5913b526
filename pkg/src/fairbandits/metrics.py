"""Per-round logs and run summaries: regret, fairness loss and width diagnostics."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from fairbandits.errors import InvalidInputError
from fairbandits.reward_ucb import (
    martingale_threshold,
    multi_width_sum_bound,
    per_arm_norm_bound,
    width_sum_bound,
)


@dataclass
class RoundLog:
    t: int
    best_fair_value: float
    realized_policy_value: float
    instantaneous_regret: float
    cumulative_regret: float
    unfair_pairs_eps: int
    cumulative_fairness_loss: int
    violations: int
    feedback_given: tuple
    in_S1: bool
    d_hat_max_err: float
    # largest |d_hat - d_bar| over pairs that received feedback (0 if none)
    feedback_err_max: float = 0.0
    unfair_pairs_half_eps: int = 0
    unfair_pairs_double_eps: int = 0
    new_mistakes: int = 0
    unsound_violations: int = 0
    truth_excluded: int = 0
    # None for the known-theta learner, which has no confidence widths
    widths_pulled: float | None = None
    expected_width: float | None = None
    ci_events: int = 0
    ci_misses: int = 0
    pulled_norms: dict = field(default_factory=dict)


def _quarters(values: np.ndarray) -> list:
    return [v.sum().item() for v in np.array_split(values, 4)]


def martingale_diag(logs: list[RoundLog]) -> np.ndarray:
    """``D^t``: expected minus realized pulled width, accumulated; ``D^0 = 0``."""
    if any(log.widths_pulled is None for log in logs):
        raise InvalidInputError("martingale diagnostic needs confidence widths (not a known-theta run)")
    steps = np.array([log.expected_width - log.widths_pulled for log in logs], dtype=float)
    return np.concatenate([[0.0], np.cumsum(steps)])


def finalize_run(
    logs: list[RoundLog],
    *,
    k: int,
    d: int,
    lam: float = 1.0,
    delta: float = 0.05,
    mode: str = "single",
) -> dict:
    """Totals and growth diagnostics for one completed run."""
    if not logs:
        raise InvalidInputError("cannot summarize a run with zero rounds")
    T = len(logs)
    inst = np.array([log.instantaneous_regret for log in logs])
    unfair = np.array([log.unfair_pairs_eps for log in logs])
    mistakes = np.array([log.new_mistakes for log in logs])
    s1 = np.array([log.in_S1 for log in logs], dtype=int)
    half = T // 2
    regret_at_half = float(inst[:half].sum())
    cumulative = float(logs[-1].cumulative_regret)

    summary = {
        "rounds": T,
        "cumulative_regret": cumulative,
        "regret_at_half": regret_at_half,
        "regret_growth_ratio": cumulative / regret_at_half if regret_at_half > 0 else None,
        "fairness_loss": int(unfair.sum()),
        "fairness_loss_half_eps": int(sum(log.unfair_pairs_half_eps for log in logs)),
        "fairness_loss_double_eps": int(sum(log.unfair_pairs_double_eps for log in logs)),
        "fairness_loss_second_half": int(unfair[half:].sum()),
        "s1_count": int(s1.sum()),
        "s1_second_half": int(s1[half:].sum()),
        "valid_mistakes_total": int(mistakes.sum()),
        "violations_total": int(sum(log.violations for log in logs)),
        "unsound_violations": int(sum(log.unsound_violations for log in logs)),
        "truth_excluded": int(sum(log.truth_excluded for log in logs)),
        "regret_per_half": [float(inst[:half].sum()), float(inst[half:].sum())],
        "regret_per_quarter": _quarters(inst),
        "fairness_loss_per_quarter": _quarters(unfair),
        "mistakes_per_quarter": _quarters(mistakes),
        "s1_per_quarter": _quarters(s1),
    }

    if logs[0].widths_pulled is not None:
        width_sum = float(sum(log.widths_pulled for log in logs))
        if mode == "multi":
            bound = multi_width_sum_bound(T, d, k, lam, delta)
            increment = float(k)
        else:
            bound = width_sum_bound(T, d, lam, delta)
            increment = 1.0
        D = martingale_diag(logs)
        ci_events = sum(log.ci_events for log in logs)
        ci_misses = sum(log.ci_misses for log in logs)
        arm_sums = [0.0] * k
        for log in logs:
            for i, v in log.pulled_norms.items():
                arm_sums[i] += v
        summary.update(
            width_sum=width_sum,
            width_sum_bound=bound,
            width_sum_ok=width_sum <= bound,
            martingale_terminal=float(D[-1]),
            martingale_threshold=martingale_threshold(T, delta, increment),
            ci_events=int(ci_events),
            ci_misses=int(ci_misses),
            ci_miss_rate=ci_misses / ci_events if ci_events else 0.0,
            per_arm_norm_sums=arm_sums,
            per_arm_norm_bound=per_arm_norm_bound(T, d, k, lam),
        )
    else:
        summary.update(width_sum=None, width_sum_bound=None, martingale_terminal=None)
    return summary


def regret_identity_error(logs: list[RoundLog]) -> float:
    """Largest gap between the running regret column and a fresh recomputation."""
    running = 0.0
    worst = 0.0
    for log in logs:
        running += log.best_fair_value - log.realized_policy_value
        worst = max(worst, abs(running - log.cumulative_regret))
    return worst


def safe_ratio(num: float, den: float) -> float:
    return num / den if den else math.inf
