import numpy as np
import pytest

from fairbandits.config import from_dict
from fairbandits.errors import InvalidInputError
from fairbandits.harness import run_single
from fairbandits.metrics import RoundLog, finalize_run, martingale_diag, regret_identity_error


def log_row(t, inst=0.0, cum=0.0, unfair=0, w=None, ew=None, s1=False, mistakes=0):
    return RoundLog(
        t=t, best_fair_value=inst, realized_policy_value=0.0, instantaneous_regret=inst,
        cumulative_regret=cum, unfair_pairs_eps=unfair, cumulative_fairness_loss=0, violations=0,
        feedback_given=(), in_S1=s1, d_hat_max_err=0.0, new_mistakes=mistakes,
        widths_pulled=w, expected_width=ew,
    )


def test_empty_run_rejected():
    with pytest.raises(InvalidInputError):
        finalize_run([], k=2, d=2)


def test_martingale_point_mass_and_prefix():
    logs = [log_row(t, w=0.3, ew=0.3) for t in range(1, 6)]
    D = martingale_diag(logs)
    assert D[0] == 0.0 and np.all(D == 0.0) and D.size == 6
    assert martingale_diag([]).tolist() == [0.0]


def test_martingale_needs_widths():
    with pytest.raises(InvalidInputError):
        martingale_diag([log_row(1)])


def test_quarter_and_half_breakdowns():
    inst = np.arange(1.0, 9.0)
    logs = [log_row(t, inst=v, cum=inst[:t].sum(), unfair=t % 2, mistakes=1 if t <= 2 else 0, s1=t == 8)
            for t, v in enumerate(inst, start=1)]
    s = finalize_run(logs, k=2, d=2)
    assert s["regret_per_quarter"] == [3.0, 7.0, 11.0, 15.0]
    assert s["regret_per_half"] == [10.0, 26.0]
    assert s["regret_growth_ratio"] == pytest.approx(3.6)
    assert s["fairness_loss"] == 4
    assert s["mistakes_per_quarter"] == [2, 0, 0, 0]
    assert s["s1_count"] == 1 and s["s1_second_half"] == 1
    assert s["width_sum"] is None


def small_cfg(**over):
    raw = dict(algorithm="full", k=3, d=2, T=300, epsilon=0.05, seeds=[0])
    raw.update(over)
    return from_dict(raw)


def test_logs_are_consistent_running_sums():
    res = run_single(small_cfg(), 0)
    logs = res.logs
    assert regret_identity_error(logs) <= 1e-9
    assert res.summary["fairness_loss"] == sum(r.unfair_pairs_eps for r in logs)
    assert logs[-1].cumulative_fairness_loss == res.summary["fairness_loss"]
    assert res.summary["width_sum"] == pytest.approx(sum(r.widths_pulled for r in logs))
    assert res.summary["martingale_terminal"] == pytest.approx(martingale_diag(logs)[-1])
    for r in logs:
        assert r.in_S1 == (r.feedback_err_max > 0.05)
        assert r.unfair_pairs_double_eps <= r.unfair_pairs_eps <= r.unfair_pairs_half_eps


def test_unconstrained_two_arm_regret_vanishes():
    cfg = from_dict(dict(
        algorithm="known_theta", k=2, d=2, T=400, epsilon=0.05, noise_sigma=0.0, B1=9.0, seeds=[0],
        environment=dict(theta=[0.8, 0.6], A=[3.0, 0.0, 0.0, 3.0], generator="fixed_cycle",
                         contexts=[[[1.0, 0.0], [0.0, 1.0]]]),
    ))
    logs = run_single(cfg, 0).logs
    assert logs[0].instantaneous_regret > 0
    assert all(abs(r.instantaneous_regret) <= 1e-9 for r in logs[300:])
