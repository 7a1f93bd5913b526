"""Seeded experiment runs: build the environment and learner, loop, write artifacts."""
from __future__ import annotations

import json
import logging
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from fairbandits.config import ExperimentConfig, require_valid
from fairbandits.environment import (
    Environment,
    EnvironmentSpec,
    as_context_sets,
    fixed_cycle_contexts,
    load_context_script,
    near_duplicate_script,
    random_theta,
)
from fairbandits.geometry import MetricSpec, pair_index
from fairbandits.metrics import RoundLog, finalize_run
from fairbandits.policies import FairLearner, FullLearner, KnownThetaLearner, MultiActionLearner

log = logging.getLogger(__name__)

CSV_COLUMNS = (
    "t",
    "best_fair_value",
    "policy_value",
    "inst_regret",
    "cum_regret",
    "unfair_pairs",
    "cum_fairness_loss",
    "violations",
    "in_s1",
    "width_pulled",
    "d_hat_max_err",
)


def _instance_rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(3, stream)))


def build_environment(cfg: ExperimentConfig, seed: int) -> Environment:
    """Ground truth for one seed.  theta, A and fixed contexts each get their own stream."""
    ec = cfg.environment
    inst = seed if ec.instance_seed is None else ec.instance_seed
    k, d = cfg.k, cfg.d
    theta = np.asarray(ec.theta, dtype=float) if ec.theta is not None else random_theta(_instance_rng(inst, 0), d)
    if ec.A is not None:
        metric = MetricSpec.from_row_major(ec.A, d)
    else:
        metric = MetricSpec.random(d, _instance_rng(inst, 1), frobenius=ec.metric_frobenius)
    contexts = []
    if ec.generator == "fixed_cycle":
        if ec.contexts is not None:
            contexts = as_context_sets(ec.contexts, k, d)
        else:
            contexts = fixed_cycle_contexts(_instance_rng(inst, 2), k, d, ec.cycle_length)
    elif ec.generator == "adversarial_script":
        if ec.script_path is not None:
            contexts = load_context_script(ec.script_path, k, d)
        else:
            contexts = near_duplicate_script(_instance_rng(inst, 2), k, d, cfg.T, ec.script_spread)
    spec = EnvironmentSpec(theta, metric, k, cfg.noise_sigma, ec.generator, contexts, seed)
    return Environment(spec, cfg.mode)


def build_learner(cfg: ExperimentConfig, seed: int, env: Environment) -> FairLearner:
    eps_sq = cfg.effective_epsilon_sq
    if cfg.algorithm == "known_theta":
        return KnownThetaLearner(env.theta, cfg.k, eps_sq, cfg.B1, seed, cfg.prune)
    cls = MultiActionLearner if cfg.algorithm == "full_multi" else FullLearner
    return cls(cfg.k, cfg.d, eps_sq, cfg.lam, cfg.delta, cfg.B1, seed, cfg.prune)


@dataclass
class RunResult:
    seed: int
    logs: list[RoundLog]
    summary: dict
    learner: FairLearner
    env: Environment


def run_single(cfg: ExperimentConfig, seed: int) -> RunResult:
    """Execute the round loop for one seed (no files written)."""
    env = build_environment(cfg, seed)
    learner = build_learner(cfg, seed, env)
    alpha = env.metric.g_flat
    k, eps = cfg.k, cfg.epsilon
    logs: list[RoundLog] = []
    cum_regret, cum_unfair = 0.0, 0
    for t in range(1, cfg.T + 1):
        ctx = env.next_contexts(t)
        dbar = env.true_distances(ctx)
        r_bar = env.expected_rewards(ctx)
        best = env.best_fair_value(ctx, dbar)

        decision = learner.decide(ctx, t)
        rewards = {i: env.sample_reward(ctx[i]) for i in decision.pulled}
        violations = env.oracle_violations(ctx, decision.policy, dbar)
        report = learner.update(decision, rewards, violations, alpha)

        value = float(r_bar @ decision.policy)
        inst = best - value
        cum_regret += inst
        unfair = env.epsilon_unfair_count(ctx, decision.policy, eps, dbar)
        cum_unfair += unfair
        err = np.abs(decision.distance_estimates - dbar)
        fed = tuple(report.too_large + report.not_too_large)
        fed_err = max((err[pair_index(i, j, k)] for i, j in fed), default=0.0)

        row = RoundLog(
            t=t,
            best_fair_value=best,
            realized_policy_value=value,
            instantaneous_regret=inst,
            cumulative_regret=cum_regret,
            unfair_pairs_eps=unfair,
            cumulative_fairness_loss=cum_unfair,
            violations=len(violations),
            feedback_given=fed,
            in_S1=bool(fed_err > eps),
            d_hat_max_err=float(err.max()),
            feedback_err_max=float(fed_err),
            unfair_pairs_half_eps=env.epsilon_unfair_count(ctx, decision.policy, eps / 2, dbar),
            unfair_pairs_double_eps=env.epsilon_unfair_count(ctx, decision.policy, 2 * eps, dbar),
            new_mistakes=report.new_mistakes,
            unsound_violations=report.unsound_violations,
            truth_excluded=report.truth_excluded,
        )
        if decision.widths is not None:
            w = decision.widths
            pulled = decision.pulled
            row.widths_pulled = float(sum(w[i] for i in pulled))
            row.expected_width = float(decision.policy @ w)
            row.ci_events = len(pulled)
            row.ci_misses = sum(abs(r_bar[i] - decision.estimates[i]) > w[i] for i in pulled)
            row.pulled_norms = {i: float(decision.norms[i]) for i in pulled}
        logs.append(row)

    summary = finalize_run(logs, k=k, d=cfg.d, lam=cfg.lam, delta=cfg.delta, mode=cfg.mode)
    summary.update(
        seed=seed,
        algorithm=cfg.algorithm,
        epsilon=eps,
        truth_in_version_spaces=learner.bank.contains(alpha),
        halfspaces_per_pair=[len(e.version_space) for e in learner.bank.estimators.values()],
    )
    return RunResult(seed, logs, summary, learner, env)


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if v is None:
        return "nan"
    return format(float(v), ".17g")


def rounds_csv(logs: list[RoundLog]) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for r in logs:
        vals = (
            r.t,
            r.best_fair_value,
            r.realized_policy_value,
            r.instantaneous_regret,
            r.cumulative_regret,
            r.unfair_pairs_eps,
            r.cumulative_fairness_loss,
            r.violations,
            r.in_S1,
            r.widths_pulled,
            r.d_hat_max_err,
        )
        lines.append(",".join(_fmt(v) for v in vals))
    return "\n".join(lines) + "\n"


def write_atomic(path: Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_to_builtin) + "\n"


def _to_builtin(v):
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    raise TypeError(f"not serializable: {type(v).__name__}")


def run_and_write(cfg: ExperimentConfig, seed: int, out_dir: str | Path) -> dict:
    out = Path(out_dir)
    res = run_single(cfg, seed)
    write_atomic(out / f"rounds_{seed}.csv", rounds_csv(res.logs))
    write_atomic(out / f"summary_{seed}.json", _json(res.summary))
    if cfg.dump_estimators:
        write_atomic(out / f"estimators_{seed}.jsonl", res.learner.bank.dump())
    log.info("seed %d: regret %.4f, fairness loss %d", seed, res.summary["cumulative_regret"], res.summary["fairness_loss"])
    return res.summary


AGGREGATE_KEYS = (
    "cumulative_regret",
    "fairness_loss",
    "s1_count",
    "valid_mistakes_total",
    "width_sum",
    "martingale_terminal",
    "regret_growth_ratio",
)


def aggregate(summaries: list[dict]) -> dict:
    per_seed = {str(s["seed"]): {key: s.get(key) for key in AGGREGATE_KEYS} for s in summaries}
    mean = {}
    for key in AGGREGATE_KEYS:
        vals = [s.get(key) for s in summaries]
        mean[key] = None if any(v is None for v in vals) else float(np.mean(vals))
    return {"seeds": [s["seed"] for s in summaries], "per_seed": per_seed, "mean": mean}


def run(cfg: ExperimentConfig, jobs: int = 1) -> dict:
    """Run every seed, write per-seed artifacts and ``summary.json``; return the aggregate."""
    require_valid(cfg)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_atomic(out / "config.json", _json(cfg.to_dict()))
    if jobs > 1 and len(cfg.seeds) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(cfg.seeds))) as pool:
            summaries = list(pool.map(run_and_write, [cfg] * len(cfg.seeds), cfg.seeds, [out] * len(cfg.seeds)))
    else:
        summaries = [run_and_write(cfg, s, out) for s in cfg.seeds]
    agg = aggregate(summaries)
    write_atomic(out / "summary.json", _json(agg))
    return agg
