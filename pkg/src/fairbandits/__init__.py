"""Contextual bandits under individual-fairness constraints with a learned Mahalanobis metric."""
from fairbandits.config import ExperimentConfig, load_config, validate
from fairbandits.environment import Environment, EnvironmentSpec
from fairbandits.fair_lp import LpInstance, LpSolution, solve_fair_lp
from fairbandits.geometry import ContextSet, MetricSpec
from fairbandits.harness import run, run_single
from fairbandits.metric_learner import DistanceEstimator, EstimatorBank, VersionSpace
from fairbandits.metrics import RoundLog, finalize_run, martingale_diag
from fairbandits.policies import FullLearner, KnownThetaLearner, MultiActionLearner
from fairbandits.reward_ucb import RidgeState

__all__ = [
    "ContextSet",
    "DistanceEstimator",
    "Environment",
    "EnvironmentSpec",
    "EstimatorBank",
    "ExperimentConfig",
    "FullLearner",
    "KnownThetaLearner",
    "LpInstance",
    "LpSolution",
    "MetricSpec",
    "MultiActionLearner",
    "RidgeState",
    "RoundLog",
    "VersionSpace",
    "finalize_run",
    "load_config",
    "martingale_diag",
    "run",
    "run_single",
    "solve_fair_lp",
    "validate",
]
