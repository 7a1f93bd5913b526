import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fairbandits.environment import (
    Environment,
    EnvironmentSpec,
    load_context_script,
    near_duplicate_script,
    unit_sphere,
)
from fairbandits.errors import InvalidInputError
from fairbandits.fair_lp import LpInstance, solve_fair_lp
from fairbandits.geometry import ContextSet, MetricSpec
from oracles import grid_lp_value, violated_pairs

E1 = np.array([1.0, 0.0])


def make_env(A=None, theta=E1, k=2, sigma=1.0, generator="iid_unit_sphere", contexts=(), seed=0, mode="single"):
    A = np.eye(len(theta)) if A is None else np.asarray(A, dtype=float)
    spec = EnvironmentSpec(np.asarray(theta, dtype=float), MetricSpec(A), k, sigma, generator, list(contexts), seed)
    return Environment(spec, mode)


def two_arm_ctx():
    return ContextSet(np.array([[1.0, 0.0], [0.0, 1.0]]))


def test_noiseless_reward():
    assert make_env(sigma=0.0).sample_reward(E1) == 1.0


def test_zero_context_reward_is_pure_noise():
    env = make_env()
    draws = np.array([env.sample_reward([0.0, 0.0]) for _ in range(100_000)])
    assert abs(draws.mean()) <= 3 / np.sqrt(100_000)


def test_reward_mean_matches_inner_product():
    theta = np.array([0.6, -0.3])
    env = make_env(theta=theta, sigma=0.8)
    x = np.array([0.5, 0.5])
    draws = np.array([env.sample_reward(x) for _ in range(100_000)])
    assert abs(draws.mean() - theta @ x) <= 3 * 0.8 / np.sqrt(100_000)


def test_oracle_boundary_is_not_a_violation():
    env = make_env(A=np.zeros((2, 2)), k=3)
    ctx = ContextSet(unit_sphere(np.random.default_rng(0), 3, 2))
    assert env.oracle_violations(ctx, np.full(3, 1 / 3)) == set()


def test_oracle_reports_gap():
    env = make_env(A=0.5 * np.eye(2))
    ctx = ContextSet(np.array([[1.0, 0.0], [0.0, 0.0]]))
    assert env.true_distances(ctx) == pytest.approx([0.5])
    assert env.oracle_violations(ctx, [1.0, 0.0]) == {(0, 1)}


def test_oracle_matches_pair_scan(rng):
    for _ in range(100):
        k = int(rng.integers(2, 6))
        env = make_env(A=rng.standard_normal((3, 3)) * 0.3, theta=np.array([0.0, 0.0, 1.0]), k=k)
        ctx = ContextSet(unit_sphere(rng, k, 3))
        p = rng.dirichlet(np.ones(k)) * rng.uniform()
        assert env.oracle_violations(ctx, p) == violated_pairs(p, env.true_distances(ctx))


def test_best_fair_value_unconstrained():
    env = make_env(A=100 * np.eye(2), theta=np.array([0.6, -0.8]))
    ctx = ContextSet(np.array([[1.0, 0.0], [0.0, 1.0]]))
    assert env.best_fair_value(ctx) == pytest.approx(0.6)
    env_neg = make_env(A=100 * np.eye(2), theta=np.array([-0.6, -0.8]))
    assert env_neg.best_fair_value(ctx) == pytest.approx(0.0)


def test_best_fair_value_forced_equal():
    env = make_env(A=np.zeros((2, 2)), theta=np.array([0.6, 0.3]), k=3)
    ctx = ContextSet(np.array([[1.0, 0.0], [0.0, 1.0], [0.6, 0.8]]))
    r = ctx.contexts @ env.theta
    assert env.best_fair_value(ctx) == pytest.approx(max(0.0, r.sum() / 3))


def test_best_fair_value_matches_grid(rng):
    for n in range(30):
        k = int(rng.integers(2, 4))
        mode = ["single", "multi"][n % 2]
        env = make_env(A=rng.standard_normal((2, 2)) * 0.4, theta=unit_sphere(rng, 1, 2)[0], k=k, mode=mode)
        ctx = ContextSet(unit_sphere(rng, k, 2))
        grid = grid_lp_value(ctx.contexts @ env.theta, env.true_distances(ctx), mode)
        assert env.best_fair_value(ctx) == pytest.approx(grid, abs=2e-3)


def test_epsilon_unfair_examples():
    env = make_env(A=0.2 * np.eye(2))
    ctx = ContextSet(np.array([[1.0, 0.0], [0.0, 0.0]]))
    assert env.epsilon_unfair_count(ctx, [1.0, 0.0], 0.05) == 1
    assert env.epsilon_unfair_count(ctx, [1.0, 0.0], 1.0) == 0
    with pytest.raises(InvalidInputError):
        env.epsilon_unfair_count(ctx, [1.0, 0.0], -0.1)


@given(st.integers(0, 2**32 - 1))
def test_unfair_count_monotone_and_below_violations(seed):
    rng = np.random.default_rng(seed)
    env = make_env(A=rng.standard_normal((2, 2)) * 0.3, k=4)
    ctx = ContextSet(unit_sphere(rng, 4, 2))
    p = rng.dirichlet(np.ones(4))
    counts = [env.epsilon_unfair_count(ctx, p, e) for e in np.linspace(0, 1, 21)]
    assert all(a >= b for a, b in zip(counts, counts[1:]))
    assert counts[0] <= len(env.oracle_violations(ctx, p))


@given(st.integers(0, 2**32 - 1))
def test_violations_only_where_estimate_exceeds_truth(seed):
    rng = np.random.default_rng(seed)
    env = make_env(A=rng.standard_normal((2, 2)) * 0.5, k=4)
    ctx = ContextSet(unit_sphere(rng, 4, 2))
    d_hat = rng.uniform(0, 1, 6)
    dbar = env.true_distances(ctx)
    p = solve_fair_lp(LpInstance(ctx.contexts @ env.theta, d_hat)).policy
    for (i, j) in env.oracle_violations(ctx, p):
        n = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)].index((i, j))
        assert d_hat[n] > dbar[n]


def test_fixed_cycle_single_set():
    ctx = two_arm_ctx()
    env = make_env(generator="fixed_cycle", contexts=[ctx])
    assert all(env.next_contexts(t) is ctx for t in range(1, 6))


def test_fixed_cycle_wraps(rng):
    sets = [ContextSet(unit_sphere(rng, 2, 2)) for _ in range(3)]
    env = make_env(generator="fixed_cycle", contexts=sets)
    assert [env.next_contexts(t) for t in range(1, 8)] == [sets[0], sets[1], sets[2]] * 2 + [sets[0]]


def test_iid_contexts_unit_norm_and_deterministic():
    a, b = make_env(k=5, seed=9), make_env(k=5, seed=9)
    for t in range(1, 50):
        x = a.next_contexts(t).contexts
        assert np.abs(np.linalg.norm(x, axis=1) - 1).max() <= 1e-12
        assert np.array_equal(x, b.next_contexts(t).contexts)
    assert not np.array_equal(a.next_contexts(1).contexts, make_env(k=5, seed=10).next_contexts(1).contexts)


def test_script_exhaustion_and_round_index():
    env = make_env(generator="adversarial_script", contexts=[two_arm_ctx()])
    assert env.next_contexts(1).k == 2
    with pytest.raises(InvalidInputError):
        env.next_contexts(2)
    with pytest.raises(InvalidInputError):
        env.next_contexts(0)


def test_load_context_script(tmp_path):
    path = tmp_path / "script.txt"
    path.write_text("# two rounds, k=2, d=2\n1, 0, 0, 1\n0.6 0.8 -1 0\n")
    sets = load_context_script(path, 2, 2)
    assert len(sets) == 2
    assert np.array_equal(sets[1].contexts, [[0.6, 0.8], [-1.0, 0.0]])
    path.write_text("1 0 0\n")
    with pytest.raises(InvalidInputError):
        load_context_script(path, 2, 2)


def test_near_duplicate_script(rng):
    sets = near_duplicate_script(rng, 3, 2, 10, spread=0.01)
    assert len(sets) == 10
    for s in sets:
        assert np.linalg.norm(s.contexts, axis=1).max() <= 1 + 1e-12
        assert np.abs(s.contexts[0] - s.contexts[1]).max() < 0.1


def test_spec_validation():
    with pytest.raises(InvalidInputError):
        make_env(theta=np.array([1.0, 1.0]))
    with pytest.raises(InvalidInputError):
        make_env(sigma=-1.0)
    with pytest.raises(InvalidInputError):
        make_env(generator="fixed_cycle")
    with pytest.raises(InvalidInputError):
        make_env(generator="random_walk")
    with pytest.raises(InvalidInputError):
        make_env(k=3, generator="fixed_cycle", contexts=[two_arm_ctx()])
