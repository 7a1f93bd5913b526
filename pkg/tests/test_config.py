import pytest

from fairbandits.config import (
    ConfigError,
    ExperimentConfig,
    from_dict,
    load_config,
    preset,
    validate,
)


def test_default_config_is_valid():
    assert validate(ExperimentConfig()) == []


@pytest.mark.parametrize(
    "over, field",
    [
        ({"delta": 1.5}, "delta"),
        ({"delta": 0.0}, "delta"),
        ({"k": 1}, "k"),
        ({"T": 0}, "T"),
        ({"d": 0}, "d"),
        ({"epsilon": -0.1}, "epsilon"),
        ({"epsilon": 0.0}, "epsilon_sq"),
        ({"epsilon_sq": -1.0}, "epsilon_sq"),
        ({"lambda": 0.0}, "lambda"),
        ({"noise_sigma": -1.0}, "noise_sigma"),
        ({"algorithm": "greedy"}, "algorithm"),
        ({"seeds": []}, "seeds"),
        ({"seeds": [2**64]}, "seeds[0]"),
        ({"seeds": [-1]}, "seeds[0]"),
        ({"B1": 0.0}, "B1"),
        ({"environment": {"theta": [1.0, 1.0, 0.0]}}, "environment.theta"),
        ({"environment": {"theta": [1.0, 0.0]}}, "environment.theta"),
        ({"environment": {"A": [1.0, 0.0]}}, "environment.A"),
        ({"environment": {"A": [2.0, 0, 0, 0, 1, 0, 0, 0, 1]}}, "environment.A"),
        ({"environment": {"metric_frobenius": 2.0}}, "environment.metric_frobenius"),
        ({"environment": {"generator": "walk"}}, "environment.generator"),
        ({"environment": {"generator": "fixed_cycle", "contexts": [[1.0, 0.0]]}}, "environment.contexts[0]"),
        ({"environment": {"generator": "adversarial_script"}}, "environment.script_path"),
        ({"environment": {"generator": "adversarial_script", "script_path": "/no/such/file"}}, "environment.script_path"),
    ],
)
def test_diagnostic_names_field(over, field):
    problems = validate(from_dict(over))
    assert problems, over
    assert any(p.startswith(field + ":") for p in problems), problems


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError) as err:
        from_dict({"kk": 3, "environment": {"thetas": [1.0]}})
    assert "kk: unknown field" in err.value.diagnostics
    assert "environment.thetas: unknown field" in err.value.diagnostics


def test_presets():
    desk = preset("desk_scale")
    assert (desk.k, desk.d, desk.T, desk.epsilon, desk.lam, desk.delta) == (4, 3, 20000, 0.05, 1.0, 0.05)
    paper = preset("paper_defaults", k=3, T=1000)
    assert paper.epsilon == pytest.approx(1 / (27 * 1000))
    assert paper.effective_epsilon_sq == pytest.approx(paper.epsilon**2)
    assert validate(paper) == []
    with pytest.raises(ConfigError):
        preset("nope")


def test_yaml_round_trip(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text("preset: desk_scale\nalgorithm: full_multi\nlambda: 2.0\nT: 50\nseeds: [1, 2]\n"
                    "environment:\n  generator: fixed_cycle\n  cycle_length: 3\n")
    cfg = load_config(path)
    assert cfg.algorithm == "full_multi" and cfg.mode == "multi"
    assert cfg.lam == 2.0 and cfg.T == 50 and cfg.seeds == [1, 2] and cfg.k == 4
    assert cfg.environment.cycle_length == 3
    assert cfg.to_dict()["lambda"] == 2.0


def test_yaml_errors(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("k: [1, 2\n")
    with pytest.raises(ConfigError):
        load_config(bad)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.yaml")
    lst = tmp_path / "list.yaml"
    lst.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigError):
        load_config(lst)
