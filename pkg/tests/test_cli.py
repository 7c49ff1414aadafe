import pytest

from twtlrl.cli import main

SIMPLE_SPEC = """obs_dim 2
pred up := 0.5 - abs(o[0])
formula := [H^2 up]^[0,4]
"""


@pytest.fixture
def spec_file(tmp_path):
    path = tmp_path / "task.twtl"
    path.write_text(SIMPLE_SPEC)
    return str(path)


def test_parse_prints_canonical_form(spec_file, capsys):
    assert main(["parse", spec_file]) == 0
    out = capsys.readouterr().out
    assert "obs_dim 2" in out
    assert "[H^2 up]^[0,4]" in out


def test_parse_bad_spec_is_domain_failure(tmp_path, capsys):
    bad = tmp_path / "bad.twtl"
    bad.write_text("obs_dim 2\nformula := H^1 nothere\n")
    assert main(["parse", str(bad)]) == 1
    assert "spec error" in capsys.readouterr().err


def test_missing_file_is_usage_error(tmp_path):
    assert main(["parse", str(tmp_path / "nope.twtl")]) == 2


def test_horizon(spec_file, capsys):
    assert main(["horizon", spec_file]) == 0
    assert capsys.readouterr().out.strip() == "4"


def test_monitor_exit_codes(spec_file, tmp_path, capsys):
    good = tmp_path / "good.csv"
    good.write_text("\n".join(["0.0,0.0"] * 5) + "\n")
    assert main(["monitor", spec_file, "--word", str(good)]) == 0
    out = capsys.readouterr().out
    assert "satisfied true" in out
    assert "robustness 0.5" in out

    bad = tmp_path / "bad.csv"
    bad.write_text("\n".join(["9.0,0.0"] * 5) + "\n")
    assert main(["monitor", spec_file, "--word", str(bad)]) == 1


def test_gen_demos_and_bc_and_degrade_and_eval(tmp_path, capsys):
    demos = tmp_path / "demos.csv"
    assert main(["gen-demos", "--env", "pendulum", "--episodes", "3",
                 "--seed", "0", "--out", str(demos)]) == 0
    assert demos.exists()

    policy = tmp_path / "bc.params"
    assert main(["bc", "--demos", str(demos), "--env", "pendulum",
                 "--epochs", "2", "--seed", "0", "--out", str(policy)]) == 0
    assert policy.exists()

    worse = tmp_path / "worse.params"
    assert main(["degrade", "--policy", str(policy), "--sigma", "0.1",
                 "--seed", "1", "--out", str(worse)]) == 0
    assert worse.exists()

    capsys.readouterr()
    assert main(["eval", "--policy", str(policy), "--env", "pendulum",
                 "--episodes", "2", "--seed", "0"]) == 0
    out = capsys.readouterr().out
    assert "mean_return" in out and "satisfaction_rate" in out


def test_train_predictor_cli(tmp_path, spec_file):
    demos = tmp_path / "demos.csv"
    main(["gen-demos", "--env", "pendulum", "--episodes", "2",
          "--seed", "0", "--out", str(demos)])
    out = tmp_path / "pred.params"
    assert main(["train-predictor", "--demos", str(demos), "--spec", spec_file,
                 "--window", "2", "--epochs", "1", "--stride", "50",
                 "--seed", "0", "--out", str(out)]) == 0
    assert out.exists()


def test_verify_shaping_cli(capsys):
    assert main(["verify-shaping", "--trials", "5", "--seed", "0"]) == 0
    assert "passed 5/5" in capsys.readouterr().out
    assert main(["verify-shaping", "--trials", "3", "--form", "reverse",
                 "--seed", "0"]) == 0


def test_train_cli_smoke(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("""
[run]
env = pendulum
[ppo]
total_steps = 256
rollout_steps = 128
epochs = 1
[demos]
episodes = 2
[bc]
epochs = 2
""")
    out = tmp_path / "run"
    assert main(["train", "--config", str(cfg), "--variant", "vanilla",
                 "--seed", "0", "--out", str(out)]) == 0
    assert (out / "metrics.csv").exists()


def test_bad_config_is_usage_error(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("[run]\nenv = hovercraft\n")
    assert main(["train", "--config", str(cfg), "--out",
                 str(tmp_path / "x")]) == 2


def test_experiment_cli_smoke(tmp_path, capsys):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("""
[run]
env = pendulum
seeds = 0
variants = vanilla
[ppo]
total_steps = 256
rollout_steps = 128
epochs = 1
[demos]
episodes = 2
[bc]
epochs = 2
""")
    out = tmp_path / "exp"
    assert main(["experiment", "--config", str(cfg), "--out", str(out)]) == 0
    assert (out / "summary.csv").exists()
