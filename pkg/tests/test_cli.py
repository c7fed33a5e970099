import json

import pytest

from cli.main import build_parser, main, resolve_config


def _train(out_dir, *extra):
    return main(["train", "--config", "blobs_ghl", "--epochs", "1", "--threads", "1", "--out-dir", str(out_dir), *extra])


def _manifest(out_dir):
    return json.loads((out_dir / "manifest.json").read_text(encoding="utf-8"))


def _error_lines(capsys):
    return [line for line in capsys.readouterr().err.splitlines() if line.startswith("error: ")]


def test_train_one_epoch_writes_one_row(tmp_path, capsys):
    """Test `train --epochs 1` gives a header plus exactly one data row"""
    assert _train(tmp_path / "run") == 0
    lines = (tmp_path / "run" / "metrics.csv").read_text(encoding="utf-8").splitlines()
    assert len(lines) == 2
    assert lines[0].startswith("epoch,train_loss,train_acc,test_acc,wall_seconds,eta,layer0_wnorm_min")
    assert lines[1].startswith("1,")
    assert "epoch 1" in capsys.readouterr().out


def test_rerun_is_byte_identical(tmp_path):
    """Test same config and seed in deterministic mode reproduce metrics.csv exactly"""
    assert _train(tmp_path / "a") == 0
    assert _train(tmp_path / "b") == 0
    assert (tmp_path / "a" / "metrics.csv").read_bytes() == (tmp_path / "b" / "metrics.csv").read_bytes()
    assert _manifest(tmp_path / "a")["config_hash"] == _manifest(tmp_path / "b")["config_hash"]


def test_rule_override_changes_only_the_rule(tmp_path):
    """Test --rule ghl vs --rule hebb_swta: same manifest apart from the rule, different metrics"""
    assert _train(tmp_path / "ghl", "--rule", "ghl") == 0
    assert _train(tmp_path / "swta", "--rule", "hebb_swta") == 0
    ghl = _manifest(tmp_path / "ghl")["config"]
    swta = _manifest(tmp_path / "swta")["config"]
    assert (ghl["rule"]["kind"], swta["rule"]["kind"]) == ("ghl", "hebb_swta")
    ghl["rule"].pop("kind")
    swta["rule"].pop("kind")
    assert ghl == swta
    assert (tmp_path / "ghl" / "metrics.csv").read_bytes() != (tmp_path / "swta" / "metrics.csv").read_bytes()


def test_flag_precedence_in_manifest(tmp_path):
    """Test typed flags beat --set, which beats the file, which beats defaults"""
    assert _train(tmp_path / "run", "--set", "eta=0.1", "--eta", "0.05", "--set", "rule.tau=0.5") == 0
    config = _manifest(tmp_path / "run")["config"]
    assert config["eta"] == 0.05
    assert config["rule"]["tau"] == 0.5
    assert config["batch_size"] == 16
    assert config["epochs"] == 1
    assert config["loss_scale"] == 1.0


def test_resolve_config_without_file():
    """Test flags alone build a config on model defaults"""
    args = build_parser().parse_args(["train", "--rule", "sign_only", "--seed", "4"])
    config = resolve_config(args)
    assert config.rule.kind.value == "sign_only"
    assert config.seed == 4
    assert config.arch == "blobs_mlp"


def test_eval_checkpoint(tmp_path, capsys):
    """Test eval reads the checkpoint a train run wrote"""
    assert _train(tmp_path / "run") == 0
    assert main(["eval", "--checkpoint", str(tmp_path / "run" / "checkpoint.ghlckpt")]) == 0
    assert "test: loss=" in capsys.readouterr().out
    result = json.loads((tmp_path / "run" / "eval_test.json").read_text(encoding="utf-8"))
    assert result["samples"] == 150


def test_gradcheck_passes_on_tiny_mlp(capsys):
    """Test tiny MLP gradcheck exits 0 and prints every layer"""
    assert main(["gradcheck", "--arch", "tiny_mlp", "--seed", "0"]) == 0
    out = capsys.readouterr().out
    assert "layer0_dense: max relative error" in out
    assert "PASS" in out


def test_gradcheck_corrupted_backward_fails(capsys):
    """Test the corrupted-backward hook makes gradcheck exit 1"""
    assert main(["gradcheck", "--arch", "tiny_mlp", "--corrupt-backward"]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_gradcheck_refuses_large_arch(capsys):
    """Test oversized architectures exit 2 with the limit stated"""
    assert main(["gradcheck", "--arch", "mnist_mlp"]) == 2
    (line,) = _error_lines(capsys)
    assert line.startswith("error: refusing gradcheck")
    assert "10000" in line


def test_ablate_two_rules(tmp_path):
    """Test rules={ghl, sign_only}, one seed, one epoch gives a 2-row summary"""
    out = tmp_path / "abl"
    code = main(
        ["ablate", "--config", "blobs_ghl", "--rules", "ghl,sign_only", "--seeds", "0", "--epochs", "1",
         "--threads", "1", "--out-dir", str(out)]
    )
    assert code == 0
    lines = (out / "summary.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "rule,seed,eta,train_acc,test_acc"
    assert [line.split(",")[0] for line in lines[1:]] == ["ghl", "sign_only"]
    assert (out / "summary.md").is_file()


def test_ablate_empty_seed_list(tmp_path, capsys):
    """Test an empty seed list is an error"""
    code = main(["ablate", "--config", "blobs_ghl", "--rules", "ghl,sign_only", "--seeds", "", "--out-dir", str(tmp_path)])
    assert code == 2
    (line,) = _error_lines(capsys)
    assert "seed" in line


@pytest.mark.parametrize(
    "argv, message",
    [
        (["train", "--rule", "hebbian"], "unknown rule 'hebbian'"),
        (["ablate", "--rules", "ghl,oja", "--seeds", "0"], "unknown rule 'oja'"),
        (["train", "--config", "no_such_config"], "not found"),
        (["train", "--set", "rule.temperature=2"], "unknown config key 'rule.temperature'"),
        (["ablate", "--seeds", "0,x", "--rules", "ghl,sign_only"], "cannot parse seed list"),
    ],
)
def test_errors_are_one_line_exit_2(argv, message, capsys):
    """Test bad names and keys exit 2 with a one-line cause"""
    assert main(argv) == 2
    (line,) = _error_lines(capsys)
    assert message in line


def test_sweep_writes_one_row_per_cell(tmp_path):
    """Test a 2-depth, 1-multiplier, 1-activation, 1-rule sweep on image blobs"""
    out = tmp_path / "sweep"
    code = main(
        ["sweep", "--config", "sweep_conv", "--epochs", "1", "--depths", "1,2", "--multipliers", "1",
         "--activations", "triangle", "--rules", "ghl", "--base-channels", "2", "--threads", "1", "--out-dir", str(out)]
    )
    assert code == 0
    lines = (out / "summary.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "depth,multiplier,activation,rule,seed,train_acc,test_acc"
    assert [line.split(",")[0] for line in lines[1:]] == ["1", "2"]


def test_set_overrides_survive_absent_flags():
    """Test --set values for keys that also have typed flags reach the config"""
    args = build_parser().parse_args(
        ["train", "--config", "blobs_ghl", "--set", "eta=0.1", "--set", "seed=7", "--set", "rule.kind=sign_only"]
    )
    config = resolve_config(args)
    assert config.eta == 0.1
    assert config.seed == 7
    assert config.rule.kind.value == "sign_only"


def test_unknown_rule_in_list_names_accepted_rules(capsys):
    """Test a bad name inside --rules keeps the accepted-values message"""
    assert main(["ablate", "--rules", "ghl,oja", "--seeds", "0"]) == 2
    (line,) = _error_lines(capsys)
    assert "cannot parse" not in line
    assert "accepted:" in line and "'hebb_oja'" in line


def test_runs_lists_a_trained_run(tmp_path, capsys):
    """Test `runs` prints the registry row and, with --run-id, its epochs"""
    assert _train(tmp_path / "run") == 0
    capsys.readouterr()
    assert main(["runs", str(tmp_path / "run")]) == 0
    (line,) = capsys.readouterr().out.splitlines()
    assert " train rule=ghl seed=0 status=finished epochs=1 " in line
    run_id = line.split()[0]
    assert main(["runs", str(tmp_path / "run"), "--run-id", run_id]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[1].startswith("  epoch 1: train_loss=")
    assert main(["runs", str(tmp_path / "nothing")]) == 2
    (error,) = _error_lines(capsys)
    assert "no run registry" in error
