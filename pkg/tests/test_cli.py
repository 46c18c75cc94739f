"""Command line tests: subcommands, overrides, exit codes."""

from __future__ import annotations

import pytest

from subweibull import cli
from subweibull import experiments as ex


def _write_config(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


NORMS_SMALL = "experiment = norms\nalpha = 1\nn = 100, 200\nreps = 2\n"


def test_list_prints_registry(capsys):
    assert cli.main(["list"]) == 0
    out = capsys.readouterr().out
    for name, _ in ex.list_experiments():
        assert name in out


def test_run_success_prints_artifacts(tmp_path, capsys):
    cfg = _write_config(tmp_path, NORMS_SMALL)
    assert cli.main(["run", cfg, "--out", str(tmp_path / "out")]) == 0
    out = capsys.readouterr().out
    assert "results.csv" in out
    assert "sha256=" in out
    assert (tmp_path / "out" / "manifest.json").exists()


def test_run_bad_config_exits_2(tmp_path, capsys):
    cfg = _write_config(tmp_path, "experiment = norms\nzap = 1\n")
    assert cli.main(["run", cfg]) == 2
    assert "unknown key" in capsys.readouterr().err


def test_run_missing_file_exits_4(tmp_path, capsys):
    assert cli.main(["run", str(tmp_path / "absent.cfg")]) == 4
    assert "cannot read config" in capsys.readouterr().err


def test_run_invariant_violation_exits_3(tmp_path, capsys):
    spec = ex.REGISTRY["norms"]

    def boom(config, point, rep, stream):
        raise ex.InvariantViolation("forced for the test")

    ex.REGISTRY["boom"] = ex.Experiment(
        name="boom", description="always fails",
        scan_keys=spec.scan_keys, grid_defaults=spec.grid_defaults,
        options=(), task=boom, summarize=spec.summarize,
    )
    try:
        cfg = _write_config(tmp_path, "experiment = boom\nn = 100\nreps = 1\n")
        assert cli.main(["run", cfg, "--out", str(tmp_path / "o")]) == 3
        assert "invariant violation" in capsys.readouterr().err
    finally:
        del ex.REGISTRY["boom"]


def test_run_flag_overrides(tmp_path):
    cfg = _write_config(tmp_path, NORMS_SMALL + "seed = 1\n")
    assert cli.main(["run", cfg, "--out", str(tmp_path / "a"),
                     "--seed", "2", "--workers", "2"]) == 0
    assert cli.main(["run", cfg, "--out", str(tmp_path / "b"),
                     "--seed", "2"]) == 0
    assert cli.main(["run", cfg, "--out", str(tmp_path / "c")]) == 0
    bytes_a = (tmp_path / "a" / "results.csv").read_bytes()
    assert bytes_a == (tmp_path / "b" / "results.csv").read_bytes()
    assert bytes_a != (tmp_path / "c" / "results.csv").read_bytes()


def test_run_rejects_bad_flag_values(tmp_path, capsys):
    cfg = _write_config(tmp_path, NORMS_SMALL)
    assert cli.main(["run", cfg, "--workers", "0"]) == 2
    assert cli.main(["run", cfg, "--seed", "-1"]) == 2
    err = capsys.readouterr().err
    assert "--workers" in err and "--seed" in err


def test_version_flag():
    with pytest.raises(SystemExit) as exit_info:
        cli.main(["--version"])
    assert exit_info.value.code == 0
