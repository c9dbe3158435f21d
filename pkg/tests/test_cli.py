"""Tests for the rcm-lab entry point and its management commands."""

from io import StringIO

import pytest
from django.core.management import call_command
from django.core.management.base import CommandError

from rcmlab.cli import main
from rcmlab.harness import read_snapshot, read_table


@pytest.fixture
def small_config(config_file):
    return config_file("half_width = 6\ntheta_seeds = 2\n")


class TestMain:
    def test_no_command(self, capsys):
        assert main([]) == 64
        assert "usage: rcm-lab" in capsys.readouterr().out

    def test_help(self, capsys):
        assert main(["--help"]) == 0

    def test_unknown_command(self, capsys):
        assert main(["frobnicate"]) == 64
        assert "unknown command" in capsys.readouterr().err

    def test_bad_option(self, capsys):
        assert main(["theta", "--threads", "many"]) == 64

    def test_invalid_config(self, config_file, tmp_path, capsys):
        path = config_file("half_width = 6\nno_such_key = 1\n")
        assert main(["theta", "--config", str(path), "--out", str(tmp_path)]) == 3

    def test_missing_config(self, tmp_path, capsys):
        assert main(["theta", "--config", str(tmp_path / "absent.toml")]) == 3

    def test_theta_writes_table(self, small_config, tmp_path, capsys):
        assert main(["theta", "--config", str(small_config), "--out", str(tmp_path)]) == 0
        meta, rows = read_table(tmp_path / "theta.csv")
        assert len(rows) == 2
        assert (tmp_path / "theta.manifest.json").exists()
        assert "theta_hat" in capsys.readouterr().out

    def test_seed_override_changes_hash(self, small_config, tmp_path, capsys):
        main(["theta", "--config", str(small_config), "--out", str(tmp_path / "a")])
        main(["theta", "--config", str(small_config), "--seed", "5", "--out", str(tmp_path / "b")])
        first, _ = read_table(tmp_path / "a" / "theta.csv")
        second, _ = read_table(tmp_path / "b" / "theta.csv")
        assert first["config_hash"] != second["config_hash"]
        assert second["master_seed"] == "5"

    def test_failed_acceptance(self, config_file, tmp_path, capsys):
        path = config_file(
            "half_width = 34\n"
            "n_grid = [4, 8]\n"
            "mesh_radii = 1\n"
            "mesh_angles = 4\n"
            "thm12_cap = 1e-6\n"
            'solver = "direct"\n'
        )
        assert main(["verify", "thm12", "--config", str(path), "--out", str(tmp_path)]) == 2
        assert (tmp_path / "thm12.csv").exists()


class TestCommands:
    def test_green(self, small_config, tmp_path):
        out = StringIO()
        call_command(
            "green",
            config=str(small_config),
            out=str(tmp_path),
            x=[1, 0],
            y=[0, 0],
            n=4,
            stdout=out,
        )
        _, rows = read_table(tmp_path / "green.csv")
        assert rows[0]["x"] == "1 0"
        assert float(rows[0]["green"]) > 0
        assert "green: done" in out.getvalue()

    def test_env_sample_then_inspect(self, small_config, tmp_path):
        call_command(
            "env", "sample", config=str(small_config), out=str(tmp_path), stdout=StringIO()
        )
        snapshot = tmp_path / "env.bin"
        assert read_snapshot(snapshot).half_width == 6
        out = StringIO()
        call_command(
            "env", "inspect", str(snapshot), config=str(small_config), out=str(tmp_path), stdout=out
        )
        assert "giant_fraction" in out.getvalue()

    def test_env_inspect_needs_path(self, small_config):
        with pytest.raises(CommandError) as excinfo:
            call_command("env", "inspect", config=str(small_config))
        assert excinfo.value.returncode == 64
