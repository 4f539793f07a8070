"""Integration tests for the style-intervention CLI entry point."""

import json
import logging

import pytest

from style_intervention.presentation.cli import configure_logging, main
from style_intervention.presentation.exit_codes import ExitCode


def run_cli(*argv):
    """Run main() and return its exit code."""
    with pytest.raises(SystemExit) as exc_info:
        main(list(argv))
    return exc_info.value.code


class TestConfigureLogging:
    """Tests for configure_logging()."""

    @pytest.mark.parametrize(
        "verbosity, level",
        [(0, logging.WARNING), (1, logging.INFO), (2, logging.DEBUG), (5, logging.DEBUG)],
    )
    def test_levels(self, verbosity, level):
        configure_logging(verbosity)

        assert logging.getLogger().level == level


class TestCliIntegration:
    """End-to-end runs of the CLI on a small planted generator."""

    ARCH = json.dumps(
        {
            "d_z": 16,
            "d_w": 16,
            "const_channels": 8,
            "levels": [
                {"resolution": 4, "channels": [8]},
                {"resolution": 8, "channels": [8]},
                {"resolution": 16, "channels": [8]},
            ],
        }
    )

    def test_full_pipeline(self, tmp_path, capsys):
        weights = str(tmp_path / "w.siv")
        data = str(tmp_path / "data")
        dir_z, dir_s = str(tmp_path / "z.siv"), str(tmp_path / "s.siv")
        edit = str(tmp_path / "edit")

        assert run_cli(
            "gen-weights", "--backend", "planted", "--arch", self.ARCH, "--out", weights
        ) == ExitCode.SUCCESS
        assert run_cli("sample", "--weights", weights, "--n", "200", "--out", data) == 0
        for space, out in (("z", dir_z), ("s", dir_s)):
            code = run_cli(
                "train-direction", "--dataset", data, "--space", space,
                "--l1", "1e-3", "--epochs", "200", "--out", out,
            )
            assert code == ExitCode.SUCCESS
        capsys.readouterr()

        code = run_cli(
            "intervene", "--weights", weights, "--dir-z", dir_z, "--dir-s", dir_s,
            "--steps", "2", "--out", edit, "--json",
        )

        assert code == ExitCode.SUCCESS
        report = json.loads(capsys.readouterr().out)
        assert report["mask"] == "top_left"
        assert run_cli("interpolate", "--result", edit, "--out", str(tmp_path / "i")) == 0

    def test_json_output_is_reproducible(self, tmp_path, capsys):
        outputs = []
        for name in ("a.siv", "b.siv"):
            run_cli("gen-weights", "--seed", "5", "--out", str(tmp_path / name), "--json")
            summary = json.loads(capsys.readouterr().out)
            summary.pop("weights")
            outputs.append(summary)

        assert outputs[0] == outputs[1]

    def test_missing_input_exits_1(self, tmp_path, capsys):
        code = run_cli("dissect", "--weights", str(tmp_path / "absent.siv"))

        assert code == ExitCode.USAGE_ERROR
        assert capsys.readouterr().err.startswith("Error: cannot read")

    def test_unknown_flag_exits_1(self, capsys):
        assert run_cli("sample", "--bogus") == ExitCode.USAGE_ERROR

    def test_empty_dataset_exits_2(self, tmp_path, capsys):
        weights = str(tmp_path / "w.siv")
        data = str(tmp_path / "data")
        run_cli("gen-weights", "--backend", "planted", "--arch", self.ARCH, "--out", weights)
        run_cli("sample", "--weights", weights, "--n", "0", "--out", data)

        code = run_cli(
            "train-direction", "--dataset", data, "--out", str(tmp_path / "d.siv")
        )

        assert code == ExitCode.VALIDATION_ERROR
        assert "empty" in capsys.readouterr().err

    def test_verbose_logs_to_stderr(self, tmp_path, capsys):
        run_cli("freeze-golden", "--out", str(tmp_path / "g.json"), "-v")

        captured = capsys.readouterr()
        assert "weights_sha256" in captured.out
        assert "INFO" in captured.err
