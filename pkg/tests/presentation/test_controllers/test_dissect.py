"""Tests for DissectController."""

import argparse
import json

from style_intervention.presentation.controllers.dissect import DissectController
from style_intervention.presentation.exit_codes import ExitCode


def _args(weights, **overrides):
    values = {
        "weights": weights,
        "samples": 2,
        "fraction": None,
        "upsample": "bilinear",
        "final_level_only": True,
        "top": 1,
        "seed": None,
        "jobs": None,
        "out": None,
        "config": None,
        "json": False,
    }
    values.update(overrides)
    return argparse.Namespace(**values)


class TestDissectController:
    """Tests for DissectController.execute()."""

    def test_human_output(self, planted_files, capsys):
        exit_code = DissectController().execute(_args(planted_files["weights"]))

        assert exit_code == ExitCode.SUCCESS
        output = capsys.readouterr().out
        assert output.startswith("Dissection over 2 samples")
        assert "IoU 1.000" in output

    def test_report_file(self, planted_files, tmp_path, capsys):
        out = tmp_path / "dissect.json"

        exit_code = DissectController().execute(
            _args(planted_files["weights"], out=str(out), jobs=2, json=True)
        )

        assert exit_code == ExitCode.SUCCESS
        assert json.loads(out.read_text()) == json.loads(capsys.readouterr().out)

    def test_bad_fraction(self, planted_files, capsys):
        exit_code = DissectController().execute(_args(planted_files["weights"], fraction=2.0))

        assert exit_code == ExitCode.USAGE_ERROR
        assert "fraction" in capsys.readouterr().err

    def test_no_samples(self, planted_files, capsys):
        exit_code = DissectController().execute(_args(planted_files["weights"], samples=0))

        assert exit_code == ExitCode.VALIDATION_ERROR
