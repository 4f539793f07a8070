"""Tests for SampleController, TrainDirectionController and CompareSpacesController."""

import argparse
import json

import pytest

from style_intervention.presentation.controllers.dataset import (
    CompareSpacesController,
    SampleController,
    TrainDirectionController,
)
from style_intervention.presentation.exit_codes import ExitCode


def _training_args(**overrides):
    values = {
        "dataset": None,
        "attr": None,
        "space": None,
        "l1": 1e-3,
        "hinge_c": None,
        "epochs": 100,
        "solver": None,
        "no_refit": False,
        "seed": None,
        "out": None,
        "config": None,
        "json": False,
    }
    values.update(overrides)
    return argparse.Namespace(**values)


class TestSampleController:
    """Tests for SampleController.execute()."""

    def test_writes_dataset(self, planted_files, tmp_path, capsys):
        out = tmp_path / "data"
        args = argparse.Namespace(
            weights=planted_files["weights"],
            n=10,
            seed=None,
            jobs=2,
            out=str(out),
            config=None,
            json=True,
        )

        exit_code = SampleController().execute(args)

        assert exit_code == ExitCode.SUCCESS
        summary = json.loads(capsys.readouterr().out)
        assert summary["n"] == 10
        assert summary["seed"] == 7
        assert (out / "dataset.siv").exists()

    def test_missing_weights(self, tmp_path, capsys):
        args = argparse.Namespace(
            weights=str(tmp_path / "absent.siv"),
            n=1,
            seed=None,
            jobs=None,
            out=str(tmp_path / "data"),
            config=None,
            json=False,
        )

        exit_code = SampleController().execute(args)

        assert exit_code == ExitCode.USAGE_ERROR
        assert "file not found" in capsys.readouterr().err


class TestTrainDirectionController:
    """Tests for TrainDirectionController.execute()."""

    def test_trains_s_direction(self, planted_files, tmp_path, capsys):
        out = tmp_path / "dir.siv"
        args = _training_args(dataset=planted_files["dataset"], space="S", out=str(out))

        exit_code = TrainDirectionController().execute(args)

        assert exit_code == ExitCode.SUCCESS
        output = capsys.readouterr().out
        assert "Direction: red_top_left in S" in output
        assert "L1 mass on concept" in output
        assert out.exists()

    def test_solver_flags_reach_the_report(self, planted_files, tmp_path, capsys):
        args = _training_args(
            dataset=planted_files["dataset"],
            space="Z",
            solver="subgradient",
            no_refit=True,
            out=str(tmp_path / "dir.siv"),
            json=True,
        )

        exit_code = TrainDirectionController().execute(args)

        assert exit_code == ExitCode.SUCCESS
        summary = json.loads(capsys.readouterr().out)
        assert summary["config"]["solver"] == "subgradient"
        assert summary["config"]["refit"] is False
        assert summary["inputs"]["dataset"]["sha256"]

    def test_unknown_attribute_is_a_validation_error(self, planted_files, tmp_path, capsys):
        args = _training_args(
            dataset=planted_files["dataset"], attr="blue", space="Z", out=str(tmp_path / "d.siv")
        )

        exit_code = TrainDirectionController().execute(args)

        assert exit_code == ExitCode.VALIDATION_ERROR
        assert "unknown attribute blue" in capsys.readouterr().err

    def test_l1_too_strong_is_a_validation_error(self, planted_files, tmp_path, capsys):
        """A penalty that zeroes every coordinate should be reported, not written."""
        out = tmp_path / "d.siv"
        args = _training_args(dataset=planted_files["dataset"], space="S", l1=1e6, out=str(out))

        exit_code = TrainDirectionController().execute(args)

        assert exit_code == ExitCode.VALIDATION_ERROR
        assert "lower l1_lambda" in capsys.readouterr().err
        assert not out.exists()


class TestCompareSpacesController:
    """Tests for CompareSpacesController.execute()."""

    @pytest.mark.parametrize("as_json", [False, True])
    def test_table(self, planted_files, capsys, as_json):
        args = _training_args(dataset=planted_files["dataset"], json=as_json)

        exit_code = CompareSpacesController().execute(args)

        assert exit_code == ExitCode.SUCCESS
        output = capsys.readouterr().out
        if as_json:
            assert set(json.loads(output)["spaces"]) == {"Z", "W", "S"}
        else:
            assert output.startswith("Separability of red_top_left")
