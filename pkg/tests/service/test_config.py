"""Tests for run configuration resolution."""

import json

import pytest

from style_intervention.domain.intervene import LossWeights, Schedule
from style_intervention.service.config import (
    ConfigError,
    RunConfig,
    build_config,
    resolve_config,
)


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(
        json.dumps(
            {
                "seed": 11,
                "beta": 2.0,
                "schedule": {"steps": 40, "learning_rate": 0.1},
                "loss_weights": {"lambda_attr": 0.5},
            }
        )
    )
    return path


class TestRunConfig:
    """Tests for RunConfig defaults and validation."""

    def test_defaults(self):
        config = RunConfig()

        assert config.seed == 7
        assert config.beta == 3.0
        assert config.schedule == Schedule()
        assert config.loss_weights == LossWeights()

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"backend": "gan"},
            {"space": "X"},
            {"dataset_size": -1},
            {"jobs": 0},
            {"fraction": 0},
            {"fraction": 1.0},
            {"solver": "newton"},
        ],
    )
    def test_invalid_values(self, kwargs):
        with pytest.raises(ConfigError):
            RunConfig(**kwargs)

    def test_training_params(self):
        params = RunConfig(
            l1_lambda=0.01, epochs=10, seed=4, solver="subgradient", refit=False
        ).training_params()

        assert (params.l1_lambda, params.epochs, params.seed) == (0.01, 10, 4)
        assert (params.solver, params.refit) == ("subgradient", False)

    def test_to_dict_nests_schedule(self):
        data = RunConfig().to_dict()

        assert data["schedule"]["steps"] == 200
        assert data["loss_weights"]["lambda_norm"] == 1e-6


class TestBuildConfig:
    """Tests for build_config()."""

    def test_unknown_key(self):
        with pytest.raises(ConfigError) as exc_info:
            build_config({"sead": 1})

        assert exc_info.value.key == "sead"

    def test_unknown_nested_key(self):
        with pytest.raises(ConfigError) as exc_info:
            build_config({"schedule": {"stepz": 3}})

        assert exc_info.value.key == "schedule.stepz"

    def test_nested_must_be_object(self):
        with pytest.raises(ConfigError):
            build_config({"schedule": 3})

    def test_invalid_nested_value(self):
        with pytest.raises(ConfigError) as exc_info:
            build_config({"schedule": {"mode": "sideways"}})

        assert exc_info.value.key == "schedule"


class TestResolveConfig:
    """Tests for defaults < file < command line precedence."""

    def test_no_sources(self):
        assert resolve_config() == RunConfig()

    def test_file_overrides_defaults(self, config_file):
        config = resolve_config(config_file)

        assert config.seed == 11
        assert config.schedule.steps == 40
        assert config.schedule.mode == "layerwise"
        assert config.loss_weights.lambda_attr == 0.5

    def test_command_line_overrides_file(self, config_file):
        config = resolve_config(config_file, {"seed": 3, "schedule": {"steps": 5}})

        assert config.seed == 3
        assert config.schedule.steps == 5
        assert config.schedule.learning_rate == 0.1
        assert config.beta == 2.0

    def test_none_overrides_are_not_given(self, config_file):
        config = resolve_config(
            config_file, {"seed": None, "schedule": {"steps": None}, "loss_weights": {}}
        )

        assert config.seed == 11
        assert config.schedule.steps == 40
        assert config.loss_weights.lambda_attr == 0.5

    def test_file_must_hold_an_object(self, tmp_path):
        path = tmp_path / "list.json"
        path.write_text("[1, 2]")

        with pytest.raises(ConfigError, match="JSON object"):
            resolve_config(path)
