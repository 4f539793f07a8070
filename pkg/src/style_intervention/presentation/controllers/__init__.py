"""Controllers for CLI commands."""

from style_intervention.presentation.controllers.base import BaseController
from style_intervention.presentation.controllers.dataset import (
    CompareSpacesController,
    SampleController,
    TrainDirectionController,
)
from style_intervention.presentation.controllers.dissect import DissectController
from style_intervention.presentation.controllers.edit import (
    BenchmarkController,
    InterpolateController,
    InterveneController,
)
from style_intervention.presentation.controllers.weights import (
    FreezeGoldenController,
    GenWeightsController,
)

COMMANDS: dict[str, type[BaseController]] = {
    "gen-weights": GenWeightsController,
    "sample": SampleController,
    "train-direction": TrainDirectionController,
    "compare-spaces": CompareSpacesController,
    "intervene": InterveneController,
    "interpolate": InterpolateController,
    "dissect": DissectController,
    "benchmark": BenchmarkController,
    "freeze-golden": FreezeGoldenController,
}

__all__ = [
    "COMMANDS",
    "BaseController",
    "BenchmarkController",
    "CompareSpacesController",
    "DissectController",
    "FreezeGoldenController",
    "GenWeightsController",
    "InterpolateController",
    "InterveneController",
    "SampleController",
    "TrainDirectionController",
]
