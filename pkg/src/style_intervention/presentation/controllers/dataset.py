"""Controllers for dataset sampling and direction training."""

import argparse

from style_intervention.presentation.controllers.base import BaseController
from style_intervention.presentation.exit_codes import ExitCode
from style_intervention.presentation.formatter import (
    format_human,
    format_spaces_table,
    format_training,
)
from style_intervention.service.config import RunConfig
from style_intervention.service.pipeline import (
    run_compare_spaces,
    run_sample,
    run_train_direction,
)


class SampleController(BaseController):
    """Controller for 'sample'."""

    def run(self, args: argparse.Namespace) -> int:
        config = self.config(args, seed=args.seed, dataset_size=args.n, jobs=args.jobs)
        summary = run_sample(args.weights, args.out, config)
        self.emit(args, summary, format_human)
        return ExitCode.SUCCESS


def _training_config(controller: BaseController, args: argparse.Namespace) -> RunConfig:
    return controller.config(
        args,
        seed=args.seed,
        attribute=args.attr,
        space=getattr(args, "space", None),
        l1_lambda=args.l1,
        hinge_c=args.hinge_c,
        epochs=args.epochs,
        solver=args.solver,
        refit=False if args.no_refit else None,
    )


class TrainDirectionController(BaseController):
    """Controller for 'train-direction'."""

    def run(self, args: argparse.Namespace) -> int:
        config = _training_config(self, args)
        summary = run_train_direction(args.dataset, args.out, config)
        self.emit(args, summary, format_training)
        return ExitCode.SUCCESS


class CompareSpacesController(BaseController):
    """Controller for 'compare-spaces'."""

    def run(self, args: argparse.Namespace) -> int:
        config = _training_config(self, args)
        summary = run_compare_spaces(args.dataset, config)
        self.emit(args, summary, format_spaces_table)
        return ExitCode.SUCCESS
