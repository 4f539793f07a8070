"""Controllers for intervention, interpolation and benchmarking."""

import argparse
import sys

from style_intervention.presentation.controllers.base import BaseController
from style_intervention.presentation.exit_codes import ExitCode
from style_intervention.presentation.formatter import (
    format_benchmark_table,
    format_human,
    format_intervention,
)
from style_intervention.service.config import RunConfig
from style_intervention.service.pipeline import (
    benchmark_failures,
    run_benchmark,
    run_intervention,
    run_interpolation,
)
from style_intervention.service.storage import write_json


def _edit_config(controller: BaseController, args: argparse.Namespace) -> RunConfig:
    return controller.config(
        args,
        seed=args.seed,
        beta=args.beta,
        loss_weights={"lambda_attr": args.lattr, "lambda_norm": args.lnorm},
        schedule={
            "steps": args.steps,
            "learning_rate": args.lr,
            "mode": args.mode,
            "granularity": args.granularity,
            "direction_scale": args.direction_scale,
        },
    )


class InterveneController(BaseController):
    """Controller for 'intervene'."""

    def run(self, args: argparse.Namespace) -> int:
        config = _edit_config(self, args)
        report = run_intervention(
            args.weights,
            args.dir_z,
            args.dir_s,
            args.sample_index,
            args.mask,
            config,
            args.out,
        )
        self.emit(args, report, format_intervention)
        return ExitCode.SUCCESS


class InterpolateController(BaseController):
    """Controller for 'interpolate'."""

    def run(self, args: argparse.Namespace) -> int:
        report = run_interpolation(args.result, args.t_list, args.out, self.config(args))
        summary = {"tool": report["tool"], "out": str(args.out), "frames": len(report["frames"])}
        self.emit(args, report if getattr(args, "json", False) else summary, format_human)
        return ExitCode.SUCCESS


class BenchmarkController(BaseController):
    """Controller for 'benchmark'.

    With --check, a report that misses an acceptance threshold returns
    VALIDATION_ERROR after the report has been printed.
    """

    def run(self, args: argparse.Namespace) -> int:
        config = _edit_config(self, args)
        report = run_benchmark(
            args.weights, args.dir_z, args.dir_s, args.samples, config, args.mask
        )
        failures = benchmark_failures(report)
        report["failures"] = failures
        if args.out is not None:
            write_json(args.out, report)
        self.emit(args, report, format_benchmark_table)
        if args.check and failures:
            print(f"Error: {len(failures)} acceptance check(s) failed", file=sys.stderr)
            return ExitCode.VALIDATION_ERROR
        return ExitCode.SUCCESS
