"""Controller for network dissection."""

import argparse

from style_intervention.presentation.controllers.base import BaseController
from style_intervention.presentation.exit_codes import ExitCode
from style_intervention.presentation.formatter import format_dissection
from style_intervention.service.pipeline import run_dissection


class DissectController(BaseController):
    """Controller for 'dissect'."""

    def run(self, args: argparse.Namespace) -> int:
        config = self.config(args, seed=args.seed, fraction=args.fraction, jobs=args.jobs)
        summary = run_dissection(
            args.weights,
            args.samples,
            args.upsample,
            args.final_level_only,
            args.top,
            args.out,
            config,
        )
        self.emit(args, summary, format_dissection)
        return ExitCode.SUCCESS
