"""Controllers for building weights and freezing golden data."""

import argparse
import json

from style_intervention.presentation.controllers.base import BaseController
from style_intervention.presentation.exit_codes import ExitCode
from style_intervention.presentation.formatter import format_human
from style_intervention.service.config import ConfigError
from style_intervention.service.pipeline import run_freeze_golden, run_gen_weights


def parse_arch(value: str | None) -> dict | None:
    """Parse the --arch JSON object."""
    if value is None:
        return None
    try:
        arch = json.loads(value)
    except json.JSONDecodeError as e:
        raise ConfigError(f"--arch is not valid JSON: {e}", "arch") from e
    if not isinstance(arch, dict):
        raise ConfigError("--arch must be a JSON object", "arch")
    return arch


class GenWeightsController(BaseController):
    """Controller for 'gen-weights'."""

    def run(self, args: argparse.Namespace) -> int:
        config = self.config(
            args, seed=args.seed, backend=args.backend, arch=parse_arch(args.arch)
        )
        self.emit(args, run_gen_weights(config, args.out), format_human)
        return ExitCode.SUCCESS


class FreezeGoldenController(BaseController):
    """Controller for 'freeze-golden'."""

    def run(self, args: argparse.Namespace) -> int:
        config = self.config(args, seed=args.seed)
        self.emit(args, run_freeze_golden(args.out, config), format_human)
        return ExitCode.SUCCESS
