"""Base controller interface for CLI commands."""

import argparse
import logging
import sys
from abc import ABC, abstractmethod
from collections.abc import Callable
from typing import Any

from style_intervention.domain.directions import DirectionError
from style_intervention.domain.dissect import DissectionError
from style_intervention.domain.intervene import InterventionError
from style_intervention.domain.metrics import MetricError
from style_intervention.domain.numgrad import ShapeError, TapeError
from style_intervention.domain.stylegen.arch import ArchError, LayoutError
from style_intervention.presentation.exit_codes import ExitCode
from style_intervention.presentation.formatter import format_json
from style_intervention.service.config import ConfigError, RunConfig, resolve_config
from style_intervention.service.pipeline import ValidationError
from style_intervention.service.storage import FormatError, InputFileError, OutputPathError

logger = logging.getLogger(__name__)

USAGE_ERRORS = (ConfigError, FormatError, InputFileError, OutputPathError)
VALIDATION_ERRORS = (
    ArchError,
    LayoutError,
    DirectionError,
    InterventionError,
    DissectionError,
    MetricError,
    ShapeError,
    TapeError,
    ValidationError,
)


class BaseController(ABC):
    """Base class for CLI command controllers.

    Each controller handles one subcommand. execute() runs it and maps the
    exceptions of the lower layers onto exit codes, printing the message
    to stderr.
    """

    def execute(self, args: argparse.Namespace) -> int:
        """Execute the command and return exit code.

        Args:
            args: Parsed command-line arguments.

        Returns:
            Exit code (ExitCode enum value).
        """
        try:
            return self.run(args)
        except USAGE_ERRORS as e:
            print(f"Error: {e}", file=sys.stderr)
            return ExitCode.USAGE_ERROR
        except VALIDATION_ERRORS as e:
            print(f"Error: {e}", file=sys.stderr)
            return ExitCode.VALIDATION_ERROR

    @abstractmethod
    def run(self, args: argparse.Namespace) -> int:
        """Run the command; exceptions are handled by execute()."""

    def config(self, args: argparse.Namespace, **overrides: Any) -> RunConfig:
        """Resolve defaults < --config file < the given flag values."""
        config = resolve_config(getattr(args, "config", None), overrides)
        logger.debug("resolved config: %s", config)
        return config

    def emit(
        self,
        args: argparse.Namespace,
        summary: dict[str, Any],
        human: Callable[[dict[str, Any]], str],
    ) -> None:
        """Print summary as JSON with --json, otherwise with the human formatter."""
        if getattr(args, "json", False):
            print(format_json(summary))
        else:
            print(human(summary))
