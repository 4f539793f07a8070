"""Centralized exit code definitions for CLI commands."""

from enum import IntEnum


class ExitCode(IntEnum):
    """Exit codes shared by every subcommand.

    SUCCESS: The command completed.
    USAGE_ERROR: Bad flags, missing or unwritable files, malformed config
        or input files.
    VALIDATION_ERROR: Inputs are well-formed but inconsistent (layout
        mismatch, single-class attribute, non-finite optimization) or a
        requested acceptance check failed.
    """

    SUCCESS = 0
    USAGE_ERROR = 1
    VALIDATION_ERROR = 2
