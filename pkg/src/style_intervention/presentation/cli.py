"""CLI entry point for the style-intervention tool."""

import logging
import sys

from style_intervention.presentation.args import create_parser
from style_intervention.presentation.controllers import COMMANDS

LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"


def configure_logging(verbosity: int) -> None:
    """Send log records to stderr: WARNING, -v INFO, -vv DEBUG."""
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbosity, logging.DEBUG)
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)


def main(argv: list[str] | None = None) -> None:
    """Main entry point for the style-intervention CLI.

    1. Parses arguments (usage errors exit with code 1)
    2. Configures logging from -v
    3. Dispatches to the subcommand's controller
    4. Exits with the controller's return code
    """
    parser = create_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose)
    controller = COMMANDS[args.command]()
    sys.exit(controller.execute(args))


if __name__ == "__main__":
    main()
