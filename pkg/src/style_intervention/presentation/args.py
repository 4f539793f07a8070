"""Argument parser factory for CLI commands."""

import argparse

from style_intervention import __version__
from style_intervention.domain.directions import SOLVERS, SPACES
from style_intervention.domain.intervene import GRANULARITIES, MODES
from style_intervention.domain.stylegen.weights import BACKENDS
from style_intervention.presentation.exit_codes import ExitCode

DEFAULT_T_LIST = "0,0.25,0.5,0.75,1"


def get_version() -> str:
    """Return the CLI version string."""
    return __version__


class CliParser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with ExitCode.USAGE_ERROR."""

    def error(self, message: str) -> None:
        self.print_usage()
        self.exit(ExitCode.USAGE_ERROR, f"{self.prog}: error: {message}\n")


def parse_t_list(value: str) -> list[float]:
    """Parse a comma-separated list of interpolation scales."""
    try:
        values = [float(part) for part in value.split(",") if part.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"invalid t list {value!r}: {e}") from e
    if not values:
        raise argparse.ArgumentTypeError("t list is empty")
    return values


def _space(value: str) -> str:
    return value.upper()


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config",
        default=None,
        help="JSON config file; explicit flags override its values",
    )
    common.add_argument(
        "-v",
        "--verbose",
        action="count",
        default=0,
        help="Log progress (-v) or every optimizer step (-vv) to stderr",
    )
    common.add_argument(
        "-j",
        "--json",
        action="store_true",
        help="Print the summary as JSON",
    )
    return common


def _add_seed(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=None, help="Master seed (default 7)")


def _add_jobs(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--jobs",
        type=int,
        default=None,
        help="Worker threads across independent samples (default 1)",
    )


def _add_training(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--dataset", required=True, help="Dataset directory from 'sample'")
    parser.add_argument("--attr", default=None, help="Attribute name (default red_top_left)")
    parser.add_argument("--l1", type=float, default=None, help="L1 penalty weight")
    parser.add_argument("--hinge-c", type=float, default=None, help="Hinge loss weight")
    parser.add_argument("--epochs", type=int, default=None, help="Training epochs")
    parser.add_argument(
        "--solver", choices=SOLVERS, default=None, help="Hyperplane solver (default lp)"
    )
    parser.add_argument(
        "--no-refit",
        action="store_true",
        help="Skip the hard-margin refit on the selected coordinates",
    )
    _add_seed(parser)


def _add_edit(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--weights", required=True, help="Weight file")
    parser.add_argument("--dir-z", required=True, help="Z-space direction file")
    parser.add_argument("--dir-s", required=True, help="S-space direction file")
    parser.add_argument(
        "--mask",
        default=None,
        help="Partition concept, quadrant name or .siv file with a 'mask' tensor "
        "(default: the attribute's region)",
    )
    parser.add_argument("--beta", type=float, default=None, help="Latent edit magnitude")
    parser.add_argument("--lattr", type=float, default=None, help="Attribute loss weight")
    parser.add_argument("--lnorm", type=float, default=None, help="Coefficient norm weight")
    parser.add_argument("--steps", type=int, default=None, help="Adam steps per layer")
    parser.add_argument("--lr", type=float, default=None, help="Adam learning rate")
    parser.add_argument("--mode", choices=MODES, default=None, help="Optimization schedule")
    parser.add_argument(
        "--granularity",
        choices=GRANULARITIES,
        default=None,
        help="One coefficient per channel or per layer",
    )
    parser.add_argument(
        "--direction-scale",
        type=float,
        default=None,
        help="Length of the scaled direction (default: norm of the latent edit)",
    )
    _add_seed(parser)


def create_parser() -> argparse.ArgumentParser:
    """Create and return configured argument parser.

    Every flag that maps to a RunConfig field defaults to None so that an
    absent flag does not override the config file.

    Returns:
        ArgumentParser with all subcommands configured.
    """
    parser = CliParser(
        prog="style-intervention",
        description="Localized attribute edits in style-based generators",
    )
    parser.add_argument(
        "--version",
        action="version",
        version=f"style-intervention {get_version()}",
    )
    common = _common()
    commands = parser.add_subparsers(dest="command", required=True, parser_class=CliParser)

    gen = commands.add_parser(
        "gen-weights", parents=[common], help="Build generator weights"
    )
    _add_seed(gen)
    gen.add_argument("--backend", choices=BACKENDS, default=None, help="Weight backend")
    gen.add_argument(
        "--arch",
        default=None,
        help="JSON object of architecture overrides, e.g. '{\"d_z\": 16}'",
    )
    gen.add_argument("--out", required=True, help="Output weight file")

    sample = commands.add_parser(
        "sample", parents=[common], help="Generate a labelled dataset"
    )
    sample.add_argument("--weights", required=True, help="Weight file")
    sample.add_argument("--n", type=int, default=None, help="Number of samples (default 2000)")
    _add_seed(sample)
    _add_jobs(sample)
    sample.add_argument("--out", required=True, help="Output dataset directory")

    train = commands.add_parser(
        "train-direction", parents=[common], help="Train a sparse attribute hyperplane"
    )
    _add_training(train)
    train.add_argument(
        "--space", type=_space, choices=SPACES, default=None, help="Code space (z, w or s)"
    )
    train.add_argument("--out", required=True, help="Output direction file")

    compare = commands.add_parser(
        "compare-spaces", parents=[common], help="Compare separability across Z, W and S"
    )
    _add_training(compare)

    intervene = commands.add_parser(
        "intervene", parents=[common], help="Optimize intervention coefficients for one sample"
    )
    _add_edit(intervene)
    intervene.add_argument(
        "--sample-index", type=int, default=0, help="Index of the seeded sample"
    )
    intervene.add_argument("--out", required=True, help="Output result directory")

    interp = commands.add_parser(
        "interpolate", parents=[common], help="Scale the direction term of a stored result"
    )
    interp.add_argument("--result", required=True, help="Result directory from 'intervene'")
    interp.add_argument(
        "--t-list",
        type=parse_t_list,
        default=parse_t_list(DEFAULT_T_LIST),
        help=f"Comma-separated scales (default {DEFAULT_T_LIST})",
    )
    interp.add_argument("--out", required=True, help="Output directory")

    dissect = commands.add_parser(
        "dissect", parents=[common], help="Rank channels by IoU with concept regions"
    )
    dissect.add_argument("--weights", required=True, help="Weight file")
    dissect.add_argument("--samples", type=int, default=20, help="Number of samples")
    dissect.add_argument("--fraction", type=float, default=None, help="Top activation fraction")
    dissect.add_argument(
        "--upsample",
        choices=("nearest", "bilinear"),
        default="bilinear",
        help="How feature maps are brought to image resolution",
    )
    dissect.add_argument(
        "--final-level-only", action="store_true", help="Rank only the finest level's channels"
    )
    dissect.add_argument("--top", type=int, default=None, help="Keep the N best units per concept")
    _add_seed(dissect)
    _add_jobs(dissect)
    dissect.add_argument("--out", default=None, help="Optional JSON report file")

    bench = commands.add_parser(
        "benchmark", parents=[common], help="Compare latent, style and intervention edits"
    )
    _add_edit(bench)
    bench.add_argument("--samples", type=int, default=20, help="Number of seeded samples")
    bench.add_argument(
        "--check", action="store_true", help="Exit with code 2 if an acceptance threshold fails"
    )
    bench.add_argument("--out", default=None, help="Optional JSON report file")

    golden = commands.add_parser(
        "freeze-golden", parents=[common], help="Write regression data for the random backend"
    )
    _add_seed(golden)
    golden.add_argument("--out", required=True, help="Output JSON file")

    return parser
