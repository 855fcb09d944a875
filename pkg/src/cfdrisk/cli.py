"""Command line interface.

    cfdrisk simulate CONFIG [--no-price-cap] [--drop-weather-year Y ...]
    cfdrisk strike   CONFIG [--keep-last-cov] [--reference MODE]
    cfdrisk expost   CONFIG
    cfdrisk report   CONFIG
    cfdrisk run      CONFIG      # all four stages

Exit codes: 0 success, 2 configuration error, 3 data error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import pipeline
from .config import load_config
from .core import Reference, ReferenceMode
from .errors import ConfigError, DataError, InputError, UndefinedRatioError, UndefinedStrikeError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3

logger = logging.getLogger("cfdrisk")


def toy_config_path() -> Path:
    """Config of the bundled 36-scenario toy study."""
    return Path(__file__).parent / "data" / "toy" / "study.toml"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cfdrisk", description="CfD strike prices and ex-post risk analysis")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("simulate", "generate the scenario ensemble"),
        ("strike", "compute strike prices under uncertainty"),
        ("expost", "evaluate payments, cost recovery and consumer prices"),
        ("report", "write distribution summaries and CV tables"),
        ("run", "run all stages in order"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config", nargs="?", help="study config (TOML); defaults to the bundled toy study")
        p.add_argument("-o", "--output-dir", type=Path, help="override [study] output_dir (toy study default: ./output)")
        p.add_argument("--no-price-cap", action="store_true", help="clear prices without the cap (sensitivity)")
        p.add_argument(
            "--drop-weather-year", action="append", default=None, metavar="YEAR",
            help="leave out all scenarios of a weather year (repeatable)",
        )
        p.add_argument("--keep-last-cov", action="store_true", help="keep Cov[w, f*p] in the triple-product expectation")
        p.add_argument("--reference", choices=[m.value for m in ReferenceMode], help="reference fleet mode")
        p.add_argument("--reference-plant", action="append", default=None, metavar="ID", help="plants of a custom reference")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def config_from_args(args):
    config = load_config(args.config or toy_config_path())
    reference = None
    if args.reference or args.reference_plant:
        mode = args.reference or ("custom" if args.reference_plant else config.reference.mode)
        plants = tuple(args.reference_plant or config.reference.plants)
        try:
            reference = Reference(mode, plants)
        except InputError as exc:
            raise ConfigError(str(exc)) from None
    output_dir = args.output_dir
    if output_dir is None and args.config is None:
        # never write into the installed package
        output_dir = Path("output")
    return config.with_overrides(
        output_dir=output_dir.resolve() if output_dir else None,
        use_price_cap=False if args.no_price_cap else None,
        drop_weather_years=tuple(args.drop_weather_year) if args.drop_weather_year else None,
        drop_last_cov=False if args.keep_last_cov else None,
        reference=reference,
    )


def run(command: str, config) -> int:
    stages = list(pipeline.STAGES) if command == "run" else [command]
    for stage in stages:
        logger.info("stage %s", stage)
        pipeline.STAGES[stage](config)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        config = config_from_args(args)
        return run(args.command, config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, UndefinedStrikeError, UndefinedRatioError, InputError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
