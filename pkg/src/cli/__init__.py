"""Command-line front end: argparse subcommands over the pipeline stages."""

import argparse
import logging
import sys
from typing import Optional, Sequence

from ..models.config import load_run_config
from ..models.errors import SpectraError
from .commands import COMMANDS


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration (unknown keys are rejected)")
    common.add_argument("--in", dest="input", help="input CSV (spectra, or temperatures for gdd)")
    common.add_argument("--out", help="output file (synth, gdd, rmd) or directory (others)")
    common.add_argument("--seed", type=int, help="master seed, overrides the config")
    common.add_argument("--stage", type=float, help="growth stage in GDD to select or generate")
    common.add_argument(
        "--threads",
        type=int,
        help="worker threads (default: config, then $SPECTRA_THREADS, then 1); "
        "never changes results",
    )
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="broomrape-spectra",
        description="Leaf-spectra broomrape detection: preprocessing, stacked ensemble, evaluation",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    synth = sub.add_parser("synth", parents=[common], help="generate synthetic leaf spectra")
    synth.add_argument("--preset", choices=["early", "late"], help="class effect direction")
    synth.add_argument("--all-stages", action="store_true", help="all growth stages in one CSV")
    synth.add_argument("--class-effect", type=float, help="dip depth difference between classes")
    synth.add_argument("--noise-sd", type=float, help="per-band Gaussian noise SD")
    synth.add_argument("--plants", type=int, help="infected plants per class")
    synth.add_argument("--non-infected-plants", type=int, help="non-infected plants if different")

    pre = sub.add_parser(
        "preprocess", parents=[common], help="trim, resample, smooth, merge bands and scale"
    )
    pre.add_argument("--balance", action="store_true", help="balance plants before fitting")
    pre.add_argument("--corr-out", help="also write the band correlation matrix to this CSV")
    pre.add_argument("--corr-step", type=int, default=10, help="keep every Nth band in --corr-out")

    gdd = sub.add_parser("gdd", parents=[common], help="accumulate growing degree days")
    gdd.add_argument("--start", help="first day counted (ISO-8601, e.g. the transplant date)")
    gdd.add_argument("--t-base", type=float, help="base temperature in degrees C")
    gdd.add_argument("--no-clamp", action="store_true", help="let cold days subtract GDD")

    rmd = sub.add_parser("rmd", parents=[common], help="relative mean difference per band")
    rmd.add_argument("--no-merge", action="store_true", help="report on the 1 nm grid")

    train = sub.add_parser("train", parents=[common], help="fit the stacked ensemble")
    train.add_argument("--balance", action="store_true", help="balance plants before splitting")

    evaluate = sub.add_parser("evaluate", parents=[common], help="test and validation metrics")
    evaluate.add_argument("--model", help="model.json written by train")

    importance = sub.add_parser(
        "importance", parents=[common], help="permutation importance on the validation split"
    )
    importance.add_argument("--model", help="model.json written by train")
    importance.add_argument("--repeats", type=int, help="shuffles per band (default: config)")
    importance.add_argument(
        "--per-model", action="store_true", help="also write one profile per base model"
    )
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        cfg = load_run_config(args.config)
        summary = COMMANDS[args.command](args, cfg)
    except SpectraError as e:
        print(e.one_line(), file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: io: {e}", file=sys.stderr)
        return 1
    print(summary)
    return 0


__all__ = ["build_parser", "main"]
