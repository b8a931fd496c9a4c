import argparse
import logging
import sys

from ..errors import SliceOrchError
from .config import load_config
from .pipeline import STAGES, run_pipeline
from .runner import ABLATION_MODES

logger = logging.getLogger("slice_orch")

MODES = sorted(ABLATION_MODES) + ["fixed-beta"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Train and evaluate safe learning-based slice orchestration on a simulated network"
    )
    parser.add_argument("stage", choices=STAGES, help="Pipeline stage to run")

    # Configuration
    parser.add_argument(
        "--config", "-c",
        type=str,
        default=None,
        help="YAML experiment config (default: the packaged default.yaml)",
    )
    parser.add_argument(
        "--seed",
        type=int,
        default=None,
        help="Override training.seed (default: from config)",
    )
    parser.add_argument(
        "--out", "-o",
        type=str,
        default=None,
        help="Override training.out_dir, the run directory (default: from config)",
    )
    parser.add_argument(
        "--epochs",
        type=int,
        default=None,
        help="Override training.epochs (default: from config)",
    )

    # Ablation
    parser.add_argument(
        "--mode",
        choices=MODES,
        default="full",
        help="Ablation variant for the ablate stage (default: full)",
    )
    parser.add_argument(
        "--beta",
        type=float,
        action="append",
        default=[],
        help="Fixed coordination price, repeatable; used with --mode fixed-beta",
    )

    # Output
    parser.add_argument(
        "--verbose", "-v",
        action="store_true",
        help="Log per-episode detail",
    )
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="[%(asctime)s][%(name)s] %(levelname)s %(message)s",
    )

    overrides = {}
    if args.seed is not None:
        overrides["training.seed"] = args.seed
    if args.out is not None:
        overrides["training.out_dir"] = args.out
    if args.epochs is not None:
        overrides["training.epochs"] = args.epochs

    try:
        config = load_config(args.config, overrides)
        logger.info("Running stage %s in %s", args.stage, config.training.out_dir)
        run_pipeline(config, args.stage, args.mode, args.beta)
    except (SliceOrchError, ValueError) as e:
        logger.error("%s failed: %s", args.stage, e)
        sys.exit(2)
    logger.info("Done: %s", args.stage)


if __name__ == "__main__":
    main()
