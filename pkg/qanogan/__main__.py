import argparse
import sys
from pathlib import Path
from typing import List, Optional

from .logging_config import setup_logging
from .runner import ExperimentRunner


def _add_config_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--config",
        type=Path,
        help="YAML run configuration"
    )

    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Override a configuration key, e.g. train.batch_size=32"
    )


def _add_common_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--output-dir",
        type=Path,
        help="Directory for run artifacts"
    )

    parser.add_argument(
        "--seed",
        type=int,
        help="Master seed overriding the configured one"
    )


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """Parse command line arguments."""
    parser = argparse.ArgumentParser(
        prog="qanogan",
        description="Quantum and classical WGAN-GP anomaly detection",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter
    )

    parser.add_argument(
        "--debug",
        action="store_true",
        help="Enable debug logging"
    )

    parser.add_argument(
        "--log-file",
        type=Path,
        help="Also write log records to this file"
    )

    commands = parser.add_subparsers(dest="command", required=True)

    synth = commands.add_parser("synth", help="Write a synthetic dataset")
    _add_config_args(synth)
    _add_common_args(synth)

    train = commands.add_parser("train", help="Train a generator and critic")
    _add_config_args(train)
    _add_common_args(train)

    calibrate = commands.add_parser("calibrate", help="Pick the F1-maximizing threshold")
    calibrate.add_argument("--checkpoint", type=Path, required=True, help="Checkpoint directory")
    calibrate.add_argument("--data", type=Path, required=True, help="Labelled calibration CSV")
    _add_common_args(calibrate)

    evaluate = commands.add_parser("evaluate", help="Score a labelled test set")
    evaluate.add_argument(
        "--checkpoint",
        type=Path,
        nargs="+",
        required=True,
        help="One checkpoint directory per run"
    )
    evaluate.add_argument(
        "--threshold",
        type=Path,
        nargs="+",
        required=True,
        help="One threshold.yaml per checkpoint"
    )
    evaluate.add_argument("--data", type=Path, required=True, help="Labelled test CSV")
    _add_common_args(evaluate)

    score = commands.add_parser("score", help="Score a single row")
    score.add_argument("--checkpoint", type=Path, required=True, help="Checkpoint directory")
    score.add_argument("--threshold", type=Path, required=True, help="threshold.yaml")
    score.add_argument("--row", required=True, help="Comma-separated raw feature values")
    _add_common_args(score)

    run = commands.add_parser("run", help="Train, calibrate and evaluate end to end")
    _add_config_args(run)
    _add_common_args(run)
    run.add_argument(
        "--repeat",
        type=int,
        default=1,
        help="Number of runs, seeded seed, seed+1, ..."
    )
    run.add_argument(
        "--jobs",
        type=int,
        default=1,
        help="Worker processes for repeated runs"
    )

    return parser.parse_args(argv)


def _dispatch(runner: ExperimentRunner, args: argparse.Namespace) -> None:
    if args.command in ("synth", "train", "run"):
        config = runner.load_config(args.config, args.overrides, args.seed)
        if args.command == "synth":
            runner.cmd_synth(config)
        elif args.command == "train":
            runner.cmd_train(config)
        else:
            runner.cmd_run(config, args.repeat, args.jobs)
    elif args.command == "calibrate":
        runner.cmd_calibrate(args.checkpoint, args.data, args.seed)
    elif args.command == "evaluate":
        runner.cmd_evaluate(args.checkpoint, args.threshold, args.data, args.seed)
    else:
        sample = runner.cmd_score(args.checkpoint, args.threshold, args.row, args.seed)
        verdict = "ANOMALY" if sample.predicted_label else "normal"
        print(
            f"residual_loss={sample.residual:.6f} "
            f"discrimination_loss={sample.discrimination:.6f} "
            f"score={sample.score:.6f} verdict={verdict}"
        )


def main(argv: Optional[List[str]] = None):
    """Main entry point."""
    args = parse_args(argv)
    setup_logging(args.debug, args.log_file)

    runner = ExperimentRunner(args.output_dir)
    sys.exit(runner.execute(lambda: _dispatch(runner, args)))


if __name__ == "__main__":
    main()
