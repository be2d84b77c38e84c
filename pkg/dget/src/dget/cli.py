"""Command line: ``dget train`` and ``dget predict``."""

from __future__ import annotations

import argparse
import sys

from .config import ModelConfig, desk_config, load_config

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_IO = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dget",
        description="learned link scheduler: train on graph-dataset files, "
                    "predict edge-class distributions for repair",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="cross-validate and train a checkpoint")
    p.add_argument("--dataset", required=True, help="graph-dataset JSONL file")
    p.add_argument("--out-dir", required=True,
                   help="directory for metrics.csv and checkpoint.pt")
    p.add_argument("--config", default=None,
                   help="flat key = value config file overriding defaults")
    p.add_argument("--desk", action="store_true",
                   help="start from the small desk-scale profile")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("predict", help="write predictions for input snapshots")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        if args.command == "train":
            base = desk_config() if args.desk else ModelConfig()
            cfg = load_config(args.config, base) if args.config else base
            from .train import train
            summary = train(args.dataset, cfg, args.seed, args.out_dir)
            print(f"trained on {summary['n_samples']} snapshot pairs; "
                  f"final training accuracy {summary['final_train_accuracy']:.4f}")
            print(f"checkpoint: {summary['checkpoint']}")
            print(f"metrics: {summary['metrics']}")
        else:
            from .predict import predict
            count = predict(args.checkpoint, args.dataset, args.out)
            print(f"predicted {count} snapshots -> {args.out}")
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        message = str(exc)
        print(f"error: {message}", file=sys.stderr)
        return EXIT_IO if "line" in message or "schema" in message else EXIT_ERROR
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
