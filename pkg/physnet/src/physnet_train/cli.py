"""physnet-train / physnet-predict command-line entry points."""

from __future__ import annotations

import argparse
import sys

from .data import load_split
from .errors import DataError, FormatError
from .predict import predict
from .train import TrainConfig, train


def _run(fn) -> int:
    try:
        fn()
        return 0
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


def main_train(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="physnet-train",
        description="Train the toy pulse regressor on an exported clip "
                    "directory with a split.json",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    parser.add_argument("--clips", required=True, help="clip collection directory")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--epochs", type=int, default=80, help="epoch cap")
    parser.add_argument("--lr", type=float, default=1e-3, help="Adam learning rate")
    parser.add_argument("--batch", type=int, default=2, help="mini-batch size")
    parser.add_argument("--seed", type=int, default=42,
                        help="weight init and shuffle seed")
    parser.add_argument("--patience", type=int, default=10,
                        help="early-stop epochs without val improvement")
    parser.add_argument("--min-delta", type=float, default=1e-3,
                        help="val loss decrease that counts as improvement")
    parser.add_argument("--resume", action="store_true",
                        help="continue from last.pt in the output directory")
    args = parser.parse_args(argv)

    def go():
        config = TrainConfig(max_epochs=args.epochs, lr=args.lr,
                             batch=args.batch, seed=args.seed,
                             patience=args.patience, min_delta=args.min_delta)
        result = train(args.clips, args.out, config, resume=args.resume)
        print(f"best val loss {result['best_val']:.4f} after "
              f"{result['epochs_run']} epochs; checkpoint {result['checkpoint']}")

    return _run(go)


def main_predict(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="physnet-predict",
        description="Write per-clip predicted pulse CSVs from a trained "
                    "checkpoint",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    parser.add_argument("--ckpt", required=True, help="checkpoint file")
    parser.add_argument("--clips", required=True, help="clip collection directory")
    parser.add_argument("--out", required=True, help="prediction output directory")
    parser.add_argument("--split", choices=("all", "train", "val"),
                        default="all", help="which clips to predict")
    args = parser.parse_args(argv)

    def go():
        names = None
        if args.split != "all":
            names = load_split(args.clips)[args.split]
        written = predict(args.ckpt, args.clips, args.out, names)
        print(f"wrote {len(written)} prediction files to {args.out}")

    return _run(go)
