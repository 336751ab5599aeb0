"""Command-line benchmark runner.

Two subcommands: ``train`` runs one seeded configuration and writes the
per-epoch metrics CSV; ``sweep`` repeats a configuration over a grid of
eta values and writes a summary table. Exit status is 0 on success and
1 when the run diverged or a file could not be read or written.
"""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .bench import RunConfig, emit_metrics, emit_sweep, run_training, sensitivity_sweep
from .data import DatasetFormatError, generate_synthetic, load_dataset, split_dataset


def _parse_schedule(text: str):
    if text in ("auto", "none"):
        return text if text == "auto" else ()
    pairs = []
    for chunk in text.split(","):
        epoch, _, mult = chunk.partition(":")
        if not _:
            raise argparse.ArgumentTypeError(
                f"bad schedule entry {chunk!r}; expected epoch:multiplier"
            )
        try:
            pairs.append((int(epoch), float(mult)))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad schedule entry {chunk!r}") from None
    return tuple(pairs)


def _parse_hidden(text: str):
    if not text:
        return ()
    try:
        return tuple(int(h) for h in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad hidden layer list {text!r}") from None


def _parse_grid(text: str):
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad eta grid {text!r}") from None


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--optimizer", default="dfw",
                   choices=["dfw", "sgd", "adagrad", "adam", "amsgrad"])
    p.add_argument("--eta", "--lr", dest="eta", type=float, default=0.1,
                   help="proximal weight for dfw; learning rate for baselines")
    p.add_argument("--momentum", type=float, default=0.9)
    p.add_argument("--l2", type=float, default=1e-4)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--model", default="mlp", choices=["linear", "mlp"])
    p.add_argument("--hidden", type=_parse_hidden, default=(64,),
                   help="comma-separated hidden layer widths (mlp only)")
    p.add_argument("--loss", default="svm", choices=["svm", "ce"])
    p.add_argument("--direction-mode", default="auto",
                   choices=["auto", "smoothed", "conditional"])
    p.add_argument("--lr-schedule", type=_parse_schedule, default="auto",
                   help='"auto", "none", or "epoch:mult,epoch:mult,..."')
    p.add_argument("--dataset", default="blobs",
                   help='"blobs", "spirals", or a path to a data file')
    p.add_argument("--data-format", default="csv", choices=["csv", "libsvm"])
    p.add_argument("--n-train", type=int, default=5000)
    p.add_argument("--n-val", type=int, default=1000)
    p.add_argument("--n-test", type=int, default=1000)
    p.add_argument("--dim", type=int, default=20)
    p.add_argument("--classes", type=int, default=10)
    p.add_argument("--noise", type=float, default=1.0)
    p.add_argument("--val-fraction", type=float, default=0.15,
                   help="validation share when --dataset is a file")
    p.add_argument("--test-fraction", type=float, default=0.15,
                   help="test share when --dataset is a file")
    p.add_argument("--out", default=None, help="output CSV path")


def _resolve_dataset(args):
    if args.dataset in ("blobs", "spirals"):
        return generate_synthetic(
            args.dataset,
            args.n_train,
            args.n_val,
            args.n_test,
            args.dim,
            args.classes,
            args.noise,
            args.seed,
        )
    flat = load_dataset(args.dataset, args.data_format)
    return split_dataset(flat, args.val_fraction, args.test_fraction, args.seed)


def _make_config(args) -> RunConfig:
    return RunConfig(
        dataset=_resolve_dataset(args),
        optimizer=args.optimizer,
        eta=args.eta,
        momentum=args.momentum,
        l2=args.l2,
        batch_size=args.batch_size,
        epochs=args.epochs,
        seed=args.seed,
        model=args.model,
        hidden_dims=args.hidden,
        loss=args.loss,
        direction_mode=args.direction_mode,
        lr_schedule=args.lr_schedule,
    )


def _cmd_train(args) -> int:
    config = _make_config(args)
    result = run_training(config)
    out = args.out or "metrics.csv"
    emit_metrics(result.metrics, out)
    if result.metrics:
        last = result.metrics[-1]
        print(
            f"{args.optimizer} eta={args.eta:g}: {len(result.metrics)} epochs, "
            f"train_acc={last.train_acc:.4f} val_acc={last.val_acc:.4f} -> {out}"
        )
    if result.diverged:
        print("run diverged: loss or parameters became non-finite", file=sys.stderr)
        return 1
    return 0


def _cmd_sweep(args) -> int:
    config = _make_config(args)
    rows = sensitivity_sweep(config, args.eta_grid)
    out = args.out or "sweep.csv"
    emit_sweep(rows, out)
    for row in rows:
        print(
            f"eta={row.eta:g}: best_val_acc={row.best_val_acc:.4f} "
            f"final_train_acc={row.final_train_acc:.4f} [{row.status}]"
        )
    print(f"-> {out}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="proxfw",
        description="Benchmark the proximal Frank-Wolfe trainer against baselines.",
    )
    parser.add_argument("--version", action="version", version=f"proxfw {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    p_train = sub.add_parser("train", help="run one training configuration")
    _add_common(p_train)
    p_sweep = sub.add_parser("sweep", help="repeat a configuration over an eta grid")
    _add_common(p_sweep)
    p_sweep.add_argument("--eta-grid", type=_parse_grid, default=(1e-3, 1e-2, 1e-1, 1.0),
                         help="comma-separated eta values")
    args = parser.parse_args(argv)
    try:
        if args.command == "train":
            return _cmd_train(args)
        return _cmd_sweep(args)
    except (OSError, DatasetFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
