"""Command-line experiment harness.

Subcommands: generate (synthetic series CSV), train (warmstart plus a
training variant per flag), eval (per-fold regret tables), sweep (train and
evaluate across a capacity list). All outputs are CSV with a header row and
are deterministic for a fixed seed. Exit codes: 0 success, 1 usage error,
2 runtime failure.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

from .core import LinearModel, load_model, save_model
from .data import (
    Fold,
    SplitSpec,
    load_csv,
    make_knapsack,
    make_scheduling,
    split,
    synthesize,
    write_series_csv,
)
from .evaluation import TrueOptimumCache, evaluate_model_regret
from .oracles import SolverOracle
from .ridge import select_ridge
from .training import TrainConfig, Variant, train, write_trace_csv

PROBLEMS = ("unit-knapsack", "weighted-knapsack", "scheduling")
VARIANTS = ("ridge", "dnl", "dnl-max", "dnl-greedy")
DEFAULT_CAPACITY = {"unit-knapsack": 24.0, "weighted-knapsack": 122.0}


class UsageError(ValueError):
    """Invalid command-line arguments or experiment specification."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_data_flags(sub):
    sub.add_argument("--data", help="series CSV to load (omit to synthesize)")
    sub.add_argument("--days", type=int, default=20, help="synthetic days")
    sub.add_argument("--features", type=int, default=4, help="synthetic feature count")
    sub.add_argument("--noise", type=float, default=0.5, help="synthetic noise sigma")
    sub.add_argument("--group-size", type=int, default=48, help="rows per problem set")


def _add_problem_flags(sub):
    sub.add_argument("--problem", choices=PROBLEMS, default="unit-knapsack")
    sub.add_argument("--capacity", type=float, help="knapsack capacity")
    sub.add_argument("--machines", type=int, default=2, help="scheduling machines")
    sub.add_argument("--jobs", type=int, default=4, help="scheduling jobs")


def _add_train_flags(sub):
    sub.add_argument(
        "--variant", action="append", choices=VARIANTS, help="repeatable; default dnl"
    )
    sub.add_argument("--epochs", type=int, default=10)
    sub.add_argument("--max-seconds", type=float, default=120.0)
    sub.add_argument("--batch", type=int, default=32)
    sub.add_argument("--lr", type=float, default=0.1)
    sub.add_argument("--patience", type=int, default=5)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dnl", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)

    gen = subs.add_parser("generate", help="write a synthetic series CSV")
    gen.add_argument("--days", type=int, required=True)
    gen.add_argument("--features", type=int, default=4)
    gen.add_argument("--noise", type=float, default=0.5)
    gen.add_argument("--group-size", type=int, default=48)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)

    tr = subs.add_parser("train", help="warmstart and train variants on one fold")
    _add_data_flags(tr)
    _add_problem_flags(tr)
    _add_train_flags(tr)
    tr.add_argument("--folds", type=int, default=1)
    tr.add_argument("--fold", type=int, default=0, help="fold index to train on")
    tr.add_argument("--seed", type=int, default=0)
    tr.add_argument("--out", required=True, help="output directory")

    ev = subs.add_parser("eval", help="regret table for saved models over all folds")
    _add_data_flags(ev)
    _add_problem_flags(ev)
    ev.add_argument("--model", action="append", required=True, help="model file; repeatable")
    ev.add_argument("--folds", type=int, default=1)
    ev.add_argument("--seed", type=int, default=0)
    ev.add_argument("--out", required=True, help="output CSV path")

    sw = subs.add_parser("sweep", help="train and evaluate across capacities")
    _add_data_flags(sw)
    sw.add_argument("--problem", choices=PROBLEMS[:2], default="unit-knapsack")
    sw.add_argument("--capacities", type=float, nargs="+", required=True)
    _add_train_flags(sw)
    sw.add_argument("--folds", type=int, default=1)
    sw.add_argument("--seed", type=int, default=0)
    sw.add_argument("--out", required=True, help="output CSV path")
    return parser


def _load_series(args):
    if args.data:
        if not os.path.exists(args.data):
            raise UsageError(f"data file not found: {args.data}")
        p = args.features
        return load_csv(
            args.data,
            [f"f{i}" for i in range(p)],
            "price",
            timestamp_column="timestamp",
            group_size=args.group_size,
        )
    return synthesize(args.days, args.features, args.noise, args.seed, args.group_size)


def _build_dataset(args, capacity=None):
    series = _load_series(args)
    problem = args.problem
    if problem == "scheduling":
        return make_scheduling(series, args.machines, args.jobs, seed=args.seed + 1)
    cap = capacity if capacity is not None else args.capacity
    if cap is None:
        cap = DEFAULT_CAPACITY[problem]
    return make_knapsack(series, problem == "weighted-knapsack", cap, seed=args.seed + 1)


def _folds(dataset, args) -> list[Fold]:
    return split(dataset, SplitSpec(folds=args.folds, seed=args.seed))


def _variants(args) -> list[str]:
    return list(dict.fromkeys(args.variant or ["dnl"]))


def _ridge_warmstart(fold: Fold, oracle: SolverOracle):
    return select_ridge(fold.train, fold.val, oracle, cache=TrueOptimumCache())


def _train_variant(fold: Fold, args, variant: str, oracle: SolverOracle, warmstart):
    if variant == "ridge":
        return warmstart, None
    config = TrainConfig(
        variant=Variant(variant),
        batch_size=args.batch,
        learning_rate=args.lr,
        max_epochs=args.epochs,
        max_seconds=args.max_seconds,
        early_stop_patience=args.patience,
        rng_seed=args.seed,
    )
    return None, train(fold.train, fold.val, config, oracle, warmstart)


def cmd_generate(args) -> int:
    if args.days < 1:
        raise UsageError("--days must be at least 1")
    series = synthesize(args.days, args.features, args.noise, args.seed, args.group_size)
    write_series_csv(series, args.out)
    print(
        f"wrote {series.num_rows} rows ({args.days} days, p={args.features}, "
        f"seed={args.seed}) to {args.out}"
    )
    return 0


def cmd_train(args) -> int:
    dataset = _build_dataset(args)
    folds = _folds(dataset, args)
    if not 0 <= args.fold < len(folds):
        raise UsageError(f"--fold must be in [0, {len(folds) - 1}]")
    fold = folds[args.fold]
    os.makedirs(args.out, exist_ok=True)
    oracle = SolverOracle()
    warmstart, penalty = _ridge_warmstart(fold, oracle)
    save_model(warmstart, os.path.join(args.out, "ridge_model.txt"))
    print(f"ridge warmstart saved (penalty {penalty:g})")
    for variant in _variants(args):
        started = time.perf_counter()
        oracle.reset()
        model, trace = _train_variant(fold, args, variant, oracle, warmstart)
        if trace is not None:
            model = trace.best_model
            save_model(model, os.path.join(args.out, f"{variant}_model.txt"))
            write_trace_csv(trace, os.path.join(args.out, f"{variant}_trace.csv"))
        test_regret, test_std = evaluate_model_regret(model, fold.test, oracle)
        line = f"{variant}: test regret {test_regret:.6g} (std {test_std:.6g})"
        if trace is not None:
            line += (
                f", best epoch {trace.best_epoch}, "
                f"val regret {trace.best_val_regret:.6g}, "
                f"{trace.total_oracle_calls} oracle calls, "
                f"{time.perf_counter() - started:.1f}s wall"
            )
        print(line)
    return 0


def cmd_eval(args) -> int:
    dataset = _build_dataset(args)
    folds = _folds(dataset, args)
    oracle = SolverOracle()
    cache = TrueOptimumCache()
    rows = []
    for model_path in args.model:
        if not os.path.exists(model_path):
            raise UsageError(f"model file not found: {model_path}")
        model = load_model(model_path)
        name = os.path.basename(model_path)
        fold_means = []
        for f, fold in enumerate(folds):
            mean, std = evaluate_model_regret(model, fold.test, oracle, cache)
            rows.append((name, str(f), mean, std, len(fold.test)))
            fold_means.append(mean)
        agg_std = float(np.std(fold_means, ddof=1)) if len(fold_means) > 1 else 0.0
        rows.append((name, "all", float(np.mean(fold_means)), agg_std, len(dataset)))
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        fh.write("model,fold,mean_regret,std_regret,problem_sets\n")
        for name, fold_id, mean, std, count in rows:
            fh.write(f"{name},{fold_id},{mean:.12g},{std:.12g},{count}\n")
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def cmd_sweep(args) -> int:
    if not args.capacities:
        raise UsageError("at least one capacity required")
    variants = _variants(args)
    rows = []
    for capacity in sorted(args.capacities):
        dataset = _build_dataset(args, capacity=capacity)
        folds = _folds(dataset, args)
        per_variant: dict[str, list[float]] = {v: [] for v in variants}
        for fold in folds:
            oracle = SolverOracle()
            warmstart, _ = _ridge_warmstart(fold, oracle)
            for variant in variants:
                model, trace = _train_variant(fold, args, variant, oracle, warmstart)
                if trace is not None:
                    model = trace.best_model
                mean, _ = evaluate_model_regret(model, fold.test, oracle)
                per_variant[variant].append(mean)
        for variant in variants:
            regrets = per_variant[variant]
            std = float(np.std(regrets, ddof=1)) if len(regrets) > 1 else 0.0
            rows.append((capacity, variant, float(np.mean(regrets)), std))
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        fh.write("capacity,variant,mean_regret,std_regret\n")
        for capacity, variant, mean, std in rows:
            fh.write(f"{capacity:.12g},{variant},{mean:.12g},{std:.12g}\n")
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


COMMANDS = {
    "generate": cmd_generate,
    "train": cmd_train,
    "eval": cmd_eval,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"dnl: error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failure: distinct exit code for scripts
        print(f"dnl: failed: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
