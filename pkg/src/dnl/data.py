"""Dataset ingestion, synthesis, problem construction, and fold splitting.

Series rows are half-hourly observations; every `group_size` consecutive
rows (a day) become one problem set. Folds rotate contiguous time-ordered
blocks so adjacent rows never leak across splits.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import (
    Dataset,
    JobSpec,
    Knapsack,
    LinearModel,
    MachineSpec,
    ProblemSet,
    Scheduling,
)
from .oracles import InfeasibleInstanceError, solve_scheduling

__all__ = [
    "RawSeries",
    "SplitSpec",
    "Fold",
    "load_csv",
    "write_series_csv",
    "synthesize",
    "make_knapsack",
    "make_scheduling",
    "split",
    "save_dataset",
    "load_dataset",
    "WEIGHT_CHOICES",
]

logger = logging.getLogger(__name__)

WEIGHT_CHOICES = (3.0, 5.0, 7.0)


@dataclass(frozen=True)
class RawSeries:
    """Time-ordered rows of (timestamp, feature vector, true price)."""

    timestamps: tuple[str, ...]
    features: np.ndarray
    prices: np.ndarray
    group_size: int = 48
    hidden_model: Optional[LinearModel] = None

    def __post_init__(self):
        if self.features.ndim != 2:
            raise ValueError("features must be a 2-d array")
        if not (len(self.timestamps) == self.features.shape[0] == self.prices.shape[0]):
            raise ValueError("timestamps, features, and prices must align")
        if self.group_size < 1:
            raise ValueError("group_size must be positive")

    @property
    def num_rows(self) -> int:
        return self.prices.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.features.shape[1]

    @property
    def num_groups(self) -> int:
        return self.num_rows // self.group_size

    def groups(self):
        """Yield (features block, prices block) per full group; the trailing
        partial group is dropped."""
        full = self.num_groups * self.group_size
        dropped = self.num_rows - full
        if dropped:
            logger.warning("dropping %d trailing rows that do not fill a group", dropped)
        for g in range(self.num_groups):
            sl = slice(g * self.group_size, (g + 1) * self.group_size)
            yield self.features[sl], self.prices[sl]


@dataclass(frozen=True)
class SplitSpec:
    folds: int = 5
    train_frac: float = 0.70
    val_frac: float = 0.10
    test_frac: float = 0.20
    seed: int = 0

    def __post_init__(self):
        if self.folds < 1:
            raise ValueError("folds must be positive")
        if abs(self.train_frac + self.val_frac + self.test_frac - 1.0) > 1e-9:
            raise ValueError("split fractions must sum to 1")


@dataclass(frozen=True)
class Fold:
    train: tuple[ProblemSet, ...]
    val: tuple[ProblemSet, ...]
    test: tuple[ProblemSet, ...]


def load_csv(
    path,
    feature_columns: Sequence[str],
    price_column: str,
    timestamp_column: Optional[str] = None,
    group_size: int = 48,
) -> RawSeries:
    """Read a series from CSV with a header row.

    Rows with unparseable numerics are rejected with their file line number.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ValueError(f"{path}: empty file, header row required")
        missing = [c for c in [*feature_columns, price_column] if c not in reader.fieldnames]
        if missing:
            raise ValueError(f"{path}: missing columns {missing}")
        timestamps = []
        features = []
        prices = []
        for line_no, row in enumerate(reader, start=2):
            try:
                features.append([float(row[c]) for c in feature_columns])
                prices.append(float(row[price_column]))
            except (TypeError, ValueError):
                raise ValueError(f"{path}: non-numeric value on line {line_no}") from None
            if timestamp_column is not None:
                timestamps.append(row.get(timestamp_column, str(line_no - 2)))
            else:
                timestamps.append(str(line_no - 2))
    if not prices:
        raise ValueError(f"{path}: no data rows")
    return RawSeries(
        tuple(timestamps), np.array(features), np.array(prices), group_size
    )


def write_series_csv(series: RawSeries, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        cols = ["timestamp"] + [f"f{i}" for i in range(series.feature_dim)] + ["price"]
        fh.write(",".join(cols) + "\n")
        for ts, row, price in zip(series.timestamps, series.features, series.prices):
            cells = [ts] + [f"{v:.12g}" for v in row] + [f"{price:.12g}"]
            fh.write(",".join(cells) + "\n")


def synthesize(
    num_days: int,
    p: int,
    noise_sigma: float,
    seed: int,
    group_size: int = 48,
) -> RawSeries:
    """Seeded synthetic series: price = hidden linear map of features + noise.

    The hidden map is recorded on the series for realizability tests.
    """
    if num_days < 1:
        raise ValueError("num_days must be positive")
    if p < 1:
        raise ValueError("p must be positive")
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be nonnegative")
    rng = np.random.default_rng(seed)
    hidden = LinearModel(rng.uniform(1.0, 5.0, size=p), 5.0)
    rows = num_days * group_size
    features = rng.uniform(0.0, 1.0, size=(rows, p))
    prices = features @ hidden.coefficients + hidden.intercept
    if noise_sigma > 0:
        prices = prices + rng.normal(0.0, noise_sigma, size=rows)
    timestamps = tuple(f"d{r // group_size:04d}-t{r % group_size:02d}" for r in range(rows))
    return RawSeries(timestamps, features, prices, group_size, hidden)


def make_knapsack(
    series: RawSeries, weighted: bool, capacity: float, seed: int = 0
) -> Dataset:
    """One knapsack problem set per day.

    Unit mode: weights are all one and item value equals the price.
    Weighted mode: item weights are drawn from {3, 5, 7}, value equals
    weight times price, and the weight joins the feature vector.
    """
    if capacity <= 0:
        raise ValueError("capacity must be positive")
    rng = np.random.default_rng(seed)
    problem_sets = []
    for g, (features, prices) in enumerate(series.groups()):
        if weighted:
            weights = rng.choice(WEIGHT_CHOICES, size=series.group_size)
            values = weights * prices
            features = np.hstack([features, weights[:, None]])
        else:
            weights = np.ones(series.group_size)
            values = prices
        problem_sets.append(
            ProblemSet(values, features, Knapsack(weights, capacity), f"day{g:04d}")
        )
    if not problem_sets:
        raise ValueError("series has no complete group")
    return Dataset(tuple(problem_sets), problem_sets[0].feature_dim)


def make_scheduling(
    series: RawSeries,
    num_machines: int = 2,
    num_jobs: int = 4,
    seed: int = 0,
    max_attempts: int = 50,
) -> Dataset:
    """One scheduling problem set per day, sharing a seeded random load.

    The generated load is validated by actually solving it once; generation
    retries until a feasible load appears.
    """
    rng = np.random.default_rng(seed)
    periods = series.group_size
    constraint = None
    for _ in range(max_attempts):
        machines = tuple(MachineSpec(float(rng.integers(2, 5))) for _ in range(num_machines))
        max_cap = max(m.capacity for m in machines)
        jobs = []
        for _ in range(num_jobs):
            duration = int(rng.integers(1, min(5, periods) + 1))
            earliest = int(rng.integers(0, periods - duration + 1))
            latest = int(rng.integers(earliest + duration, periods + 1))
            jobs.append(
                JobSpec(
                    resource=float(rng.integers(1, int(max_cap) + 1)),
                    power=float(rng.integers(1, 4)),
                    duration=duration,
                    earliest_start=earliest,
                    latest_finish=latest,
                )
            )
        candidate = Scheduling(machines, tuple(jobs), periods)
        try:
            solve_scheduling(np.zeros(periods), candidate)
        except InfeasibleInstanceError:
            continue
        constraint = candidate
        break
    if constraint is None:
        raise InfeasibleInstanceError(
            f"could not generate a feasible load in {max_attempts} attempts"
        )
    problem_sets = [
        ProblemSet(prices, features, constraint, f"day{g:04d}")
        for g, (features, prices) in enumerate(series.groups())
    ]
    if not problem_sets:
        raise ValueError("series has no complete group")
    return Dataset(tuple(problem_sets), problem_sets[0].feature_dim)


def _fold_test_bounds(n: int, folds: int) -> list[tuple[int, int]]:
    return [(f * n // folds, (f + 1) * n // folds) for f in range(folds)]


def split(dataset: Dataset | Sequence[ProblemSet], spec: SplitSpec = SplitSpec()) -> list[Fold]:
    """Contiguous-block fold rotation over time-ordered problem sets.

    With multiple folds the test blocks partition the whole dataset; within
    each fold the remaining sets stay in wrapped time order, train first and
    validation after. Counts follow the configured fractions, remainders
    going to the training split.
    """
    problem_sets = list(dataset.problem_sets if isinstance(dataset, Dataset) else dataset)
    n = len(problem_sets)
    if n < 3:
        raise ValueError("need at least three problem sets to split")
    folds = []
    if spec.folds == 1:
        test_n = max(1, round(spec.test_frac * n))
        val_n = max(1, round(spec.val_frac * n))
        train_n = n - test_n - val_n
        if train_n < 1:
            raise ValueError("split leaves no training problem sets")
        folds.append(
            Fold(
                tuple(problem_sets[:train_n]),
                tuple(problem_sets[train_n : train_n + val_n]),
                tuple(problem_sets[train_n + val_n :]),
            )
        )
        return folds
    for lo, hi in _fold_test_bounds(n, spec.folds):
        test = problem_sets[lo:hi]
        rest = problem_sets[hi:] + problem_sets[:lo]
        val_n = max(1, round(spec.val_frac * n))
        train_n = len(rest) - val_n
        if train_n < 1:
            raise ValueError("split leaves no training problem sets")
        folds.append(
            Fold(tuple(rest[:train_n]), tuple(rest[train_n:]), tuple(test))
        )
    return folds


def save_dataset(dataset: Dataset, path) -> None:
    """Line-oriented text cache, one problem set per block."""
    with open(path, "w", encoding="utf-8") as fh:
        for ps in dataset.problem_sets:
            fh.write(f"problem {ps.id}\n")
            c = ps.constraint
            if isinstance(c, Knapsack):
                fh.write(f"knapsack capacity {c.capacity:.12g}\n")
                fh.write("weights " + " ".join(f"{w:.12g}" for w in c.weights) + "\n")
            else:
                fh.write(f"scheduling periods {c.periods}\n")
                for m in c.machines:
                    fh.write(f"machine {m.capacity:.12g}\n")
                for j in c.jobs:
                    fh.write(
                        f"job {j.resource:.12g} {j.power:.12g} {j.duration} "
                        f"{j.earliest_start} {j.latest_finish}\n"
                    )
            for value, row in zip(ps.true_values, ps.features):
                fh.write(
                    "row " + f"{value:.12g} " + " ".join(f"{v:.12g}" for v in row) + "\n"
                )
            fh.write("\n")


def load_dataset(path) -> Dataset:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    problem_sets = []
    block: list[str] = []

    def flush(block_lines: list[str]) -> None:
        if not block_lines:
            return
        header = block_lines[0].split()
        if header[0] != "problem":
            raise ValueError(f"{path}: block must start with a problem line")
        ps_id = header[1]
        capacity = None
        weights = None
        periods = None
        machines: list[MachineSpec] = []
        jobs: list[JobSpec] = []
        values = []
        rows = []
        for ln in block_lines[1:]:
            parts = ln.split()
            if parts[0] == "knapsack":
                capacity = float(parts[2])
            elif parts[0] == "weights":
                weights = np.array([float(v) for v in parts[1:]])
            elif parts[0] == "scheduling":
                periods = int(parts[2])
            elif parts[0] == "machine":
                machines.append(MachineSpec(float(parts[1])))
            elif parts[0] == "job":
                jobs.append(
                    JobSpec(
                        float(parts[1]),
                        float(parts[2]),
                        int(parts[3]),
                        int(parts[4]),
                        int(parts[5]),
                    )
                )
            elif parts[0] == "row":
                values.append(float(parts[1]))
                rows.append([float(v) for v in parts[2:]])
            else:
                raise ValueError(f"{path}: unknown record {parts[0]!r}")
        if capacity is not None:
            constraint: Knapsack | Scheduling = Knapsack(weights, capacity)
        elif periods is not None:
            constraint = Scheduling(tuple(machines), tuple(jobs), periods)
        else:
            raise ValueError(f"{path}: block {ps_id} lacks constraint data")
        problem_sets.append(ProblemSet(np.array(values), np.array(rows), constraint, ps_id))

    for ln in lines:
        if not ln.strip():
            flush(block)
            block = []
        else:
            block.append(ln)
    flush(block)
    if not problem_sets:
        raise ValueError(f"{path}: no problem sets found")
    return Dataset(tuple(problem_sets), problem_sets[0].feature_dim)
