"""Core domain types: problem sets, constraints, linear models, solutions.

All types are immutable after construction (arrays are copied and marked
read-only) and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence, Union

import numpy as np

__all__ = [
    "Direction",
    "Knapsack",
    "MachineSpec",
    "JobSpec",
    "Scheduling",
    "ConstraintData",
    "ProblemSet",
    "LinearModel",
    "Dataset",
    "Solution",
    "predict",
    "solution_objective",
    "knapsack_solution",
    "scheduling_solution",
    "validate_solution",
    "save_model",
    "load_model",
]

# Absolute tolerance for objective comparisons, shared repo-wide.
OBJECTIVE_TOL = 1e-9


class Direction(str, Enum):
    MAX = "max"
    MIN = "min"


def _frozen_array(values, dtype=float, ndim=1) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    if arr.ndim != ndim:
        raise ValueError(f"expected a {ndim}-d array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Knapsack:
    """0-1 knapsack constraint: item weights and a capacity limit."""

    weights: np.ndarray
    capacity: float

    def __post_init__(self):
        object.__setattr__(self, "weights", _frozen_array(self.weights))
        object.__setattr__(self, "capacity", float(self.capacity))
        if np.any(self.weights < 0):
            raise ValueError("knapsack weights must be nonnegative")
        if self.capacity < 0:
            raise ValueError("knapsack capacity must be nonnegative")

    @property
    def num_items(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True)
class MachineSpec:
    """A machine with a per-period resource capacity."""

    capacity: float

    def __post_init__(self):
        if self.capacity < 0:
            raise ValueError("machine capacity must be nonnegative")


@dataclass(frozen=True)
class JobSpec:
    """A job: resource requirement, power draw per period, duration, time window.

    The job must run contiguously on one machine, starting no earlier than
    `earliest_start` and finishing no later than `latest_finish`.
    """

    resource: float
    power: float
    duration: int
    earliest_start: int
    latest_finish: int

    def __post_init__(self):
        if self.resource < 0 or self.power < 0:
            raise ValueError("job resource and power must be nonnegative")
        if self.duration <= 0:
            raise ValueError("job duration must be positive")
        if self.earliest_start < 0:
            raise ValueError("earliest_start must be >= 0")
        if self.earliest_start + self.duration > self.latest_finish:
            raise ValueError(
                "job window too small: earliest_start + duration exceeds latest_finish"
            )


@dataclass(frozen=True)
class Scheduling:
    """Machine scheduling constraint: machines, jobs, and a period horizon.

    One coefficient (energy price) per period; the objective is a
    minimization of total energy cost.
    """

    machines: tuple[MachineSpec, ...]
    jobs: tuple[JobSpec, ...]
    periods: int

    def __post_init__(self):
        object.__setattr__(self, "machines", tuple(self.machines))
        object.__setattr__(self, "jobs", tuple(self.jobs))
        if self.periods <= 0:
            raise ValueError("periods must be positive")
        if not self.machines:
            raise ValueError("at least one machine required")
        max_cap = max(m.capacity for m in self.machines)
        for j, job in enumerate(self.jobs):
            if job.duration > self.periods:
                raise ValueError(f"job {j} duration exceeds the horizon")
            if job.latest_finish > self.periods:
                raise ValueError(f"job {j} latest_finish exceeds the horizon")
            if job.resource > max_cap:
                raise ValueError(
                    f"job {j} resource {job.resource} exceeds every machine capacity"
                )


ConstraintData = Union[Knapsack, Scheduling]


@dataclass(frozen=True)
class ProblemSet:
    """One optimization instance: true coefficients, per-coefficient features,
    and the shared constraint data."""

    true_values: np.ndarray
    features: np.ndarray
    constraint: ConstraintData
    id: str

    def __post_init__(self):
        object.__setattr__(self, "true_values", _frozen_array(self.true_values))
        object.__setattr__(self, "features", _frozen_array(self.features, ndim=2))
        n = self.true_values.shape[0]
        if self.features.shape[0] != n:
            raise ValueError(
                f"features rows ({self.features.shape[0]}) must match "
                f"true_values length ({n})"
            )
        if isinstance(self.constraint, Knapsack):
            if self.constraint.num_items != n:
                raise ValueError("knapsack weights length must match value count")
        elif isinstance(self.constraint, Scheduling):
            if self.constraint.periods != n:
                raise ValueError("one coefficient per period required")
        else:
            raise TypeError(f"unsupported constraint type {type(self.constraint)}")

    @property
    def num_coefficients(self) -> int:
        return self.true_values.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class LinearModel:
    """Linear coefficient predictor: predicted value = coefficients . features + intercept."""

    coefficients: np.ndarray
    intercept: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "coefficients", _frozen_array(self.coefficients))
        object.__setattr__(self, "intercept", float(self.intercept))
        if not np.all(np.isfinite(self.coefficients)) or not np.isfinite(self.intercept):
            raise ValueError("model parameters must be finite")

    @property
    def num_parameters(self) -> int:
        return self.coefficients.shape[0]

    def with_coefficient(self, index: int, value: float) -> "LinearModel":
        """Return a copy with one coefficient replaced."""
        coef = self.coefficients.copy()
        coef[index] = value
        return LinearModel(coef, self.intercept)


@dataclass(frozen=True)
class Dataset:
    """A collection of problem sets sharing feature dimension and constraint family."""

    problem_sets: tuple[ProblemSet, ...]
    feature_dim: int

    def __post_init__(self):
        object.__setattr__(self, "problem_sets", tuple(self.problem_sets))
        if not self.problem_sets:
            raise ValueError("dataset must contain at least one problem set")
        family = type(self.problem_sets[0].constraint)
        for ps in self.problem_sets:
            if ps.feature_dim != self.feature_dim:
                raise ValueError(f"problem set {ps.id} has feature_dim {ps.feature_dim}")
            if type(ps.constraint) is not family:
                raise ValueError("all problem sets must share one constraint family")

    def __len__(self) -> int:
        return len(self.problem_sets)


@dataclass(frozen=True)
class Solution:
    """A feasible assignment plus the dot-product vector it induces.

    For knapsack, `vector` is the 0-1 selection itself. For scheduling,
    `vector` is the per-period total power consumption, so that
    objective = vector . prices in both families.
    """

    assignment: tuple
    objective_direction: Direction
    vector: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "vector", _frozen_array(self.vector))


def knapsack_solution(selection) -> Solution:
    x = np.asarray(selection, dtype=float)
    return Solution(tuple(int(v) for v in x), Direction.MAX, x)


def scheduling_solution(assignment: Sequence[tuple[int, int]], constraint: Scheduling) -> Solution:
    """Build a scheduling solution from per-job (machine index, start period) pairs."""
    consumption = np.zeros(constraint.periods)
    for job, (machine, start) in zip(constraint.jobs, assignment):
        consumption[start : start + job.duration] += job.power
    return Solution(tuple((int(m), int(t)) for m, t in assignment), Direction.MIN, consumption)


def validate_solution(solution: Solution, constraint: ConstraintData) -> None:
    """Raise ValueError unless the solution is feasible under the constraint."""
    if isinstance(constraint, Knapsack):
        x = solution.vector
        if x.shape[0] != constraint.num_items:
            raise ValueError("solution length does not match item count")
        if not np.all((x == 0) | (x == 1)):
            raise ValueError("knapsack solution must be 0-1")
        total = float(constraint.weights @ x)
        if total > constraint.capacity + OBJECTIVE_TOL:
            raise ValueError(f"weight {total} exceeds capacity {constraint.capacity}")
        return
    if isinstance(constraint, Scheduling):
        if len(solution.assignment) != len(constraint.jobs):
            raise ValueError("one (machine, start) pair required per job")
        usage = np.zeros((len(constraint.machines), constraint.periods))
        for j, (job, (machine, start)) in enumerate(
            zip(constraint.jobs, solution.assignment)
        ):
            if not 0 <= machine < len(constraint.machines):
                raise ValueError(f"job {j}: machine index {machine} out of range")
            if start < job.earliest_start or start + job.duration > job.latest_finish:
                raise ValueError(f"job {j}: start {start} violates its time window")
            usage[machine, start : start + job.duration] += job.resource
        caps = np.array([m.capacity for m in constraint.machines])
        if np.any(usage > caps[:, None] + OBJECTIVE_TOL):
            raise ValueError("machine resource capacity exceeded in some period")
        expected = np.zeros(constraint.periods)
        for job, (machine, start) in zip(constraint.jobs, solution.assignment):
            expected[start : start + job.duration] += job.power
        if not np.allclose(expected, solution.vector, atol=OBJECTIVE_TOL):
            raise ValueError("consumption vector inconsistent with assignment")
        return
    raise TypeError(f"unsupported constraint type {type(constraint)}")


def predict(model: LinearModel, problem: ProblemSet) -> np.ndarray:
    """Predicted coefficient vector, one entry per item or period."""
    if model.num_parameters != problem.feature_dim:
        raise ValueError(
            f"model has {model.num_parameters} parameters but problem features "
            f"have dimension {problem.feature_dim}"
        )
    return problem.features @ model.coefficients + model.intercept


def solution_objective(solution: Solution, values) -> float:
    """Objective of a solution under the given coefficient vector."""
    values = np.asarray(values, dtype=float)
    if values.shape != solution.vector.shape:
        raise ValueError(
            f"value vector shape {values.shape} does not match solution "
            f"vector shape {solution.vector.shape}"
        )
    return float(solution.vector @ values)


def save_model(model: LinearModel, path) -> None:
    """Write a model as plain text: dimension, coefficients, intercept."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"p {model.num_parameters}\n")
        fh.write("beta " + " ".join(f"{v:.17g}" for v in model.coefficients) + "\n")
        fh.write(f"intercept {model.intercept:.17g}\n")


def load_model(path) -> LinearModel:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    fields = {}
    for ln in lines:
        key, _, rest = ln.partition(" ")
        fields[key] = rest
    try:
        p = int(fields["p"])
        beta = np.array([float(v) for v in fields["beta"].split()])
        intercept = float(fields["intercept"])
    except (KeyError, ValueError) as exc:
        raise ValueError(f"malformed model file {path}: {exc}") from exc
    if beta.shape[0] != p:
        raise ValueError(f"model file {path}: expected {p} coefficients, got {beta.shape[0]}")
    return LinearModel(beta, intercept)
