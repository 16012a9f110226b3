"""Decision-quality evaluation: regret, predicted optimal value, true optimal value.

Scheduling is a minimization, so its objectives are sign-flipped into the
shared maximization convention here; larger POV/TOV is always better and
regret is always nonnegative.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import (
    Direction,
    LinearModel,
    ProblemSet,
    predict,
    solution_objective,
)
from .oracles import OracleResult, SolverOracle

__all__ = [
    "RegretValue",
    "TrueOptimumCache",
    "regret_of",
    "pov",
    "tov",
    "evaluate_model_regret",
]

REGRET_CLAMP = 1e-9


def _sign(direction: Direction) -> float:
    return 1.0 if direction is Direction.MAX else -1.0


def _signed_objective(result: OracleResult) -> float:
    return _sign(result.solution.objective_direction) * result.objective


@dataclass(frozen=True)
class RegretValue:
    """Regret decomposition: regret = true_optimal - achieved, both in the
    maximization convention."""

    regret: float
    true_optimal: float
    achieved: float


class TrueOptimumCache:
    """Memo of true-optimal objectives per problem set id.

    True optima never change during training; caching them halves the oracle
    calls of every regret evaluation. Safe for concurrent readers.
    """

    def __init__(self):
        self._values: dict[str, float] = {}
        self._lock = threading.Lock()

    def true_optimal(self, problem: ProblemSet, oracle: SolverOracle) -> float:
        with self._lock:
            if problem.id in self._values:
                return self._values[problem.id]
        value = _signed_objective(oracle.solve(problem.true_values, problem.constraint))
        with self._lock:
            return self._values.setdefault(problem.id, value)

    def __len__(self) -> int:
        return len(self._values)


def regret_of(
    model: LinearModel,
    problem: ProblemSet,
    oracle: SolverOracle,
    cache: Optional[TrueOptimumCache] = None,
) -> RegretValue:
    """Regret of deciding with the model's predictions on one problem set.

    Solves once under the true coefficients (memoized when a cache is given)
    and once under the predicted coefficients, then scores the predicted
    solution against the true coefficients.
    """
    if cache is not None:
        true_optimal = cache.true_optimal(problem, oracle)
    else:
        true_optimal = _signed_objective(oracle.solve(problem.true_values, problem.constraint))
    predicted = predict(model, problem)
    result = oracle.solve(predicted, problem.constraint)
    achieved = _sign(result.solution.objective_direction) * solution_objective(
        result.solution, problem.true_values
    )
    regret = true_optimal - achieved
    if regret < -REGRET_CLAMP:
        raise RuntimeError(
            f"negative regret {regret} on problem {problem.id}: oracle is not exact"
        )
    if regret <= REGRET_CLAMP:
        regret = 0.0
    return RegretValue(regret, true_optimal, achieved)


def pov(
    model: LinearModel,
    problem: ProblemSet,
    beta_index: int,
    beta_value: float,
    oracle: SolverOracle,
) -> float:
    """Predicted optimal value at one probed parameter setting.

    Solves with the predicted coefficients and evaluates the returned solution
    under those same predictions. Convex and piecewise linear in the probed
    parameter.
    """
    probe = model.with_coefficient(beta_index, beta_value)
    result = oracle.solve(predict(probe, problem), problem.constraint)
    return _signed_objective(result)


def tov(
    model: LinearModel,
    problem: ProblemSet,
    beta_index: int,
    beta_value: float,
    oracle: SolverOracle,
) -> float:
    """True optimal value: the predicted-coefficient solution scored under the
    true coefficients. A step function of the probed parameter."""
    probe = model.with_coefficient(beta_index, beta_value)
    result = oracle.solve(predict(probe, problem), problem.constraint)
    return _sign(result.solution.objective_direction) * solution_objective(
        result.solution, problem.true_values
    )


def evaluate_model_regret(
    model: LinearModel,
    problem_sets: Sequence[ProblemSet],
    oracle: SolverOracle,
    cache: Optional[TrueOptimumCache] = None,
) -> tuple[float, float]:
    """Mean and sample standard deviation of per-problem-set regret."""
    regrets = np.array(
        [regret_of(model, ps, oracle, cache).regret for ps in problem_sets]
    )
    if regrets.size == 0:
        raise ValueError("at least one problem set required")
    std = float(np.std(regrets, ddof=1)) if regrets.size > 1 else 0.0
    return float(np.mean(regrets)), std
