"""Exact optimization oracles.

Knapsack is solved by dynamic programming (integerized weights) or by
branch-and-bound with an LP-relaxation bound (real weights). Scheduling is
solved by depth-first branch-and-bound. A brute-force enumerator serves as
the testing ground truth. All solvers are pure functions and safe for
concurrent use.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .core import (
    ConstraintData,
    Knapsack,
    OBJECTIVE_TOL,
    Scheduling,
    Solution,
    knapsack_solution,
    scheduling_solution,
    solution_objective,
)

__all__ = [
    "OracleResult",
    "InfeasibleInstanceError",
    "solve_knapsack_dp",
    "solve_knapsack_bb",
    "solve_scheduling",
    "solve_bruteforce",
    "SolverOracle",
]

BRUTEFORCE_MAX_ITEMS = 22
BRUTEFORCE_MAX_COMBOS = 10_000_000


class InfeasibleInstanceError(ValueError):
    """Raised when a scheduling instance admits no feasible schedule."""


@dataclass(frozen=True)
class OracleResult:
    """An optimal solution and its objective under the queried coefficients."""

    solution: Solution
    objective: float


def _integerize(weights: np.ndarray, capacity: float, max_shift: int = 6):
    """Scale weights by the smallest power of ten that makes them integral."""
    for shift in range(max_shift + 1):
        scale = 10**shift
        scaled = weights * scale
        rounded = np.rint(scaled)
        tol = 1e-9 * np.maximum(1.0, np.abs(scaled))
        if np.all(np.abs(scaled - rounded) <= tol):
            return rounded.astype(np.int64), int(np.floor(capacity * scale + OBJECTIVE_TOL))
    raise ValueError(
        f"weights are not integerizable within 10^{max_shift} scaling; "
        "use the branch-and-bound solver for real-valued weights"
    )


def solve_knapsack_dp(values, constraint: Knapsack) -> OracleResult:
    """Maximize selected value subject to the weight capacity, by dynamic programming.

    Items with nonpositive value are never selected (excluding an item is
    always feasible). Ties prefer exclusion, so the returned selection is
    deterministic.
    """
    values = np.asarray(values, dtype=float)
    weights, cap = _integerize(constraint.weights, constraint.capacity)
    n = values.shape[0]
    if weights.shape[0] != n:
        raise ValueError("values and weights must have equal length")

    best = np.zeros(cap + 1)
    keep = np.zeros((n, cap + 1), dtype=bool)
    for i in range(n):
        v = values[i]
        if v <= 0:
            continue
        w = int(weights[i])
        if w > cap:
            continue
        if w == 0:
            keep[i, :] = True
            best += v
            continue
        candidate = best[: cap + 1 - w] + v
        improved = candidate > best[w:]
        keep[i, w:] = improved
        np.maximum(best[w:], candidate, out=best[w:])

    x = np.zeros(n)
    remaining = cap
    for i in range(n - 1, -1, -1):
        if keep[i, remaining]:
            x[i] = 1.0
            remaining -= int(weights[i])
    solution = knapsack_solution(x)
    return OracleResult(solution, solution_objective(solution, values))


def solve_knapsack_bb(values, constraint: Knapsack) -> OracleResult:
    """Maximize selected value by branch-and-bound with a fractional relaxation bound.

    Handles real-valued weights. Objectives agree with the DP solver within
    1e-9; the selection itself may differ under ties.
    """
    values = np.asarray(values, dtype=float)
    weights = np.asarray(constraint.weights, dtype=float)
    cap = float(constraint.capacity)
    n = values.shape[0]
    if weights.shape[0] != n:
        raise ValueError("values and weights must have equal length")

    x = np.zeros(n)
    base_value = 0.0
    candidates = []
    for i in range(n):
        if values[i] <= 0 or weights[i] > cap + OBJECTIVE_TOL:
            continue
        if weights[i] == 0:
            x[i] = 1.0
            base_value += values[i]
        else:
            candidates.append(i)
    order = sorted(candidates, key=lambda i: values[i] / weights[i], reverse=True)
    vv = values[order]
    ww = weights[order]
    m = len(order)

    best_value = base_value
    best_chosen: list[int] = []
    chosen: list[int] = []

    def bound(level: int, value: float, weight: float) -> float:
        room = cap - weight
        for j in range(level, m):
            if ww[j] <= room:
                value += vv[j]
                room -= ww[j]
            else:
                value += vv[j] * room / ww[j]
                break
        return value

    def visit(level: int, value: float, weight: float) -> None:
        nonlocal best_value, best_chosen
        if value > best_value:
            best_value = value
            best_chosen = chosen.copy()
        if level == m:
            return
        if bound(level, value, weight) <= best_value + 1e-12:
            return
        if weight + ww[level] <= cap + OBJECTIVE_TOL:
            chosen.append(level)
            visit(level + 1, value + vv[level], weight + ww[level])
            chosen.pop()
        visit(level + 1, value, weight)

    visit(0, base_value, 0.0)
    for level in best_chosen:
        x[order[level]] = 1.0
    solution = knapsack_solution(x)
    return OracleResult(solution, solution_objective(solution, values))


def _job_options(prices: np.ndarray, constraint: Scheduling):
    """Per job: sorted feasible (cost, machine, start) triples, ignoring conflicts."""
    prefix = np.concatenate(([0.0], np.cumsum(prices)))
    caps = [m.capacity for m in constraint.machines]
    options = []
    for job in constraint.jobs:
        machines = [m for m, c in enumerate(caps) if job.resource <= c + OBJECTIVE_TOL]
        starts = range(job.earliest_start, job.latest_finish - job.duration + 1)
        opts = sorted(
            (job.power * float(prefix[t + job.duration] - prefix[t]), m, t)
            for m in machines
            for t in starts
        )
        if not opts:
            raise InfeasibleInstanceError("a job has no feasible machine or start period")
        options.append(opts)
    return options


def solve_scheduling(prices, constraint: Scheduling) -> OracleResult:
    """Minimize total energy cost by depth-first branch-and-bound.

    Jobs are assigned in order of window tightness. The lower bound adds each
    unassigned job's cheapest feasible window cost, ignoring resource
    conflicts. Raises InfeasibleInstanceError when no complete schedule exists.
    """
    prices = np.asarray(prices, dtype=float)
    if prices.shape[0] != constraint.periods:
        raise ValueError("one price per period required")
    options = _job_options(prices, constraint)
    num_jobs = len(constraint.jobs)
    order = sorted(
        range(num_jobs),
        key=lambda j: (
            constraint.jobs[j].latest_finish
            - constraint.jobs[j].earliest_start
            - constraint.jobs[j].duration,
            j,
        ),
    )
    suffix_min = np.zeros(num_jobs + 1)
    for pos in range(num_jobs - 1, -1, -1):
        suffix_min[pos] = suffix_min[pos + 1] + options[order[pos]][0][0]

    caps = np.array([m.capacity for m in constraint.machines])
    usage = np.zeros((len(caps), constraint.periods))
    assignment: list[tuple[int, int] | None] = [None] * num_jobs
    best_cost = np.inf
    best_assignment: list[tuple[int, int]] | None = None

    def dfs(pos: int, cost: float) -> None:
        nonlocal best_cost, best_assignment
        if cost + suffix_min[pos] >= best_cost - 1e-12:
            return
        if pos == num_jobs:
            best_cost = cost
            best_assignment = [a for a in assignment]  # type: ignore[misc]
            return
        j = order[pos]
        job = constraint.jobs[j]
        for opt_cost, machine, start in options[j]:
            window = usage[machine, start : start + job.duration]
            if np.any(window + job.resource > caps[machine] + OBJECTIVE_TOL):
                continue
            window += job.resource
            assignment[j] = (machine, start)
            dfs(pos + 1, cost + opt_cost)
            assignment[j] = None
            window -= job.resource

    dfs(0, 0.0)
    if best_assignment is None:
        raise InfeasibleInstanceError("no feasible schedule exists for this instance")
    solution = scheduling_solution(best_assignment, constraint)
    return OracleResult(solution, solution_objective(solution, prices))


def _bruteforce_knapsack(values: np.ndarray, constraint: Knapsack) -> OracleResult:
    n = values.shape[0]
    if n > BRUTEFORCE_MAX_ITEMS:
        raise ValueError(f"brute force limited to {BRUTEFORCE_MAX_ITEMS} items, got {n}")
    weights = constraint.weights
    subset_w = np.zeros(1)
    subset_v = np.zeros(1)
    for i in range(n):
        subset_w = np.concatenate((subset_w, subset_w + weights[i]))
        subset_v = np.concatenate((subset_v, subset_v + values[i]))
    feasible = subset_w <= constraint.capacity + OBJECTIVE_TOL
    masked = np.where(feasible, subset_v, -np.inf)
    idx = int(np.argmax(masked))
    x = np.array([(idx >> i) & 1 for i in range(n)], dtype=float)
    solution = knapsack_solution(x)
    return OracleResult(solution, solution_objective(solution, values))


def _bruteforce_scheduling(prices: np.ndarray, constraint: Scheduling) -> OracleResult:
    options = _job_options(prices, constraint)
    combos = 1
    for opts in options:
        combos *= len(opts)
        if combos > BRUTEFORCE_MAX_COMBOS:
            raise ValueError("instance too large for brute-force enumeration")
    caps = np.array([m.capacity for m in constraint.machines])
    best_cost = np.inf
    best_assignment = None
    for combo in itertools.product(*options):
        usage = np.zeros((len(caps), constraint.periods))
        cost = 0.0
        feasible = True
        for job, (opt_cost, machine, start) in zip(constraint.jobs, combo):
            usage[machine, start : start + job.duration] += job.resource
            cost += opt_cost
            if np.any(usage[machine] > caps[machine] + OBJECTIVE_TOL):
                feasible = False
                break
        if feasible and cost < best_cost:
            best_cost = cost
            best_assignment = [(machine, start) for _, machine, start in combo]
    if best_assignment is None:
        raise InfeasibleInstanceError("no feasible schedule exists for this instance")
    solution = scheduling_solution(best_assignment, constraint)
    return OracleResult(solution, solution_objective(solution, prices))


def solve_bruteforce(values, constraint: ConstraintData) -> OracleResult:
    """Exhaustive enumeration; exact ground truth for small instances."""
    values = np.asarray(values, dtype=float)
    if isinstance(constraint, Knapsack):
        return _bruteforce_knapsack(values, constraint)
    if isinstance(constraint, Scheduling):
        return _bruteforce_scheduling(values, constraint)
    raise TypeError(f"unsupported constraint type {type(constraint)}")


class SolverOracle:
    """Dispatching oracle with an invocation counter.

    `method` picks the knapsack backend: "dp", "bb", "brute", or "auto"
    (DP when weights integerize, branch-and-bound otherwise). Scheduling
    always uses branch-and-bound unless method is "brute".
    """

    METHODS = ("auto", "dp", "bb", "brute")

    def __init__(self, method: str = "auto"):
        if method not in self.METHODS:
            raise ValueError(f"unknown oracle method {method!r}")
        self.method = method
        self.calls = 0

    def reset(self) -> None:
        self.calls = 0

    def solve(self, values, constraint: ConstraintData) -> OracleResult:
        self.calls += 1
        if isinstance(constraint, Knapsack):
            if self.method == "brute":
                return solve_bruteforce(values, constraint)
            if self.method == "bb":
                return solve_knapsack_bb(values, constraint)
            if self.method == "dp":
                return solve_knapsack_dp(values, constraint)
            try:
                return solve_knapsack_dp(values, constraint)
            except ValueError:
                return solve_knapsack_bb(values, constraint)
        if isinstance(constraint, Scheduling):
            if self.method == "brute":
                return solve_bruteforce(values, constraint)
            return solve_scheduling(values, constraint)
        raise TypeError(f"unsupported constraint type {type(constraint)}")
