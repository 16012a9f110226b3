"""Test-only helpers: independent enumeration oracles and probe utilities.

These deliberately avoid the package's solver code paths so that agreement
checks are meaningful.
"""

import itertools

import numpy as np

import dnl


def enumerate_knapsack(values, weights, capacity):
    """Exhaustive 0-1 knapsack by plain subset iteration."""
    n = len(values)
    best_val = 0.0
    best_x = (0,) * n
    for bits in itertools.product((0, 1), repeat=n):
        weight = sum(b * w for b, w in zip(bits, weights))
        if weight <= capacity + 1e-9:
            value = sum(b * v for b, v in zip(bits, values))
            if value > best_val + 1e-12:
                best_val = value
                best_x = bits
    return best_val, best_x


def enumerate_schedule(prices, constraint):
    """Exhaustive scheduling by iterating every (machine, start) combination."""
    prices = np.asarray(prices, dtype=float)
    per_job = []
    for job in constraint.jobs:
        opts = []
        for m, machine in enumerate(constraint.machines):
            if job.resource > machine.capacity + 1e-9:
                continue
            for t in range(job.earliest_start, job.latest_finish - job.duration + 1):
                cost = job.power * float(prices[t : t + job.duration].sum())
                opts.append((m, t, cost))
        per_job.append(opts)
    best_cost = np.inf
    best_assignment = None
    caps = [m.capacity for m in constraint.machines]
    for combo in itertools.product(*per_job):
        usage = np.zeros((len(caps), constraint.periods))
        ok = True
        cost = 0.0
        for job, (m, t, c) in zip(constraint.jobs, combo):
            usage[m, t : t + job.duration] += job.resource
            cost += c
            if usage[m].max() > caps[m] + 1e-9:
                ok = False
                break
        if ok and cost < best_cost:
            best_cost = cost
            best_assignment = [(m, t) for m, t, _ in combo]
    return best_cost, best_assignment


def example1_problem():
    """Three-item knapsack with capacity for two items and known transitions."""
    return dnl.ProblemSet(
        [2.0, 1.0, 3.0],
        [[-1.0, 3.0], [0.0, 1.0], [1.0, 1.0]],
        dnl.Knapsack([1.0, 1.0, 1.0], 2.0),
        "example1",
    )


def example1_model(beta1):
    return dnl.LinearModel([beta1, 1.0], 0.0)


def random_knapsack_problem(rng, n=None, ps_id="rand"):
    """Random small knapsack problem set with continuous features."""
    if n is None:
        n = int(rng.integers(5, 13))
    features = rng.uniform(-1.0, 1.0, size=(n, 3))
    values = rng.uniform(0.5, 3.0, size=n)
    weights = rng.integers(1, 6, size=n).astype(float)
    capacity = max(1.0, 0.45 * float(weights.sum()))
    return dnl.ProblemSet(values, features, dnl.Knapsack(weights, capacity), ps_id)


def sweep_solution_changes(model, problem, beta_index, lo, hi, step, solve=None):
    """Dense sweep: intervals (between adjacent grid points) where the
    solver's selection changes. Uses direct coefficient evaluation rather
    than the package's probing layer."""
    if solve is None:
        solve = dnl.solve_knapsack_dp
    rest = model.coefficients.copy()
    rest[beta_index] = 0.0
    base = problem.features @ rest + model.intercept
    direction = problem.features[:, beta_index]
    grid = np.arange(lo, hi + step / 2, step)
    changes = []
    prev_assignment = None
    for b in grid:
        assignment = solve(base + b * direction, problem.constraint).solution.assignment
        if prev_assignment is not None and assignment != prev_assignment:
            changes.append((float(b - step), float(b)))
        prev_assignment = assignment
    return changes
