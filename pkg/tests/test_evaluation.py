import numpy as np
import pytest

import dnl
from util import (
    enumerate_knapsack,
    example1_model,
    example1_problem,
    random_knapsack_problem,
)


@pytest.fixture
def oracle():
    return dnl.SolverOracle()


class TestRegret:
    def test_perfect_predictions_have_zero_regret(self, oracle):
        # Identity feature: the unit model reproduces the true values exactly.
        exact = dnl.ProblemSet(
            [2.0, 1.0, 3.0],
            [[2.0], [1.0], [3.0]],
            dnl.Knapsack([1.0, 1.0, 1.0], 2.0),
            "identity",
        )
        value = dnl.regret_of(dnl.LinearModel([1.0], 0.0), exact, oracle)
        assert value.regret == 0.0
        assert value.true_optimal == pytest.approx(5.0)
        assert value.achieved == pytest.approx(5.0)

    def test_example1_beta1_equal_1(self, oracle):
        # Predictions (2, 1, 2). Enumerating all feasible subsets of the true
        # values confirms the chosen pair is also the true optimum.
        ps = example1_problem()
        preds = dnl.predict(example1_model(1.0), ps)
        assert np.allclose(preds, [2.0, 1.0, 2.0])
        true_best, _ = enumerate_knapsack(ps.true_values, ps.constraint.weights, 2.0)
        value = dnl.regret_of(example1_model(1.0), ps, oracle)
        assert value.true_optimal == pytest.approx(true_best)
        assert value.regret == 0.0

    def test_example1_beta1_equal_3(self, oracle):
        # Predictions (0, 1, 4) select items 2 and 3 worth 4; optimum is 5.
        ps = example1_problem()
        value = dnl.regret_of(example1_model(3.0), ps, oracle)
        assert value.regret == pytest.approx(1.0)

    def test_regret_never_negative_on_random_instances(self, oracle):
        rng = np.random.default_rng(101)
        for _ in range(30):
            ps = random_knapsack_problem(rng)
            model = dnl.LinearModel(rng.normal(size=3), rng.normal())
            assert dnl.regret_of(model, ps, oracle).regret >= 0.0

    def test_scheduling_regret_nonnegative(self, oracle):
        rng = np.random.default_rng(103)
        constraint = dnl.Scheduling(
            (dnl.MachineSpec(2.0),),
            (dnl.JobSpec(1.0, 1.0, 2, 0, 6), dnl.JobSpec(2.0, 2.0, 1, 1, 5)),
            6,
        )
        ps = dnl.ProblemSet(
            rng.uniform(1.0, 3.0, size=6), rng.uniform(size=(6, 2)), constraint, "sched"
        )
        for _ in range(10):
            model = dnl.LinearModel(rng.normal(size=2), rng.normal())
            value = dnl.regret_of(model, ps, oracle)
            assert value.regret >= 0.0
            assert value.true_optimal >= value.achieved - 1e-9

    def test_cache_halves_oracle_calls(self, oracle):
        ps = example1_problem()
        cache = dnl.TrueOptimumCache()
        dnl.regret_of(example1_model(1.0), ps, oracle, cache)
        calls_after_first = oracle.calls
        assert calls_after_first == 2
        dnl.regret_of(example1_model(3.0), ps, oracle, cache)
        assert oracle.calls == calls_after_first + 1


class TestPovTov:
    def test_example1_pov_values(self, oracle):
        ps = example1_problem()
        model = example1_model(0.0)
        assert dnl.pov(model, ps, 0, -2.0, oracle) == pytest.approx(6.0)
        assert dnl.pov(model, ps, 0, 1.0, oracle) == pytest.approx(4.0)
        assert dnl.pov(model, ps, 0, 3.0, oracle) == pytest.approx(5.0)

    def test_all_nonpositive_predictions_give_zero_pov(self, oracle):
        ps = dnl.ProblemSet(
            [1.0, 1.0],
            [[1.0], [2.0]],
            dnl.Knapsack([1.0, 1.0], 1.0),
            "nonpos",
        )
        assert dnl.pov(dnl.LinearModel([0.0], 0.0), ps, 0, -5.0, oracle) == 0.0

    def test_example1_tov_values(self, oracle):
        ps = example1_problem()
        model = example1_model(0.0)
        assert dnl.tov(model, ps, 0, 1.0, oracle) == pytest.approx(5.0)
        assert dnl.tov(model, ps, 0, 3.0, oracle) == pytest.approx(4.0)
        assert dnl.tov(model, ps, 0, -2.0, oracle) == pytest.approx(3.0)

    def test_perfect_model_tov_equals_true_optimal(self, oracle):
        exact = dnl.ProblemSet(
            [2.0, 1.0, 3.0],
            [[2.0], [1.0], [3.0]],
            dnl.Knapsack([1.0, 1.0, 1.0], 2.0),
            "identity2",
        )
        model = dnl.LinearModel([1.0], 0.0)
        assert dnl.tov(model, exact, 0, 1.0, oracle) == pytest.approx(5.0)

    def test_pov_dominates_tov_of_any_probe(self, oracle):
        # POV is the optimum under the predictions, so scoring any returned
        # solution under those same predictions can never beat it.
        rng = np.random.default_rng(107)
        for _ in range(20):
            ps = random_knapsack_problem(rng)
            model = dnl.LinearModel(rng.normal(size=3), 0.0)
            b = float(rng.uniform(-2, 2))
            value = dnl.pov(model, ps, 0, b, oracle)
            probe = model.with_coefficient(0, b)
            preds = dnl.predict(probe, ps)
            res = oracle.solve(preds, ps.constraint)
            assert value >= dnl.solution_objective(res.solution, preds) - 1e-9

    def test_pov_is_convex_along_a_coordinate(self, oracle):
        rng = np.random.default_rng(109)
        for _ in range(25):
            ps = random_knapsack_problem(rng)
            model = dnl.LinearModel(rng.normal(size=3), 0.0)
            k = int(rng.integers(0, 3))
            b1, b2 = sorted(rng.uniform(-3, 3, size=2))
            alpha = float(rng.uniform(0.1, 0.9))
            mid = alpha * b1 + (1 - alpha) * b2
            lhs = dnl.pov(model, ps, k, mid, oracle)
            rhs = alpha * dnl.pov(model, ps, k, b1, oracle) + (1 - alpha) * dnl.pov(
                model, ps, k, b2, oracle
            )
            assert lhs <= rhs + 1e-7

    def test_pov_is_piecewise_linear(self, oracle):
        # Inside a span with a fixed argmax, three samples are collinear.
        ps = example1_problem()
        model = example1_model(0.0)
        xs = (0.2, 1.0, 1.8)
        ys = [dnl.pov(model, ps, 0, x, oracle) for x in xs]
        assert dnl.collinear(*zip(xs, ys))


class TestEvaluateModelRegret:
    def test_perfect_model_summary(self, oracle):
        sets = [
            dnl.ProblemSet(
                [2.0, 1.0], [[2.0], [1.0]], dnl.Knapsack([1.0, 1.0], 1.0), f"p{i}"
            )
            for i in range(3)
        ]
        mean, std = dnl.evaluate_model_regret(dnl.LinearModel([1.0], 0.0), sets, oracle)
        assert mean == 0.0 and std == 0.0

    def test_single_problem_set_has_zero_std(self, oracle):
        ps = example1_problem()
        _, std = dnl.evaluate_model_regret(example1_model(3.0), [ps], oracle)
        assert std == 0.0

    def test_matches_manual_computation(self, oracle):
        rng = np.random.default_rng(113)
        sets = [random_knapsack_problem(rng, ps_id=f"m{i}") for i in range(3)]
        model = dnl.LinearModel(rng.normal(size=3), 0.0)
        regrets = [dnl.regret_of(model, ps, oracle).regret for ps in sets]
        mean, std = dnl.evaluate_model_regret(model, sets, oracle)
        assert mean == pytest.approx(float(np.mean(regrets)))
        assert std == pytest.approx(float(np.std(regrets, ddof=1)))
