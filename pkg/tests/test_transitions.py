import math

import numpy as np
import pytest

import dnl
from util import (
    example1_model,
    example1_problem,
    random_knapsack_problem,
    sweep_solution_changes,
)


@pytest.fixture
def oracle():
    return dnl.SolverOracle()


class TestCollinear:
    def test_exact_line(self):
        assert dnl.collinear((0, 0), (1, 1), (2, 2))

    def test_example1_triple_is_not_collinear(self, oracle):
        ps = example1_problem()
        model = example1_model(0.0)
        pts = [(x, dnl.pov(model, ps, 0, x, oracle)) for x in (-1.0, 1.0, 3.0)]
        assert not dnl.collinear(*pts)

    def test_within_tolerance(self):
        assert dnl.collinear((0, 0), (1, 1), (2, 2 + 5e-13), tol=1e-9)

    def test_requires_increasing_abscissae(self):
        with pytest.raises(ValueError):
            dnl.collinear((1, 0), (0, 0), (2, 0))


class TestSearchSpec:
    def test_invalid_bounds_rejected(self):
        with pytest.raises(ValueError):
            dnl.SearchSpec(1.0, 1.0, 0.1)
        with pytest.raises(ValueError):
            dnl.SearchSpec(0.0, 1.0, -0.1)
        with pytest.raises(ValueError):
            dnl.SearchSpec(0.0, 1.0, 0.1, initial_points=2)

    def test_from_positive_parameter(self):
        spec = dnl.SearchSpec.from_parameter(2.0)
        assert spec.lower == pytest.approx(-1.0)
        assert spec.upper == pytest.approx(5.0)
        assert spec.min_step == pytest.approx(0.2)

    def test_from_negative_parameter(self):
        spec = dnl.SearchSpec.from_parameter(-2.0)
        assert spec.lower == pytest.approx(-5.0)
        assert spec.upper == pytest.approx(1.0)
        assert spec.min_step == pytest.approx(0.2)

    def test_zero_parameter_uses_fallback(self):
        spec = dnl.SearchSpec.from_parameter(0.0)
        assert (spec.lower, spec.upper) == (-1.0, 1.0)
        assert spec.min_step == 0.01


class TestExtractFull:
    def test_example1_two_intervals(self, oracle):
        ps = example1_problem()
        spec = dnl.SearchSpec(-5.0, 5.0, min_step=0.05)
        profile = dnl.extract_full(example1_model(1.0), ps, 0, spec, oracle)
        assert len(profile.intervals) == 2
        (a1, b1), (a2, b2) = profile.intervals
        assert a1 <= 0.0 <= b1
        assert a2 <= 2.0 <= b2
        assert b1 - a1 <= 0.05 and b2 - a2 <= 0.05

    def test_constant_argmax_region_has_no_intervals(self, oracle):
        # Both items respond identically to the parameter and the leader stays
        # positive across the region, so the selection never changes.
        ps = dnl.ProblemSet(
            [5.0, 1.0],
            [[1.0, 10.0], [1.0, 0.0]],
            dnl.Knapsack([1.0, 1.0], 1.0),
            "const",
        )
        spec = dnl.SearchSpec(-3.0, 3.0, min_step=0.05)
        profile = dnl.extract_full(dnl.LinearModel([0.0, 1.0], 0.0), ps, 0, spec, oracle)
        assert profile.intervals == ()

    def test_intervals_bracket_solution_changes(self, oracle):
        rng = np.random.default_rng(211)
        for i in range(12):
            ps = random_knapsack_problem(rng, n=8, ps_id=f"sweep{i}")
            model = dnl.LinearModel(rng.normal(size=3), 0.0)
            spec = dnl.SearchSpec(-1.5, 1.5, min_step=0.05)
            profile = dnl.extract_full(model, ps, 0, spec, oracle)
            changes = sweep_solution_changes(model, ps, 0, -1.5, 1.5, 0.005)
            for a, b in profile.intervals:
                hit = any(hi >= a - 0.005 and lo <= b + 0.005 for lo, hi in changes)
                assert hit, f"interval ({a}, {b}) brackets no solution change"
            for lo, hi in changes:
                covered = any(hi >= a and lo <= b for a, b in profile.intervals)
                assert covered, f"solution change in ({lo}, {hi}) was missed"

    def test_probe_budget(self, oracle):
        ps = example1_problem()
        spec = dnl.SearchSpec(-5.0, 5.0, min_step=0.05)
        profile = dnl.extract_full(example1_model(1.0), ps, 0, spec, oracle)
        k = len(profile.intervals)
        levels = 2 + math.ceil(
            math.log((spec.upper - spec.lower) / spec.min_step, spec.shrink_factor)
        )
        ceiling = 3 * spec.initial_points * (k + 1) * levels
        assert profile.probe_count <= ceiling

    def test_probe_count_matches_oracle_calls(self, oracle):
        ps = example1_problem()
        spec = dnl.SearchSpec(-5.0, 5.0, min_step=0.05)
        before = oracle.calls
        profile = dnl.extract_full(example1_model(1.0), ps, 0, spec, oracle)
        assert profile.probe_count == oracle.calls - before


class TestExtractGreedy:
    def test_example1_from_beta_3_returns_improving_interval(self, oracle):
        ps = example1_problem()
        model = example1_model(3.0)
        spec = dnl.SearchSpec(-5.0, 5.0, min_step=0.05)
        profile = dnl.extract_greedy(model, ps, 0, spec, oracle, 3.0)
        assert profile.truncated
        assert len(profile.intervals) == 1
        mid = profile.midpoints()[0]
        tov_old = dnl.tov(model, ps, 0, 3.0, oracle)
        assert dnl.tov(model, ps, 0, mid, oracle) > tov_old
        # The improving interval sits at one of the two known transitions.
        assert min(abs(mid - 0.0), abs(mid - 2.0)) < 0.05

    def test_perfect_model_finds_no_improvement(self, oracle):
        exact = dnl.ProblemSet(
            [2.0, 1.0, 3.0],
            [[2.0], [1.0], [3.0]],
            dnl.Knapsack([1.0, 1.0, 1.0], 2.0),
            "identity3",
        )
        model = dnl.LinearModel([1.0], 0.0)
        spec = dnl.SearchSpec.from_parameter(1.0)
        profile = dnl.extract_greedy(model, exact, 0, spec, oracle, 1.0)
        assert not profile.truncated

    def test_beta_old_outside_region_rejected(self, oracle):
        ps = example1_problem()
        spec = dnl.SearchSpec(-1.0, 1.0, min_step=0.05)
        with pytest.raises(ValueError):
            dnl.extract_greedy(example1_model(0.0), ps, 0, spec, oracle, 5.0)

    def test_greedy_improves_whenever_full_does(self, oracle):
        rng = np.random.default_rng(223)
        for i in range(15):
            ps = random_knapsack_problem(rng, ps_id=f"greedy{i}")
            model = dnl.LinearModel(rng.normal(size=3), 0.0)
            beta_old = float(model.coefficients[0])
            spec = dnl.SearchSpec.from_parameter(beta_old)
            full = dnl.extract_full(model, ps, 0, spec, oracle)
            greedy = dnl.extract_greedy(model, ps, 0, spec, oracle, beta_old)
            tov_old = dnl.tov(model, ps, 0, beta_old, oracle)
            full_improves = any(
                dnl.tov(model, ps, 0, m, oracle) > tov_old + 1e-9
                for m in full.midpoints()
            )
            if full_improves:
                assert greedy.truncated
                mid = greedy.midpoints()[0]
                assert dnl.tov(model, ps, 0, mid, oracle) > tov_old + 1e-9

    def test_truncation_skips_the_second_transition(self, oracle):
        # From beta 3 the improving transition near 2 is found first, so the
        # subtree around 0 is never refined and probes are saved.
        ps = example1_problem()
        spec = dnl.SearchSpec(-5.0, 5.0, min_step=0.05)
        full = dnl.extract_full(example1_model(3.0), ps, 0, spec, oracle)
        greedy = dnl.extract_greedy(example1_model(3.0), ps, 0, spec, oracle, 3.0)
        assert greedy.truncated
        assert greedy.probe_count < full.probe_count

    def test_greedy_probe_count_matches_oracle_calls(self, oracle):
        ps = example1_problem()
        spec = dnl.SearchSpec(-5.0, 5.0, min_step=0.05)
        before = oracle.calls
        profile = dnl.extract_greedy(example1_model(3.0), ps, 0, spec, oracle, 3.0)
        assert profile.probe_count == oracle.calls - before


class TestProfileInvariants:
    def test_intervals_sorted_disjoint_within_region(self, oracle):
        rng = np.random.default_rng(229)
        for i in range(10):
            ps = random_knapsack_problem(rng, ps_id=f"inv{i}")
            model = dnl.LinearModel(rng.normal(size=3), 0.0)
            spec = dnl.SearchSpec(-2.0, 2.0, min_step=0.05)
            profile = dnl.extract_full(model, ps, 0, spec, oracle)
            prev = spec.lower
            for a, b in profile.intervals:
                assert spec.lower <= a < b <= spec.upper
                assert a >= prev
                prev = b

    def test_constructor_rejects_overlaps(self):
        with pytest.raises(ValueError):
            dnl.TransitionProfile(((0.0, 0.5), (0.4, 0.9)), 0, -1.0, 1.0)
        with pytest.raises(ValueError):
            dnl.TransitionProfile(((-2.0, 0.5),), 0, -1.0, 1.0)
