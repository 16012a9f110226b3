"""Transition-point extraction by divide-and-conquer collinearity probing.

The predicted optimal value along one model parameter is convex piecewise
linear, so three samples are collinear exactly when no solution change lies
between the outer two. The extractor samples a region on a uniform grid,
keeps the spans around non-collinear triples, and re-samples only those
spans with a ten-fold smaller step until the step reaches the requested
resolution. Collinear triples certify their interior transition-free, so
discarded regions are sound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import LinearModel, ProblemSet
from .evaluation import pov, tov
from .oracles import SolverOracle

__all__ = [
    "SearchSpec",
    "TransitionProfile",
    "collinear",
    "extract_full",
    "extract_greedy",
    "COLLINEARITY_TOL",
]

# Relative tolerance on the collinearity cross term.
COLLINEARITY_TOL = 1e-7

# Below this magnitude the relative search bounds degenerate and the
# symmetric fallback region is used instead.
ZERO_PARAM_THRESHOLD = 1e-6
ZERO_PARAM_BOUNDS = (-1.0, 1.0)
ZERO_PARAM_MIN_STEP = 0.01

# Strict TOV improvement threshold for the greedy early stop.
TOV_IMPROVEMENT_TOL = 1e-9


@dataclass(frozen=True)
class SearchSpec:
    """One-parameter search region and resolution for transition extraction."""

    lower: float
    upper: float
    min_step: float
    initial_points: int = 10
    shrink_factor: float = 10.0

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError("lower must be strictly below upper")
        if self.initial_points < 3:
            raise ValueError("at least three probe points required")
        if self.shrink_factor <= 1:
            raise ValueError("shrink_factor must exceed 1")
        if self.min_step <= 0:
            raise ValueError("min_step must be positive")

    @classmethod
    def from_parameter(
        cls,
        beta: float,
        relative_span: float = 1.5,
        initial_points: int = 10,
        shrink_factor: float = 10.0,
    ) -> "SearchSpec":
        """Region centered on the current parameter: half-width 1.5 times its
        magnitude, minimum step one tenth of it. Near zero the relative rule
        degenerates, so a fixed symmetric region is substituted."""
        if abs(beta) < ZERO_PARAM_THRESHOLD:
            lo, hi = ZERO_PARAM_BOUNDS
            return cls(lo, hi, ZERO_PARAM_MIN_STEP, initial_points, shrink_factor)
        lo, hi = sorted((beta - relative_span * beta, beta + relative_span * beta))
        return cls(lo, hi, abs(beta) / 10.0, initial_points, shrink_factor)


@dataclass(frozen=True)
class TransitionProfile:
    """Ordered transition intervals found for one problem set and parameter."""

    intervals: tuple[tuple[float, float], ...]
    probe_count: int
    lower: float
    upper: float
    truncated: bool = False

    def __post_init__(self):
        prev_high = None
        for low, high in self.intervals:
            if not (self.lower - 1e-12 <= low < high <= self.upper + 1e-12):
                raise ValueError(f"interval ({low}, {high}) outside region")
            if prev_high is not None and low < prev_high - 1e-12:
                raise ValueError("transition intervals must be sorted and disjoint")
            prev_high = high

    def midpoints(self) -> list[float]:
        return [(low + high) / 2.0 for low, high in self.intervals]


def collinear(p1, p2, p3, tol: float = COLLINEARITY_TOL) -> bool:
    """Whether three (x, y) samples lie on one line, up to a relative tolerance.

    For a convex piecewise-linear function this is equivalent to: no
    transition point strictly between the outer abscissae.
    """
    (x1, y1), (x2, y2), (x3, y3) = p1, p2, p3
    if not x1 < x2 < x3:
        raise ValueError("probe abscissae must be strictly increasing")
    cross = (y2 - y1) * (x3 - x2) - (y3 - y2) * (x2 - x1)
    scale = max(1.0, abs(y1), abs(y3))
    return abs(cross) <= tol * scale


def _flagged_spans(grid: np.ndarray, values: list[float], tol: float):
    """Spans around non-collinear consecutive triples, merged when they touch."""
    spans = []
    for i in range(1, len(grid) - 1):
        if not collinear(
            (grid[i - 1], values[i - 1]),
            (grid[i], values[i]),
            (grid[i + 1], values[i + 1]),
            tol,
        ):
            spans.append((float(grid[i - 1]), float(grid[i + 1])))
    return _merge_spans(spans)


def _merge_spans(spans):
    merged: list[list[float]] = []
    for low, high in sorted(spans):
        if merged and low <= merged[-1][1] + 1e-15:
            merged[-1][1] = max(merged[-1][1], high)
        else:
            merged.append([low, high])
    return [(low, high) for low, high in merged]


def _grid(lower: float, upper: float, step: float):
    # ceil keeps the realized spacing at or below the requested step, so a
    # merged three-cell span at the final level stays within min_step.
    npts = max(3, math.ceil((upper - lower) / step - 1e-9) + 1)
    grid = np.linspace(lower, upper, npts)
    return grid, (upper - lower) / (npts - 1)


def _resolution_floor(spec: SearchSpec) -> float:
    # A flagged span covers two grid cells plus possibly a merged third, so
    # refinement continues until three cells fit inside min_step.
    return spec.min_step / 3.0


def _child_step(step: float, spec: SearchSpec) -> tuple[float, bool]:
    """Next refinement step, clamped to the resolution floor.

    The collinearity cross term shrinks with the square of the step, so
    overshooting the floor would mask shallow kinks at the final level.
    Returns the step and whether that level is the final one.
    """
    child = step / spec.shrink_factor
    floor = _resolution_floor(spec)
    if child <= floor:
        return floor, True
    return child, False


def extract_full(
    model: LinearModel,
    problem: ProblemSet,
    beta_index: int,
    spec: SearchSpec,
    oracle: SolverOracle,
) -> TransitionProfile:
    """All final-resolution transition intervals of POV over the region."""
    calls_before = oracle.calls
    value_cache: dict[float, float] = {}

    def pov_at(beta: float) -> float:
        if beta not in value_cache:
            value_cache[beta] = pov(model, problem, beta_index, beta, oracle)
        return value_cache[beta]

    def refine(lower: float, upper: float, step: float, final: bool):
        grid, actual = _grid(lower, upper, step)
        values = [pov_at(float(b)) for b in grid]
        spans = _flagged_spans(grid, values, COLLINEARITY_TOL)
        if final:
            return spans
        child, child_final = _child_step(actual, spec)
        out = []
        for low, high in spans:
            out.extend(refine(low, high, child, child_final))
        return _merge_spans(out)

    initial_step = (spec.upper - spec.lower) / (spec.initial_points - 1)
    intervals = refine(
        spec.lower, spec.upper, initial_step, initial_step <= _resolution_floor(spec)
    )
    return TransitionProfile(
        tuple(intervals), oracle.calls - calls_before, spec.lower, spec.upper
    )


def _span_distance(span: tuple[float, float], beta: float) -> float:
    low, high = span
    if low <= beta <= high:
        return 0.0
    return min(abs(low - beta), abs(high - beta))


def extract_greedy(
    model: LinearModel,
    problem: ProblemSet,
    beta_index: int,
    spec: SearchSpec,
    oracle: SolverOracle,
    beta_old: float,
) -> TransitionProfile:
    """Transition extraction that stops at the first interval improving TOV.

    Subregions nearest the old parameter are explored first. As soon as a
    final-resolution interval's midpoint improves TOV over the old parameter,
    the profile is returned truncated to that single interval. When nothing
    improves, the full profile of the explored region is returned.
    """
    if not spec.lower <= beta_old <= spec.upper:
        raise ValueError("beta_old must lie inside the search region")
    calls_before = oracle.calls
    value_cache: dict[float, float] = {}
    tov_reference = tov(model, problem, beta_index, beta_old, oracle)
    found: list[tuple[float, float]] = []
    winner: list[tuple[float, float]] = []

    def pov_at(beta: float) -> float:
        if beta not in value_cache:
            value_cache[beta] = pov(model, problem, beta_index, beta, oracle)
        return value_cache[beta]

    def refine(lower: float, upper: float, step: float, final: bool) -> bool:
        grid, actual = _grid(lower, upper, step)
        values = [pov_at(float(b)) for b in grid]
        spans = _flagged_spans(grid, values, COLLINEARITY_TOL)
        spans.sort(key=lambda s: (_span_distance(s, beta_old), s[0]))
        child, child_final = _child_step(actual, spec)
        for span in spans:
            if final:
                mid = (span[0] + span[1]) / 2.0
                if (
                    tov(model, problem, beta_index, mid, oracle)
                    > tov_reference + TOV_IMPROVEMENT_TOL
                ):
                    winner.append(span)
                    return True
                found.append(span)
            elif refine(span[0], span[1], child, child_final):
                return True
        return False

    initial_step = (spec.upper - spec.lower) / (spec.initial_points - 1)
    improved = refine(
        spec.lower, spec.upper, initial_step, initial_step <= _resolution_floor(spec)
    )
    if improved:
        return TransitionProfile(
            (winner[0],), oracle.calls - calls_before, spec.lower, spec.upper, truncated=True
        )
    intervals = _merge_spans(found)
    return TransitionProfile(
        tuple(intervals), oracle.calls - calls_before, spec.lower, spec.upper
    )
