"""Tests for proportional budget allocation."""

import math
from fractions import Fraction

import pytest

from dpcomp import (
    CompositionInstance,
    InfeasibleDeltaError,
    StatisticSpec,
    ZeroBudgetError,
    allocate_budget,
    exact_delta_of_epsilon,
    exact_optimal_epsilon,
)

LN3 = Fraction(math.log(3))


def spec(name, weight, delta=0):
    return StatisticSpec(name=name, weight=Fraction(weight), delta=Fraction(delta))


class TestAllocate:
    def test_single_statistic_takes_everything(self):
        r = allocate_budget([spec("a", 1)], Fraction(1, 2), 0, method="exact-optimal")
        assert r.statistics[0].epsilon == 0.5
        assert r.realized.epsilon_g <= 0.5

    def test_equal_weights_split_evenly(self):
        r = allocate_budget(
            [spec("a", 1), spec("b", 1)], Fraction(1, 2), 0, method="exact-optimal"
        )
        assert [s.epsilon for s in r.statistics] == [0.25, 0.25]

    def test_weighted_split_recomposes_within_budget(self):
        stats = [spec("a", 1), spec("b", 2)]
        r = allocate_budget(stats, LN3, Fraction(1, 4), method="exact-optimal")
        assert r.statistics[1].epsilon_exact == 2 * r.statistics[0].epsilon_exact
        # Recompose at the exact returned scale: still within budget.
        inst = CompositionInstance.from_pairs(
            [s.epsilon_exact for s in r.statistics], [0, 0]
        )
        recomposed = exact_optimal_epsilon(inst, Fraction(1, 4))
        assert recomposed.epsilon_g <= float(LN3) + 1e-12
        # And the scale is maximal: 1e-6 more breaks the budget.
        bumped = CompositionInstance.from_pairs(
            [s.epsilon_exact * Fraction(1_000_001, 1_000_000) for s in r.statistics],
            [0, 0],
        )
        assert exact_delta_of_epsilon(bumped, LN3) > 0.25

    def test_optimal_beats_basic_at_positive_delta(self):
        stats = [spec("a", 1), spec("b", 1)]
        basic = allocate_budget(stats, Fraction(1), Fraction(1, 10), method="basic")
        optimal = allocate_budget(stats, Fraction(1), Fraction(1, 10), method="exact-optimal")
        assert optimal.scale > basic.scale

    def test_zero_budget_raises(self):
        with pytest.raises(ZeroBudgetError):
            allocate_budget([spec("a", 1)], 0, Fraction(1, 10))

    def test_infeasible_delta(self):
        with pytest.raises(InfeasibleDeltaError) as err:
            allocate_budget([spec("a", 1, Fraction(1, 5))], 1, Fraction(1, 10))
        assert err.value.threshold == Fraction(1, 5)

    def test_basic_method_uses_delta_sum_floor(self):
        stats = [spec("a", 1, Fraction(1, 10)), spec("b", 1, Fraction(1, 10))]
        with pytest.raises(InfeasibleDeltaError) as err:
            allocate_budget(stats, 1, Fraction(15, 100), method="basic")
        assert err.value.threshold == Fraction(1, 5)

    def test_approx_method_allocates_soundly(self):
        stats = [spec("a", 1), spec("b", 3), spec("c", 2)]
        r = allocate_budget(
            stats, Fraction(2), Fraction(1, 100), method="approx-optimal", eta=Fraction(1, 20)
        )
        assert r.realized.epsilon_g <= 2.0
        weights = [1, 3, 2]
        for s, w in zip(r.statistics, weights):
            assert s.epsilon_exact == r.scale_exact * w

    def test_approx_requires_eta(self):
        with pytest.raises(ValueError):
            allocate_budget([spec("a", 1)] * 3, 1, Fraction(1, 100), method="approx-optimal")

    def test_homogeneous_method_requires_uniform_stats(self):
        with pytest.raises(ValueError):
            allocate_budget(
                [spec("a", 1), spec("b", 2)], 1, Fraction(1, 100), method="homogeneous-optimal"
            )
        r = allocate_budget(
            [spec("a", 1), spec("b", 1)], 1, Fraction(1, 100), method="homogeneous-optimal"
        )
        assert r.statistics[0].epsilon == r.statistics[1].epsilon

    def test_approx_at_the_feasibility_floor_stays_within_budget(self):
        # With delta_g exactly at the floor the grid search must shrink the
        # scale below the naive split so its certified value fits the budget.
        stats = [spec("a", 1), spec("b", 1)]
        r = allocate_budget(stats, 1, 0, method="approx-optimal", eta=Fraction(1, 10))
        assert r.realized.epsilon_g <= 1.0
        assert r.scale_exact < Fraction(1, 2)
        assert r.scale_exact > Fraction(1, 3)
