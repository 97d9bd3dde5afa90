"""Tests for the closed-form and exact composition computations."""

import math
import random
from fractions import Fraction

import pytest

from dpcomp import (
    CompositionInstance,
    EnumerationLimitError,
    InfeasibleDeltaError,
    advanced_compose,
    basic_compose,
    exact_delta_of_epsilon,
    exact_optimal_epsilon,
    homogeneous_delta_of_epsilon,
    homogeneous_optimal_epsilon,
)
from dpcomp.api import compose_document

from conftest import rand_rational, random_instance

LN2 = Fraction(math.log(2))
LN3 = Fraction(math.log(3))


class TestBasic:
    def test_homogeneous_sums(self):
        inst = CompositionInstance.homogeneous(Fraction(1, 10), Fraction(1, 1000), 3)
        r = basic_compose(inst)
        assert r.epsilon_g == pytest.approx(0.3)
        assert r.delta_g == pytest.approx(0.003)
        assert not r.vacuous

    def test_single_mechanism_identity(self):
        r = basic_compose(CompositionInstance.from_pairs([Fraction(1, 2)], [0]))
        assert (r.epsilon_g, r.delta_g) == (0.5, 0.0)

    def test_heterogeneous_sums(self):
        inst = CompositionInstance.from_pairs(
            ["0.1", "0.2", "0.3"], ["0", "0.01", "0.02"]
        )
        r = basic_compose(inst)
        assert r.epsilon_g == pytest.approx(0.6)
        assert r.delta_g == pytest.approx(0.03)

    def test_vacuous_flag_when_deltas_exceed_one(self):
        inst = CompositionInstance.homogeneous(Fraction(1), Fraction(3, 5), 2)
        assert basic_compose(inst).vacuous


class TestAdvanced:
    def test_zero_epsilon(self):
        r = advanced_compose(0, 0, 50, Fraction(1, 2**20))
        assert r.epsilon_g == 0.0

    def test_hand_evaluated_closed_form(self):
        # Independent double-precision evaluation of the same formula.
        expected = math.sqrt(2 * 100 * 20 * math.log(2)) * 0.1 + 10 * math.expm1(0.1)
        r = advanced_compose(Fraction(1, 10), 0, 100, Fraction(1, 2**20))
        assert r.epsilon_g == pytest.approx(expected, rel=1e-12)
        assert r.epsilon_g == pytest.approx(6.317246876, rel=1e-9)
        assert r.delta_g == pytest.approx(2**-20)

    def test_figure_parameters(self):
        expected = math.sqrt(2 * 700 * 25 * math.log(2)) * 0.005 + 700 * 0.005 * math.expm1(0.005)
        r = advanced_compose(Fraction(5, 1000), 0, 700, Fraction(1, 2**25))
        assert r.epsilon_g == pytest.approx(expected, rel=1e-12)
        assert not r.vacuous

    def test_rejects_bad_delta_prime(self):
        for bad in (0, -1, 1, Fraction(5, 4)):
            with pytest.raises(ValueError):
                advanced_compose(Fraction(1, 10), 0, 10, bad)

    def test_vacuous_when_worse_than_summing(self):
        # Tiny k with a huge slack requirement makes the sqrt term dominate.
        r = advanced_compose(Fraction(1, 10), 0, 2, Fraction(1, 2**40))
        assert r.epsilon_g > 0.2
        assert r.vacuous


class TestHomogeneousCurve:
    def test_single_mechanism_is_itself(self):
        assert homogeneous_delta_of_epsilon(
            Fraction(1, 2), Fraction(1, 100), 1, Fraction(1, 2)
        ) == pytest.approx(0.01, abs=1e-15)

    def test_two_ln2_mechanisms_at_zero(self):
        # Hand sum: (1/9) * [C(2,1)*(2-2) + C(2,2)*(4-1)] = 1/3.
        d = homogeneous_delta_of_epsilon(LN2, 0, 2, 0)
        assert d == pytest.approx(1 / 3, rel=1e-12)

    def test_empty_sum_beyond_budget(self):
        delta = Fraction(1, 100)
        for k in (1, 3, 7):
            d = homogeneous_delta_of_epsilon(Fraction(1, 10), delta, k, Fraction(k, 10))
            assert d == pytest.approx(float(1 - (1 - delta) ** k), rel=1e-14)

    def test_epsilon_zero_special_case(self):
        d = homogeneous_delta_of_epsilon(0, Fraction(1, 10), 3, Fraction(5, 2))
        assert d == pytest.approx(float(1 - Fraction(9, 10) ** 3), rel=1e-14)

    def test_rejects_negative_epsilon_g(self):
        with pytest.raises(ValueError):
            homogeneous_delta_of_epsilon(Fraction(1, 10), 0, 2, -1)

    def test_optimal_inverts_curve(self):
        r = homogeneous_optimal_epsilon(LN2, 0, 2, Fraction(1, 3))
        assert r.epsilon_g == 0.0
        assert r.bracket == (0.0, 0.0)

    def test_optimal_single_boundary(self):
        r = homogeneous_optimal_epsilon(Fraction(1, 2), Fraction(1, 100), 1, Fraction(1, 100))
        assert r.epsilon_g == 0.5

    def test_k300_beats_basic_and_advanced(self):
        eps, k, dg = Fraction(1, 100), 300, Fraction(1, 2**25)
        r = homogeneous_optimal_epsilon(eps, 0, k, dg)
        assert r.epsilon_g < 3.0
        adv = advanced_compose(eps, 0, k, dg)
        assert r.epsilon_g < adv.epsilon_g

    def test_infeasible_delta(self):
        with pytest.raises(InfeasibleDeltaError) as err:
            homogeneous_optimal_epsilon(Fraction(1, 10), Fraction(1, 10), 3, Fraction(1, 100))
        assert err.value.threshold == 1 - Fraction(9, 10) ** 3


class TestExactHeterogeneous:
    def test_ln2_ln3_delta(self):
        inst = CompositionInstance.from_pairs([LN2, LN3], [0, 0])
        assert exact_delta_of_epsilon(inst, LN3) == pytest.approx(0.25, rel=1e-12)

    def test_all_terms_vanish_beyond_sum(self):
        inst = random_instance(random.Random(3), 5)
        floor = float(inst.delta_threshold)
        assert exact_delta_of_epsilon(inst, inst.eps_sum) == pytest.approx(floor, abs=1e-15)
        assert exact_delta_of_epsilon(inst, inst.eps_sum + 1) == pytest.approx(floor, abs=1e-15)

    def test_matches_homogeneous_formula(self, rng):
        for _ in range(25):
            k = rng.randint(1, 10)
            eps = rand_rational(rng, Fraction(0), Fraction(2))
            dlt = rand_rational(rng, Fraction(0), Fraction(1, 5), denom=10_000)
            eps_g = rand_rational(rng, Fraction(0), k * eps + Fraction(1, 10))
            a = homogeneous_delta_of_epsilon(eps, dlt, k, eps_g)
            b = exact_delta_of_epsilon(CompositionInstance.homogeneous(eps, dlt, k), eps_g)
            assert abs(a - b) <= 1e-9 * max(a, b, 1e-12)

    def test_optimal_inverts_ln2_ln3(self):
        inst = CompositionInstance.from_pairs([LN2, LN3], [0, 0])
        r = exact_optimal_epsilon(inst, Fraction(1, 4))
        assert r.epsilon_g == pytest.approx(math.log(3), abs=1e-12)
        assert r.bracket[0] <= r.epsilon_g <= r.bracket[1]
        assert r.bracket[1] - r.bracket[0] <= 2**-50

    def test_pure_dp_forces_the_sum(self):
        inst = CompositionInstance.from_pairs([Fraction(1, 10)] * 5, [0] * 5)
        r = exact_optimal_epsilon(inst, 0)
        assert r.epsilon_g == float(inst.eps_sum)

    def test_single_mechanism_boundary(self):
        inst = CompositionInstance.from_pairs([Fraction(1, 2)], [Fraction(1, 100)])
        r = exact_optimal_epsilon(inst, Fraction(1, 100))
        assert r.epsilon_g == 0.5

    def test_round_trip_bracket(self, rng):
        for _ in range(10):
            inst = random_instance(rng, rng.randint(1, 8))
            floor = inst.delta_threshold
            dg = floor + (1 - floor) * rand_rational(rng, Fraction(1, 1000), Fraction(1, 2))
            r = exact_optimal_epsilon(inst, dg)
            # The feasible end of the bracket stays within budget; the
            # infeasible end exceeds it (unless the curve was flat at zero).
            assert exact_delta_of_epsilon(inst, Fraction(r.bracket[1])) <= float(dg) + 1e-15
            if r.bracket[0] > 0:
                assert exact_delta_of_epsilon(inst, Fraction(r.bracket[0])) > float(dg) - 1e-15

    def test_monotone_in_epsilon_g(self, rng):
        inst = random_instance(rng, 6)
        points = sorted(rand_rational(rng, Fraction(0), inst.eps_sum) for _ in range(8))
        values = [exact_delta_of_epsilon(inst, p) for p in points]
        assert all(a >= b - 1e-15 for a, b in zip(values, values[1:]))

    def test_monotone_in_delta_g(self, rng):
        inst = random_instance(rng, 5)
        floor = inst.delta_threshold
        deltas = sorted(
            floor + (1 - floor) * rand_rational(rng, Fraction(1, 100), Fraction(9, 10))
            for _ in range(5)
        )
        eps = [exact_optimal_epsilon(inst, d).epsilon_g for d in deltas]
        assert all(a >= b - 1e-12 for a, b in zip(eps, eps[1:]))

    def test_permutation_invariance(self, rng):
        inst = random_instance(rng, 7)
        shuffled = list(inst.params)
        rng.shuffle(shuffled)
        other = CompositionInstance(tuple(shuffled))
        dg = inst.delta_threshold + (1 - inst.delta_threshold) * Fraction(1, 7)
        a = exact_optimal_epsilon(inst, dg).epsilon_g
        b = exact_optimal_epsilon(other, dg).epsilon_g
        assert a == pytest.approx(b, abs=1e-12)

    def test_dominance_vs_basic(self, rng):
        for _ in range(10):
            inst = random_instance(rng, rng.randint(1, 7))
            floor = inst.delta_threshold
            dg = floor + (1 - floor) * Fraction(1, 9)
            assert exact_optimal_epsilon(inst, dg).epsilon_g <= float(inst.eps_sum) + 1e-12

    def test_enumeration_limit(self):
        inst = CompositionInstance.homogeneous(Fraction(1, 10), 0, 26)
        with pytest.raises(EnumerationLimitError):
            exact_optimal_epsilon(inst, Fraction(1, 100))
        with pytest.raises(EnumerationLimitError):
            exact_delta_of_epsilon(inst, Fraction(1, 2))

    def test_infeasible_delta_carries_threshold(self):
        inst = CompositionInstance.from_pairs([1], [Fraction(1, 10)])
        with pytest.raises(InfeasibleDeltaError) as err:
            exact_optimal_epsilon(inst, Fraction(1, 100))
        assert err.value.threshold == Fraction(1, 10)


class TestComposeDocument:
    def test_vacuous_delta_g_above_one(self):
        doc = compose_document(["0.1"], ["0"], delta_g="1.5", method="exact-optimal")
        assert doc["vacuous"] is True
        assert doc["epsilon_g"] == 0.0

    def test_epsilon_target_direction(self):
        doc = compose_document(
            [str(float(LN2)), str(float(LN3))],
            ["0", "0"],
            epsilon_g=str(float(LN3)),
            method="exact-optimal",
        )
        assert doc["delta_g"] == pytest.approx(0.25, rel=1e-12)

    def test_epsilon_target_rejected_for_basic(self):
        with pytest.raises(ValueError):
            compose_document(["0.1"], ["0"], epsilon_g="0.5", method="basic")

    def test_auto_resolves_by_size(self):
        doc = compose_document(["0.1"] * 3, ["0"] * 3, delta_g="0", method="auto")
        assert doc["method"] == "exact-optimal"
        doc = compose_document(
            ["0.1"] * 30, ["0"] * 30, delta_g="1e-9", method="auto", eta="0.1"
        )
        assert doc["method"] == "approx-optimal"

    def test_advanced_requires_homogeneous(self):
        with pytest.raises(ValueError):
            compose_document(
                ["0.1", "0.2"], ["0", "0"], delta_g="0.1", method="advanced"
            )

    def test_advanced_default_slack_is_remaining_budget(self):
        doc = compose_document(
            ["0.1"] * 10, ["0.001"] * 10, delta_g="0.02", method="advanced"
        )
        assert doc["delta_g"] == pytest.approx(0.02)


class TestCrossEngineChecks:
    def test_k300_optimal_cross_checked_by_grid_search(self):
        # Large-k homogeneous value sandwiched by the polynomial-time engine.
        from dpcomp import CompositionInstance, approx_optimal_epsilon

        eps, k, dg = Fraction(1, 100), 300, Fraction(1, 2**25)
        opt = homogeneous_optimal_epsilon(eps, 0, k, dg)
        assert opt.epsilon_g < 3.0
        assert opt.epsilon_g < advanced_compose(eps, 0, k, dg).epsilon_g
        eta = Fraction(1, 1000)
        star = approx_optimal_epsilon(CompositionInstance.homogeneous(eps, 0, k), dg, eta)
        assert opt.bracket[0] <= star.epsilon_star <= opt.epsilon_g + float(eta) + 1e-12

    def test_optimal_dominates_advanced_when_it_applies(self, rng):
        # At delta_g = k*delta + delta_prime the tight bound never loses to
        # the closed form (when the closed form is non-vacuous).
        checked = 0
        while checked < 10:
            k = rng.randint(2, 10)
            eps = rand_rational(rng, Fraction(1, 100), Fraction(1, 2))
            dlt = rand_rational(rng, Fraction(0), Fraction(1, 1000), denom=10**6)
            d_prime = rand_rational(rng, Fraction(1, 10**6), Fraction(1, 100), denom=10**6)
            delta_g = k * dlt + d_prime
            if delta_g >= 1:
                continue
            adv = advanced_compose(eps, dlt, k, d_prime)
            if adv.vacuous:
                continue
            opt = homogeneous_optimal_epsilon(eps, dlt, k, delta_g)
            assert opt.epsilon_g <= adv.epsilon_g + 1e-12
            checked += 1


class TestCompositionInstance:
    def test_aggregates_are_exact(self):
        inst = CompositionInstance.from_pairs(
            [Fraction(1, 3), Fraction(1, 7)], [Fraction(1, 11), Fraction(1, 13)]
        )
        assert inst.eps_sum == Fraction(1, 3) + Fraction(1, 7)
        assert inst.eps_mean * inst.k == inst.eps_sum
        assert inst.delta_survival == Fraction(10, 11) * Fraction(12, 13)
        assert inst.delta_threshold == 1 - inst.delta_survival

    def test_survival_is_one_iff_all_deltas_zero(self):
        pure = CompositionInstance.from_pairs([1, 2], [0, 0])
        assert pure.delta_survival == 1
        mixed = CompositionInstance.from_pairs([1, 2], [0, Fraction(1, 10**9)])
        assert mixed.delta_survival < 1

    def test_validation(self):
        with pytest.raises(ValueError):
            CompositionInstance(())
        with pytest.raises(ValueError):
            CompositionInstance.from_pairs([-1], [0])
        with pytest.raises(ValueError):
            CompositionInstance.from_pairs([1], [1])
        with pytest.raises(ValueError):
            CompositionInstance.from_pairs([1, 2], [0])
        with pytest.raises(ValueError):
            CompositionInstance.homogeneous(1, 0, 0)

    def test_homogeneity_flag(self):
        assert CompositionInstance.homogeneous(Fraction(1, 10), 0, 4).is_homogeneous
        assert not CompositionInstance.from_pairs([1, 2], [0, 0]).is_homogeneous


class TestInversionAgainstOracle:
    def test_bisection_bracket_validated_by_product_enumeration(self, rng):
        # The least-epsilon search must invert the curve that the fully
        # independent product-distribution oracle computes.
        from dpcomp import enumerate_delta

        for _ in range(10):
            inst = random_instance(rng, rng.randint(1, 6))
            floor = inst.delta_threshold
            dg = floor + (1 - floor) * rand_rational(rng, Fraction(1, 100), Fraction(1, 2))
            r = exact_optimal_epsilon(inst, dg)
            assert enumerate_delta(inst, Fraction(r.bracket[1])) <= float(dg) + 1e-12
            if r.bracket[0] > 0:
                assert enumerate_delta(inst, Fraction(r.bracket[0])) >= float(dg) - 1e-12
