"""Shared generators and exact helpers for the test suite."""

from __future__ import annotations

import random
from fractions import Fraction

import gmpy2
import pytest
from gmpy2 import mpfr, mpq

from dpcomp import CompositionInstance
from dpcomp.numerics import as_fraction, to_mpq


def rand_rational(rng: random.Random, lo: Fraction, hi: Fraction, denom: int = 1000) -> Fraction:
    """Uniform rational on [lo, hi] with denominator dividing denom."""
    lo = as_fraction(lo)
    hi = as_fraction(hi)
    steps = int((hi - lo) * denom)
    return lo + Fraction(rng.randint(0, steps), denom) if steps > 0 else lo


def random_instance(
    rng: random.Random,
    k: int,
    eps_hi: Fraction = Fraction(2),
    delta_hi: Fraction = Fraction(1, 5),
) -> CompositionInstance:
    eps = [rand_rational(rng, Fraction(0), eps_hi) for _ in range(k)]
    deltas = [rand_rational(rng, Fraction(0), delta_hi, denom=10_000) for _ in range(k)]
    return CompositionInstance.from_pairs(eps, deltas)


def shifted_delta_down(delta_g: Fraction, eta: Fraction) -> Fraction:
    """Rational lower bound on e^(-eta/2) * delta_g.

    Rounding down only shrinks the failure budget, which makes the upper side
    of the sandwich check conservative (never falsely passing).
    """
    with gmpy2.context(precision=192, round=gmpy2.RoundDown):
        value = mpq(gmpy2.exp(-mpfr(to_mpq(eta)) / 2) * mpfr(to_mpq(delta_g)))
    return as_fraction(value)


def feasible_delta_for_sandwich(
    rng: random.Random, instance: CompositionInstance, eta_max: Fraction = Fraction(3, 10)
) -> Fraction:
    """A delta_g whose shrunk counterpart e^(-eta/2)*delta_g stays feasible.

    Ensures the upper side of the sandwich is a finite quantity; e^(eta/2)
    is bounded above by 1.17 for eta <= 0.3.
    """
    floor = instance.delta_threshold * Fraction(117, 100)
    assert floor < 1, "generator produced deltas too close to 1"
    return floor + (1 - floor) * Fraction(rng.randint(1, 10**4), 10**6)


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240811)
