"""Closed-form and exact composition computations.

Covers basic summing, the sqrt(k ln(1/delta')) closed form, the homogeneous
optimal curve, and the heterogeneous optimal characterization evaluated by
exhaustive subset enumeration. The optimal computations come in both
directions: delta_g as a function of epsilon_g, and the least epsilon_g for a
target delta_g (by bisection over a monotone curve).
"""

from __future__ import annotations

import bisect
import math
from fractions import Fraction
from typing import Callable, Tuple

import gmpy2
from gmpy2 import mpfr, mpq

from .numerics import (
    DEFAULT_PRECISION,
    PrecisionConfig,
    RationalLike,
    as_fraction,
    binomial,
    float_down,
    float_up,
    to_mpq,
)
from .parameters import (
    DEFAULT_ENUMERATION_LIMIT,
    METHOD_ADVANCED,
    METHOD_BASIC,
    METHOD_EXACT,
    METHOD_HOMOGENEOUS,
    CompositionInstance,
    EnumerationLimitError,
    GuaranteeResult,
    InfeasibleDeltaError,
)


def basic_compose(
    instance: CompositionInstance,
    precision: PrecisionConfig = DEFAULT_PRECISION,
) -> GuaranteeResult:
    """Summing composition: (sum eps_i, sum delta_i).

    The natural heterogeneous extension of the homogeneous (k*eps, k*delta)
    statement. A delta_g >= 1 is reported as-is but flagged vacuous.
    """
    eps = instance.eps_sum
    delta = sum((p.delta for p in instance.params), Fraction(0))
    return GuaranteeResult(
        epsilon_g=float(eps),
        delta_g=float(delta),
        method=METHOD_BASIC,
        precision=precision,
        vacuous=delta >= 1,
    )


def advanced_compose(
    epsilon: RationalLike,
    delta: RationalLike,
    k: int,
    delta_prime: RationalLike,
    precision: PrecisionConfig = DEFAULT_PRECISION,
) -> GuaranteeResult:
    """Homogeneous closed form: sqrt(2k ln(1/d')) * eps + k*eps*(e^eps - 1).

    delta_g is k*delta + delta_prime. Flagged vacuous when the bound is
    worse than plain summing (epsilon_g > k*eps) or delta_g >= 1.
    """
    epsilon = as_fraction(epsilon)
    delta = as_fraction(delta)
    delta_prime = as_fraction(delta_prime)
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if epsilon < 0:
        raise ValueError(f"epsilon must be >= 0, got {epsilon}")
    if not 0 <= delta < 1:
        raise ValueError(f"delta must be in [0, 1), got {delta}")
    if not 0 < delta_prime < 1:
        raise ValueError(f"delta_prime must be in (0, 1), got {delta_prime}")
    with precision.context():
        eps = mpfr(to_mpq(epsilon))
        dp = mpfr(to_mpq(delta_prime))
        eps_g = gmpy2.sqrt(2 * k * gmpy2.log(1 / dp)) * eps + k * eps * gmpy2.expm1(eps)
    delta_g = k * delta + delta_prime
    return GuaranteeResult(
        epsilon_g=float(eps_g),
        delta_g=float(delta_g),
        method=METHOD_ADVANCED,
        precision=precision,
        vacuous=bool(eps_g > k * to_mpq(epsilon)) or delta_g >= 1,
    )


class HomogeneousCurve:
    """delta_g as a function of epsilon_g for k identical (eps, delta) mechanisms.

    Precomputes the power and binomial tables once so a binary search can
    evaluate the curve many times cheaply.
    """

    def __init__(
        self,
        epsilon: Fraction,
        delta: Fraction,
        k: int,
        precision: PrecisionConfig = DEFAULT_PRECISION,
    ):
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        if epsilon < 0:
            raise ValueError(f"epsilon must be >= 0, got {epsilon}")
        if not 0 <= delta < 1:
            raise ValueError(f"delta must be in [0, 1), got {delta}")
        self.epsilon = epsilon
        self.delta = delta
        self.k = k
        self.precision = precision
        self._survival = (1 - delta) ** k
        with precision.context():
            x = gmpy2.exp(mpfr(to_mpq(epsilon)))
            powers = [mpfr(1)]
            for _ in range(k):
                powers.append(powers[-1] * x)
            self._powers = powers
            self._denom = (1 + x) ** k
            self._surv_f = mpfr(to_mpq(self._survival))
            self._combs = [mpfr(binomial(k, l)) for l in range(k + 1)]

    @property
    def delta_floor(self) -> Fraction:
        return 1 - self._survival

    def delta_of(self, epsilon_g: RationalLike) -> mpfr:
        eps_g = as_fraction(epsilon_g)
        if eps_g < 0:
            raise ValueError(f"epsilon_g must be >= 0, got {eps_g}")
        k = self.k
        with self.precision.context():
            floor = 1 - self._surv_f
            if self.epsilon == 0:
                # Every mechanism is (0, delta)-DP; the binomial sum vanishes
                # for all epsilon_g >= 0.
                return floor
            l_start = math.ceil((eps_g + k * self.epsilon) / (2 * self.epsilon))
            if l_start > k:
                return floor
            l_start = max(l_start, 0)
            e_g = gmpy2.exp(mpfr(to_mpq(eps_g)))
            total = mpfr(0)
            for l in range(l_start, k + 1):
                term = self._powers[l] - e_g * self._powers[k - l]
                if term > 0:
                    total += self._combs[l] * term
            delta_g = floor + self._surv_f * total / self._denom
            return _clamp_unit(delta_g)


def homogeneous_delta_of_epsilon(
    epsilon: RationalLike,
    delta: RationalLike,
    k: int,
    epsilon_g: RationalLike,
    precision: PrecisionConfig = DEFAULT_PRECISION,
) -> float:
    """Smallest delta_g for which k copies of (eps, delta) compose to epsilon_g."""
    curve = HomogeneousCurve(as_fraction(epsilon), as_fraction(delta), k, precision)
    return float(curve.delta_of(epsilon_g))


def homogeneous_optimal_epsilon(
    epsilon: RationalLike,
    delta: RationalLike,
    k: int,
    delta_g: RationalLike,
    precision: PrecisionConfig = DEFAULT_PRECISION,
) -> GuaranteeResult:
    """Least epsilon_g composing k copies of (eps, delta) within delta_g."""
    epsilon = as_fraction(epsilon)
    delta_g = as_fraction(delta_g)
    curve = HomogeneousCurve(epsilon, as_fraction(delta), k, precision)
    if not 0 <= delta_g < 1:
        raise ValueError(f"delta_g must be in [0, 1), got {delta_g}")
    if delta_g < curve.delta_floor:
        raise InfeasibleDeltaError(curve.delta_floor, delta_g)
    if delta_g == curve.delta_floor:
        return _boundary_result(k * epsilon, delta_g, METHOD_HOMOGENEOUS, precision)
    lo, hi = _bisect_least_epsilon(
        curve.delta_of, delta_g, k * epsilon, precision.target_resolution
    )
    return _bracket_result(lo, hi, delta_g, METHOD_HOMOGENEOUS, precision)


class SubsetScan:
    """Evaluator for the heterogeneous optimal curve delta_g(epsilon_g).

    The 2^k subset sum is organized meet-in-the-middle: products over one half
    of the mechanisms are sorted once with suffix-sum tables, so each curve
    evaluation costs O(2^(k/2) log) instead of O(2^k). Every subset product is
    formed from at most k multiplications, which keeps rounding error flat in
    the enumeration size.
    """

    def __init__(
        self,
        instance: CompositionInstance,
        precision: PrecisionConfig = DEFAULT_PRECISION,
        enumeration_limit: int = DEFAULT_ENUMERATION_LIMIT,
    ):
        if instance.k > enumeration_limit:
            raise EnumerationLimitError(instance.k, enumeration_limit)
        self.instance = instance
        self.precision = precision
        with precision.context():
            xs = [gmpy2.exp(mpfr(to_mpq(p.epsilon))) for p in instance.params]
            product_all = mpfr(1)
            normalizer = mpfr(1)
            for x in xs:
                product_all *= x
                normalizer *= 1 + x
            self._product_all = product_all
            self._normalizer = normalizer
            low_count = instance.k // 2
            self._lows = _subset_products(xs[:low_count])
            self._highs = _subset_products(xs[low_count:])
            self._lows.sort()
            n = len(self._lows)
            suffix_p = [mpfr(0)] * (n + 1)
            suffix_q = [mpfr(0)] * (n + 1)
            for j in range(n - 1, -1, -1):
                suffix_p[j] = suffix_p[j + 1] + self._lows[j]
                suffix_q[j] = suffix_q[j + 1] + 1 / self._lows[j]
            self._suffix_p = suffix_p
            self._suffix_q = suffix_q
            self._survival_f = mpfr(to_mpq(instance.delta_survival))

    def delta_of(self, epsilon_g: RationalLike) -> mpfr:
        eps_g = as_fraction(epsilon_g)
        if eps_g < 0:
            raise ValueError(f"epsilon_g must be >= 0, got {eps_g}")
        lows = self._lows
        n = len(lows)
        with self.precision.context():
            e_g = gmpy2.exp(mpfr(to_mpq(eps_g)))
            scaled = e_g * self._product_all
            # A subset term prod_S - e_g * (X / prod_S) is positive exactly
            # when prod_S exceeds sqrt(e_g * X).
            tau = gmpy2.sqrt(scaled)
            total = mpfr(0)
            for ph in self._highs:
                j = bisect.bisect_right(lows, tau / ph)
                if j < n:
                    total += ph * self._suffix_p[j] - (scaled / ph) * self._suffix_q[j]
            if total < 0:
                total = mpfr(0)
            floor = 1 - self._survival_f
            delta_g = floor + (self._survival_f / self._normalizer) * total
            return _clamp_unit(delta_g)


def exact_delta_of_epsilon(
    instance: CompositionInstance,
    epsilon_g: RationalLike,
    precision: PrecisionConfig = DEFAULT_PRECISION,
    enumeration_limit: int = DEFAULT_ENUMERATION_LIMIT,
) -> float:
    """Smallest delta_g at which the composition satisfies epsilon_g.

    Exhaustive over all 2^k mechanism subsets; use the approximation engine
    beyond the enumeration limit.
    """
    scan = SubsetScan(instance, precision, enumeration_limit)
    return float(scan.delta_of(epsilon_g))


def exact_optimal_epsilon(
    instance: CompositionInstance,
    delta_g: RationalLike,
    precision: PrecisionConfig = DEFAULT_PRECISION,
    enumeration_limit: int = DEFAULT_ENUMERATION_LIMIT,
) -> GuaranteeResult:
    """Least epsilon_g composing the instance within delta_g (exhaustive)."""
    delta_g = as_fraction(delta_g)
    instance.check_feasible(delta_g)
    if delta_g == instance.delta_threshold:
        # At the feasibility boundary the subset sum must vanish entirely,
        # which first happens at epsilon_g = sum(eps_i).
        return _boundary_result(instance.eps_sum, delta_g, METHOD_EXACT, precision)
    scan = SubsetScan(instance, precision, enumeration_limit)
    lo, hi = _bisect_least_epsilon(
        scan.delta_of, delta_g, instance.eps_sum, precision.target_resolution
    )
    return _bracket_result(lo, hi, delta_g, METHOD_EXACT, precision)


def _subset_products(xs) -> list:
    """All subset products of xs, each built by direct multiplication."""
    products = [mpfr(1)]
    for x in xs:
        products.extend([p * x for p in products])
    return products


def _bisect_least_epsilon(
    delta_of: Callable[[Fraction], mpfr],
    delta_g: Fraction,
    hi: RationalLike,
    resolution: Fraction,
) -> Tuple[Fraction, Fraction]:
    """Bracket the least feasible epsilon_g of a non-increasing delta curve.

    Returns (lo, hi) with hi feasible, lo infeasible (or both zero when the
    curve is feasible already at zero), and hi - lo < resolution.
    """
    target = to_mpq(delta_g)
    zero = Fraction(0)
    if delta_of(zero) <= target:
        return zero, zero
    lo = zero
    hi = as_fraction(hi)
    while hi - lo > resolution:
        mid = (lo + hi) / 2
        if delta_of(mid) <= target:
            hi = mid
        else:
            lo = mid
    return lo, hi


def _bracket_result(
    lo: Fraction,
    hi: Fraction,
    delta_g: Fraction,
    method: str,
    precision: PrecisionConfig,
) -> GuaranteeResult:
    return GuaranteeResult(
        epsilon_g=float(hi),
        delta_g=float(delta_g),
        method=method,
        bracket=(float_down(lo), float_up(hi)),
        precision=precision,
    )


def _boundary_result(
    eps: Fraction,
    delta_g: Fraction,
    method: str,
    precision: PrecisionConfig,
) -> GuaranteeResult:
    return GuaranteeResult(
        epsilon_g=float(eps),
        delta_g=float(delta_g),
        method=method,
        bracket=(float_down(eps), float_up(eps)),
        precision=precision,
    )


def _clamp_unit(value: mpfr) -> mpfr:
    if value < 0:
        return mpfr(0)
    if value > 1:
        return mpfr(1)
    return value
