"""Distribute a global privacy budget across weighted statistics.

Scales per-statistic epsilons proportionally to their weights and finds the
largest scale whose composition still fits inside the requested global
(epsilon_g, delta_g) under the chosen composition method. The search is
one-dimensional and monotone: a larger scale always composes to a larger
global epsilon.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Tuple

from gmpy2 import mpq

from .approx import approx_optimal_epsilon
from .composition import (
    HomogeneousCurve,
    SubsetScan,
    basic_compose,
    exact_optimal_epsilon,
    homogeneous_optimal_epsilon,
)
from .numerics import (
    DEFAULT_PRECISION,
    PrecisionConfig,
    RationalLike,
    as_fraction,
    to_mpq,
)
from .parameters import (
    DEFAULT_ENUMERATION_LIMIT,
    METHOD_APPROX,
    METHOD_AUTO,
    METHOD_BASIC,
    METHOD_EXACT,
    METHOD_HOMOGENEOUS,
    CompositionInstance,
    GuaranteeResult,
    InfeasibleDeltaError,
    ZeroBudgetError,
)

_DOUBLING_CAP = 80


@dataclass(frozen=True)
class StatisticSpec:
    """One statistic: a name, a relative importance weight, and its delta."""

    name: str
    weight: Fraction
    delta: Fraction

    def __post_init__(self):
        object.__setattr__(self, "weight", as_fraction(self.weight))
        object.__setattr__(self, "delta", as_fraction(self.delta))
        if self.weight <= 0:
            raise ValueError(f"weight must be positive, got {self.weight}")
        if not 0 <= self.delta < 1:
            raise ValueError(f"delta must be in [0, 1), got {self.delta}")


@dataclass(frozen=True)
class AllocatedStatistic:
    name: str
    epsilon: float
    epsilon_exact: Fraction
    delta: Fraction


@dataclass(frozen=True)
class AllocationResult:
    statistics: Tuple[AllocatedStatistic, ...]
    scale: float
    scale_exact: Fraction
    realized: GuaranteeResult
    requested_epsilon_g: float
    requested_delta_g: float
    method: str

    def to_dict(self) -> dict:
        return {
            "statistics": [
                {"name": s.name, "epsilon": s.epsilon, "delta": float(s.delta)}
                for s in self.statistics
            ],
            "scale": self.scale,
            "realized": self.realized.to_dict(),
            "requested": {
                "epsilon_g": self.requested_epsilon_g,
                "delta_g": self.requested_delta_g,
            },
            "method": self.method,
        }


def allocate_budget(
    statistics: Sequence[StatisticSpec],
    epsilon_g: RationalLike,
    delta_g: RationalLike,
    method: str = METHOD_AUTO,
    eta: Optional[RationalLike] = None,
    precision: PrecisionConfig = DEFAULT_PRECISION,
    enumeration_limit: int = DEFAULT_ENUMERATION_LIMIT,
) -> AllocationResult:
    """Largest proportional epsilon allocation fitting the global budget."""
    stats = list(statistics)
    if not stats:
        raise ValueError("at least one statistic is required")
    eps_g = as_fraction(epsilon_g)
    dlt_g = as_fraction(delta_g)
    if eps_g < 0:
        raise ValueError(f"epsilon_g must be >= 0, got {eps_g}")
    if not 0 <= dlt_g < 1:
        raise ValueError(f"delta_g must be in [0, 1), got {dlt_g}")
    weights = [s.weight for s in stats]
    deltas = [s.delta for s in stats]
    k = len(stats)
    method = _resolve_method(method, k, enumeration_limit)
    threshold = _method_delta_floor(method, deltas)
    if dlt_g < threshold:
        raise InfeasibleDeltaError(threshold, dlt_g)
    if eps_g == 0:
        raise ZeroBudgetError(
            "epsilon_g = 0 forces every allocation to zero; nothing to distribute"
        )
    if method == METHOD_APPROX and eta is None:
        raise ValueError("the approximate method requires eta")
    eta_q = as_fraction(eta) if eta is not None else None

    weight_sum = sum(weights, Fraction(0))
    boundary = dlt_g == 1 - _survival(deltas)
    if method == METHOD_BASIC or (boundary and method != METHOD_APPROX):
        # Pure budget split: at the feasibility floor the composed epsilon is
        # exactly scale * sum(w). Not valid for the approximate method, whose
        # reported value overshoots the sum by up to eta.
        scale = eps_g / weight_sum
    else:
        predicate = _FitPredicate(
            method, weights, deltas, eps_g, dlt_g, eta_q, precision, enumeration_limit
        )
        scale = _largest_feasible_scale(predicate, eps_g / weight_sum)
    instance = _scaled_instance(weights, deltas, scale)
    realized = _compose_realized(
        method, instance, dlt_g, eta_q, precision, enumeration_limit
    )
    allocated = tuple(
        AllocatedStatistic(
            name=s.name,
            epsilon=float(scale * s.weight),
            epsilon_exact=scale * s.weight,
            delta=s.delta,
        )
        for s in stats
    )
    return AllocationResult(
        statistics=allocated,
        scale=float(scale),
        scale_exact=scale,
        realized=realized,
        requested_epsilon_g=float(eps_g),
        requested_delta_g=float(dlt_g),
        method=method,
    )


class _FitPredicate:
    """Monotone test: does scale s compose within (epsilon_g, delta_g)?"""

    def __init__(self, method, weights, deltas, eps_g, dlt_g, eta, precision, limit):
        self.method = method
        self.weights = weights
        self.deltas = deltas
        self.eps_g = eps_g
        self.dlt_g = to_mpq(dlt_g)
        self.dlt_g_q = as_fraction(dlt_g)
        self.eta = eta
        self.precision = precision
        self.limit = limit
        if method == METHOD_HOMOGENEOUS:
            if len(set(weights)) != 1 or len(set(deltas)) != 1:
                raise ValueError(
                    "the homogeneous method needs identical weights and deltas"
                )

    def __call__(self, scale: Fraction) -> bool:
        instance = _scaled_instance(self.weights, self.deltas, scale)
        if self.method == METHOD_EXACT:
            scan = SubsetScan(instance, self.precision, self.limit)
            return scan.delta_of(self.eps_g) <= self.dlt_g
        if self.method == METHOD_HOMOGENEOUS:
            curve = HomogeneousCurve(
                instance.params[0].epsilon,
                instance.params[0].delta,
                instance.k,
                self.precision,
            )
            return curve.delta_of(self.eps_g) <= self.dlt_g
        result = approx_optimal_epsilon(
            instance, self.dlt_g_q, self.eta, precision=self.precision
        )
        return result.epsilon_star_exact <= self.eps_g


def _largest_feasible_scale(predicate, start: Fraction) -> Fraction:
    """Bisect the monotone predicate for its largest feasible scale.

    ``predicate`` is true for all sufficiently small positive scales and
    false beyond some point; the returned scale is feasible and within a
    relative 2^-53 of the flip point.
    """
    lo = None
    hi = None
    probe = start
    if predicate(probe):
        lo = probe
        for _ in range(_DOUBLING_CAP):
            probe *= 2
            if predicate(probe):
                lo = probe
            else:
                hi = probe
                break
        if hi is None:
            raise ValueError("allocation scale diverged; budget appears unbounded")
    else:
        hi = probe
        for _ in range(_DOUBLING_CAP):
            probe /= 2
            if predicate(probe):
                lo = probe
                break
            hi = probe
        if lo is None:
            raise ValueError(
                "no feasible scale found; for the approximate method eta may be "
                "too coarse for a delta_g this close to its floor"
            )
    resolution = hi / 2**53
    while hi - lo > resolution:
        mid = (lo + hi) / 2
        if predicate(mid):
            lo = mid
        else:
            hi = mid
    return lo


def _scaled_instance(weights, deltas, scale: Fraction) -> CompositionInstance:
    return CompositionInstance.from_pairs(
        [scale * w for w in weights], deltas
    )


def _survival(deltas) -> Fraction:
    s = Fraction(1)
    for d in deltas:
        s *= 1 - d
    return s


def _method_delta_floor(method: str, deltas) -> Fraction:
    if method == METHOD_BASIC:
        return sum(deltas, Fraction(0))
    return 1 - _survival(deltas)


def _resolve_method(method: str, k: int, enumeration_limit: int) -> str:
    if method == METHOD_AUTO:
        return METHOD_EXACT if k <= enumeration_limit else METHOD_APPROX
    if method in (METHOD_BASIC, METHOD_EXACT, METHOD_APPROX, METHOD_HOMOGENEOUS):
        return method
    raise ValueError(f"method {method!r} cannot drive an allocation")


def _compose_realized(
    method, instance, delta_g, eta, precision, enumeration_limit
) -> GuaranteeResult:
    if method == METHOD_BASIC:
        return basic_compose(instance, precision)
    if method == METHOD_HOMOGENEOUS:
        p = instance.params[0]
        return homogeneous_optimal_epsilon(
            p.epsilon, p.delta, instance.k, delta_g, precision
        )
    if method == METHOD_EXACT:
        return exact_optimal_epsilon(instance, delta_g, precision, enumeration_limit)
    return approx_optimal_epsilon(
        instance, delta_g, eta, precision=precision
    ).guarantee()
