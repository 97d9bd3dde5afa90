"""Request orchestration shared by the CLI and the HTTP service.

Both surfaces funnel through these functions, so identical requests follow
the same code path and produce identical numeric fields.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence

from .allocate import StatisticSpec, allocate_budget
from .approx import approx_optimal_epsilon
from .composition import (
    advanced_compose,
    basic_compose,
    exact_delta_of_epsilon,
    exact_optimal_epsilon,
    homogeneous_delta_of_epsilon,
    homogeneous_optimal_epsilon,
)
from .numerics import DEFAULT_PRECISION, PrecisionConfig, RationalLike, as_fraction
from .parameters import (
    DEFAULT_ENUMERATION_LIMIT,
    DEFAULT_RR_ENUMERATION_LIMIT,
    METHOD_ADVANCED,
    METHOD_APPROX,
    METHOD_AUTO,
    METHOD_BASIC,
    METHOD_EXACT,
    METHOD_HOMOGENEOUS,
    METHODS,
    CompositionInstance,
    EnumerationLimitError,
    GuaranteeResult,
    InfeasibleDeltaError,
)


@dataclass(frozen=True)
class ComputeOptions:
    precision: PrecisionConfig = DEFAULT_PRECISION
    enumeration_limit: int = DEFAULT_ENUMERATION_LIMIT
    rr_enumeration_limit: int = DEFAULT_RR_ENUMERATION_LIMIT
    max_k_approx: Optional[int] = None


DEFAULT_OPTIONS = ComputeOptions()


def resolve_method(method: str, k: int, enumeration_limit: int) -> str:
    """Map "auto" to exact enumeration below the size cliff, approx above."""
    if method == METHOD_AUTO:
        return METHOD_EXACT if k <= enumeration_limit else METHOD_APPROX
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    return method


def compose_document(
    epsilons: Sequence[RationalLike],
    deltas: Sequence[RationalLike],
    delta_g: Optional[RationalLike] = None,
    epsilon_g: Optional[RationalLike] = None,
    method: str = METHOD_AUTO,
    eta: Optional[RationalLike] = None,
    delta_prime: Optional[RationalLike] = None,
    options: ComputeOptions = DEFAULT_OPTIONS,
) -> dict:
    """Run one composition request and return its JSON-ready document."""
    if (delta_g is None) == (epsilon_g is None):
        raise ValueError("exactly one of delta_g / epsilon_g must be given")
    instance = CompositionInstance.from_pairs(epsilons, deltas)
    resolved = resolve_method(method, instance.k, options.enumeration_limit)
    _enforce_size_caps(resolved, instance.k, options)
    if delta_g is not None:
        result = _compose_for_delta(
            instance, as_fraction(delta_g), resolved, eta, delta_prime, options
        )
    else:
        result = _compose_for_epsilon(
            instance, as_fraction(epsilon_g), resolved, options
        )
    return result.to_dict()


def _compose_for_delta(
    instance: CompositionInstance,
    delta_g: Fraction,
    method: str,
    eta: Optional[RationalLike],
    delta_prime: Optional[RationalLike],
    options: ComputeOptions,
) -> GuaranteeResult:
    if delta_g >= 1:
        # A failure budget of one or more promises nothing; report the trivial
        # guarantee instead of rejecting.
        return GuaranteeResult(
            epsilon_g=0.0,
            delta_g=float(delta_g),
            method=method,
            precision=options.precision,
            vacuous=True,
        )
    if method == METHOD_BASIC:
        return basic_compose(instance, options.precision)
    if method == METHOD_ADVANCED:
        eps, dlt = _require_homogeneous(instance, METHOD_ADVANCED)
        if delta_prime is None:
            delta_prime = delta_g - instance.k * dlt
            if delta_prime <= 0:
                raise InfeasibleDeltaError(instance.k * dlt, delta_g)
        return advanced_compose(
            eps, dlt, instance.k, as_fraction(delta_prime), options.precision
        )
    if method == METHOD_HOMOGENEOUS:
        eps, dlt = _require_homogeneous(instance, METHOD_HOMOGENEOUS)
        return homogeneous_optimal_epsilon(
            eps, dlt, instance.k, delta_g, options.precision
        )
    if method == METHOD_EXACT:
        return exact_optimal_epsilon(
            instance, delta_g, options.precision, options.enumeration_limit
        )
    if eta is None:
        raise ValueError("the approximate method requires eta")
    return approx_optimal_epsilon(
        instance, delta_g, as_fraction(eta), precision=options.precision
    ).guarantee()


def _compose_for_epsilon(
    instance: CompositionInstance,
    epsilon_g: Fraction,
    method: str,
    options: ComputeOptions,
) -> GuaranteeResult:
    if epsilon_g < 0:
        raise ValueError(f"epsilon_g must be >= 0, got {epsilon_g}")
    if method == METHOD_HOMOGENEOUS:
        eps, dlt = _require_homogeneous(instance, METHOD_HOMOGENEOUS)
        delta = homogeneous_delta_of_epsilon(
            eps, dlt, instance.k, epsilon_g, options.precision
        )
    elif method == METHOD_EXACT:
        delta = exact_delta_of_epsilon(
            instance, epsilon_g, options.precision, options.enumeration_limit
        )
    else:
        raise ValueError(
            f"method {method!r} computes delta_g targets only; "
            "give delta_g or use an optimal method"
        )
    return GuaranteeResult(
        epsilon_g=float(epsilon_g),
        delta_g=delta,
        method=method,
        precision=options.precision,
    )


def curve_rows(
    epsilon: RationalLike,
    delta: RationalLike,
    delta_g: RationalLike,
    k_values: Iterable[int],
    methods: Sequence[str],
    eta: Optional[RationalLike] = None,
    delta_prime: Optional[RationalLike] = None,
    options: ComputeOptions = DEFAULT_OPTIONS,
) -> List[dict]:
    """Homogeneous epsilon_g rows per (k, method), k ascending."""
    eps = as_fraction(epsilon)
    dlt = as_fraction(delta)
    dlt_g = as_fraction(delta_g)
    ks = sorted(set(int(k) for k in k_values))
    if not ks or ks[0] < 1:
        raise ValueError("k values must be positive")
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}; expected one of {METHODS}")
    rows = []
    for k in ks:
        for m in methods:
            rows.append(
                {
                    "k": k,
                    "method": m,
                    "epsilon_g": _curve_epsilon(
                        eps, dlt, dlt_g, k, m, eta, delta_prime, options
                    ),
                }
            )
    return rows


def _curve_epsilon(eps, dlt, dlt_g, k, method, eta, delta_prime, options) -> float:
    if method == METHOD_BASIC:
        return float(k * eps)
    if method == METHOD_ADVANCED:
        dp = as_fraction(delta_prime) if delta_prime is not None else dlt_g - k * dlt
        if dp <= 0:
            raise InfeasibleDeltaError(k * dlt, dlt_g)
        return advanced_compose(eps, dlt, k, dp, options.precision).epsilon_g
    if method == METHOD_HOMOGENEOUS:
        return homogeneous_optimal_epsilon(eps, dlt, k, dlt_g, options.precision).epsilon_g
    instance = CompositionInstance.homogeneous(eps, dlt, k)
    _enforce_size_caps(method, k, options)
    if method == METHOD_EXACT:
        return exact_optimal_epsilon(
            instance, dlt_g, options.precision, options.enumeration_limit
        ).epsilon_g
    if eta is None:
        raise ValueError("the approximate method requires eta")
    return approx_optimal_epsilon(
        instance, dlt_g, as_fraction(eta), precision=options.precision
    ).guarantee().epsilon_g


def format_curve_csv(rows: Sequence[dict]) -> str:
    """Fixed 12-significant-digit CSV (header k,method,epsilon_g, LF endings)."""
    lines = ["k,method,epsilon_g"]
    for row in rows:
        lines.append(f"{row['k']},{row['method']},{row['epsilon_g']:.11e}")
    return "\n".join(lines) + "\n"


def allocate_document(
    statistics: Sequence[dict],
    epsilon_g: RationalLike,
    delta_g: RationalLike,
    method: str = METHOD_AUTO,
    eta: Optional[RationalLike] = None,
    options: ComputeOptions = DEFAULT_OPTIONS,
) -> dict:
    """Run one allocation request and return its JSON-ready document."""
    specs = [
        StatisticSpec(
            name=str(s["name"]),
            weight=as_fraction(s["weight"]),
            delta=as_fraction(s.get("delta", 0)),
        )
        for s in statistics
    ]
    resolved = resolve_method(method, len(specs), options.enumeration_limit)
    _enforce_size_caps(resolved, len(specs), options)
    result = allocate_budget(
        specs,
        epsilon_g=as_fraction(epsilon_g),
        delta_g=as_fraction(delta_g),
        method=resolved,
        eta=as_fraction(eta) if eta is not None else None,
        precision=options.precision,
        enumeration_limit=options.enumeration_limit,
    )
    return result.to_dict()


def _enforce_size_caps(method: str, k: int, options: ComputeOptions) -> None:
    if method == METHOD_EXACT and k > options.enumeration_limit:
        raise EnumerationLimitError(k, options.enumeration_limit)
    if (
        method == METHOD_APPROX
        and options.max_k_approx is not None
        and k > options.max_k_approx
    ):
        raise EnumerationLimitError(k, options.max_k_approx, "approximate composition")


def _require_homogeneous(instance: CompositionInstance, method: str):
    if not instance.is_homogeneous:
        raise ValueError(f"method {method!r} requires identical (epsilon, delta) pairs")
    p = instance.params[0]
    return p.epsilon, p.delta
