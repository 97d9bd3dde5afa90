"""Domain types for privacy parameters, composition instances and results."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Tuple

from .numerics import DEFAULT_PRECISION, PrecisionConfig, RationalLike, as_fraction

METHOD_BASIC = "basic"
METHOD_ADVANCED = "advanced"
METHOD_HOMOGENEOUS = "homogeneous-optimal"
METHOD_EXACT = "exact-optimal"
METHOD_APPROX = "approx-optimal"
METHOD_AUTO = "auto"

METHODS = (
    METHOD_BASIC,
    METHOD_ADVANCED,
    METHOD_HOMOGENEOUS,
    METHOD_EXACT,
    METHOD_APPROX,
)

DEFAULT_ENUMERATION_LIMIT = 25
DEFAULT_RR_ENUMERATION_LIMIT = 10


class DpcompError(Exception):
    """Base class for accountant errors."""


class InfeasibleDeltaError(DpcompError):
    """No finite epsilon_g exists: delta_g is below 1 - prod(1 - delta_i)."""

    def __init__(self, threshold: Fraction, delta_g: Fraction | None = None):
        self.threshold = threshold
        self.delta_g = delta_g
        msg = f"delta_g is below the feasibility threshold {float(threshold)!r}"
        if delta_g is not None:
            msg += f" (got {float(delta_g)!r})"
        super().__init__(msg)


class EnumerationLimitError(DpcompError):
    """The requested exhaustive computation exceeds the configured size cap."""

    def __init__(self, k: int, limit: int, what: str = "subset enumeration"):
        self.k = k
        self.limit = limit
        super().__init__(f"{what} supports k <= {limit}, got k = {k}")


class ZeroBudgetError(DpcompError):
    """A zero epsilon budget forces every allocation to zero."""


class ApproxSizeError(DpcompError):
    """The knapsack table for the requested accuracy would be too large."""


@dataclass(frozen=True)
class PrivacyParams:
    """One mechanism's (epsilon, delta) guarantee, stored as exact rationals."""

    epsilon: Fraction
    delta: Fraction

    def __post_init__(self):
        object.__setattr__(self, "epsilon", as_fraction(self.epsilon))
        object.__setattr__(self, "delta", as_fraction(self.delta))
        if self.epsilon < 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")
        if not 0 <= self.delta < 1:
            raise ValueError(f"delta must be in [0, 1), got {self.delta}")

    @classmethod
    def of(cls, epsilon: RationalLike, delta: RationalLike = 0) -> "PrivacyParams":
        return cls(as_fraction(epsilon), as_fraction(delta))


@dataclass(frozen=True)
class CompositionInstance:
    """An ordered list of per-mechanism guarantees plus cached aggregates."""

    params: Tuple[PrivacyParams, ...]
    eps_sum: Fraction = field(init=False)
    delta_survival: Fraction = field(init=False)
    eps_mean: Fraction = field(init=False)

    def __post_init__(self):
        params = tuple(self.params)
        if not params:
            raise ValueError("a composition needs at least one mechanism")
        object.__setattr__(self, "params", params)
        eps_sum = sum((p.epsilon for p in params), Fraction(0))
        survival = Fraction(1)
        for p in params:
            survival *= 1 - p.delta
        object.__setattr__(self, "eps_sum", eps_sum)
        object.__setattr__(self, "delta_survival", survival)
        object.__setattr__(self, "eps_mean", eps_sum / len(params))

    @classmethod
    def from_pairs(
        cls,
        epsilons: Iterable[RationalLike],
        deltas: Iterable[RationalLike],
    ) -> "CompositionInstance":
        eps = [as_fraction(e) for e in epsilons]
        del_ = [as_fraction(d) for d in deltas]
        if len(eps) != len(del_):
            raise ValueError(
                f"epsilon list has {len(eps)} entries but delta list has {len(del_)}"
            )
        return cls(tuple(PrivacyParams(e, d) for e, d in zip(eps, del_)))

    @classmethod
    def homogeneous(
        cls, epsilon: RationalLike, delta: RationalLike, k: int
    ) -> "CompositionInstance":
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        p = PrivacyParams.of(epsilon, delta)
        return cls((p,) * k)

    @property
    def k(self) -> int:
        return len(self.params)

    @property
    def epsilons(self) -> Tuple[Fraction, ...]:
        return tuple(p.epsilon for p in self.params)

    @property
    def deltas(self) -> Tuple[Fraction, ...]:
        return tuple(p.delta for p in self.params)

    @property
    def delta_threshold(self) -> Fraction:
        """Feasibility floor: delta_g below 1 - prod(1 - delta_i) is unreachable."""
        return 1 - self.delta_survival

    @property
    def is_homogeneous(self) -> bool:
        first = self.params[0]
        return all(p == first for p in self.params[1:])

    def check_feasible(self, delta_g: Fraction) -> None:
        if not 0 <= delta_g < 1:
            raise ValueError(f"delta_g must be in [0, 1), got {delta_g}")
        if delta_g < self.delta_threshold:
            raise InfeasibleDeltaError(self.delta_threshold, delta_g)


@dataclass(frozen=True)
class GuaranteeResult:
    """A computed global (epsilon_g, delta_g) guarantee."""

    epsilon_g: float
    delta_g: float
    method: str
    bracket: Optional[Tuple[float, float]] = None
    precision: PrecisionConfig = DEFAULT_PRECISION
    vacuous: bool = False

    def to_dict(self) -> dict:
        bracket = None
        if self.bracket is not None:
            bracket = {"lower": self.bracket[0], "upper": self.bracket[1]}
        return {
            "epsilon_g": self.epsilon_g,
            "delta_g": self.delta_g,
            "method": self.method,
            "bracket": bracket,
            "vacuous": self.vacuous,
            "precision_bits": self.precision.precision_bits,
        }
