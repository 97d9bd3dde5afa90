"""First-principles verification oracle.

Builds the four-outcome randomized-response mechanism that is worst case for
composition, enumerates its k-fold product distribution over {0,1,2,3}^k, and
recomputes delta_g(epsilon_g) directly from the definition of differential
privacy. This path shares no code with the subset-sum engines, so agreement
between the two is evidence for the characterization itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Tuple

import numpy as np
from numpy.random import Generator, Philox

from .numerics import RationalLike, as_fraction
from .parameters import (
    DEFAULT_RR_ENUMERATION_LIMIT,
    CompositionInstance,
    EnumerationLimitError,
)


@dataclass(frozen=True)
class RRDistribution:
    """Both outcome rows of the worst-case mechanism for one (eps, delta).

    ``pmf0``/``pmf1`` are the distributions on inputs 0 and 1; ``alpha`` is
    the non-failure mass 1 - delta shared by the two middle outcomes.
    """

    epsilon: Fraction
    delta: Fraction
    pmf0: Tuple[float, float, float, float] = field(init=False)
    pmf1: Tuple[float, float, float, float] = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "epsilon", as_fraction(self.epsilon))
        object.__setattr__(self, "delta", as_fraction(self.delta))
        object.__setattr__(self, "pmf0", rr_pmf(0, self.epsilon, self.delta))
        object.__setattr__(self, "pmf1", rr_pmf(1, self.epsilon, self.delta))

    @property
    def alpha(self) -> Fraction:
        return 1 - self.delta


def rr_pmf(bit: int, epsilon: RationalLike, delta: RationalLike) -> Tuple[float, float, float, float]:
    """Outcome probabilities of the worst-case mechanism on input ``bit``.

    On input 0: (delta, a*e^eps/(1+e^eps), a/(1+e^eps), 0) with a = 1-delta;
    input 1 mirrors the middle entries and moves the point mass to outcome 3.
    """
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit}")
    eps = float(as_fraction(epsilon))
    dlt = float(as_fraction(delta))
    if eps < 0:
        raise ValueError(f"epsilon must be >= 0, got {eps}")
    if not 0 <= dlt < 1:
        raise ValueError(f"delta must be in [0, 1), got {dlt}")
    alpha = 1.0 - dlt
    # e^eps/(1+e^eps) evaluated as a logistic keeps both entries in [0, 1]
    # without overflow for any eps.
    hi = alpha / (1.0 + math.exp(-eps))
    lo = alpha / (1.0 + math.exp(eps))
    if bit == 0:
        return (dlt, hi, lo, 0.0)
    return (0.0, lo, hi, dlt)


def rr_samples(
    bit: int,
    epsilon: RationalLike,
    delta: RationalLike,
    n: int,
    seed: int,
) -> np.ndarray:
    """n outcomes of the mechanism, deterministic per (seed, draw index).

    The stream is generated by the counter-based Philox generator keyed on
    ``seed``: the i-th draw is a fixed function of (seed, i) on every
    platform, which is the reproducibility contract.
    """
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    pmf = rr_pmf(bit, epsilon, delta)
    cut = np.cumsum(pmf[:3])
    uniforms = Generator(Philox(key=seed)).random(n)
    return np.searchsorted(cut, uniforms, side="right").astype(np.int64)


def rr_sample(
    bit: int,
    epsilon: RationalLike,
    delta: RationalLike,
    seed: int,
    index: int = 0,
) -> int:
    """The index-th outcome of the seed's sample stream (see rr_samples)."""
    if index < 0:
        raise ValueError(f"index must be >= 0, got {index}")
    return int(rr_samples(bit, epsilon, delta, index + 1, seed)[index])


def enumerate_delta(
    instance: CompositionInstance,
    epsilon_g: RationalLike,
    enumeration_limit: int = DEFAULT_RR_ENUMERATION_LIMIT,
) -> float:
    """delta_g(epsilon_g) summed outcome by outcome over {0,1,2,3}^k.

    Builds the product distributions P0, P1 of the composed worst-case
    mechanisms and returns sum_x max(P0(x) - e^(eps_g) P1(x), 0). Outcomes
    where P1 vanishes but P0 does not contribute their full mass.
    """
    eps_g = as_fraction(epsilon_g)
    if eps_g < 0:
        raise ValueError(f"epsilon_g must be >= 0, got {eps_g}")
    if instance.k > enumeration_limit:
        raise EnumerationLimitError(
            instance.k, enumeration_limit, "outcome enumeration"
        )
    p0 = reduce(
        _product_pmf,
        (np.array(rr_pmf(0, p.epsilon, p.delta)) for p in instance.params),
    )
    p1 = reduce(
        _product_pmf,
        (np.array(rr_pmf(1, p.epsilon, p.delta)) for p in instance.params),
    )
    scale = math.exp(float(eps_g))
    return float(np.maximum(p0 - scale * p1, 0.0).sum())


def _product_pmf(acc: np.ndarray, pmf: np.ndarray) -> np.ndarray:
    return np.multiply.outer(acc, pmf).ravel()
