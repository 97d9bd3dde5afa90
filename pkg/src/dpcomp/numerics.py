"""Precision-controlled scalar primitives shared by the composition engines.

Every floating-point policy decision lives here: working precision, rounding
direction, the log-domain conventions, and the exact-rational helpers used to
keep one-sided guarantees sound. All multi-precision arithmetic is backed by
MPFR through gmpy2; rationals are ``fractions.Fraction`` at API boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import gmpy2
from gmpy2 import mpfr, mpq

RationalLike = Union[Fraction, int, float, str, mpq]

ROUND_NEAREST = "nearest"
ROUND_UP = "toward_plus_infinity"
ROUND_DOWN = "toward_minus_infinity"

_GMPY_ROUNDING = {
    ROUND_NEAREST: gmpy2.RoundToNearest,
    ROUND_UP: gmpy2.RoundUp,
    ROUND_DOWN: gmpy2.RoundDown,
}

#: Log-domain sentinel for an exact zero (empty max term). Composes correctly
#: through log-sum-exp accumulation, unlike a signed zero.
NEG_INF = mpfr("-inf")


@dataclass(frozen=True)
class PrecisionConfig:
    """Working precision for one computation.

    ``precision_bits`` is the mantissa width used internally; ``target_bits``
    is the requested precision of reported results (binary searches stop when
    the bracket is narrower than ``2**-target_bits``). The 32 guard bits keep
    intermediate rounding from contaminating the reported digits.
    """

    precision_bits: int = 128
    target_bits: int = 53
    rounding_mode: str = ROUND_NEAREST

    def __post_init__(self):
        if self.target_bits < 1:
            raise ValueError("target_bits must be >= 1")
        if self.precision_bits < self.target_bits + 32:
            raise ValueError(
                "precision_bits must be at least target_bits + 32 "
                f"(got {self.precision_bits} for target {self.target_bits})"
            )
        if self.rounding_mode not in _GMPY_ROUNDING:
            raise ValueError(f"unknown rounding_mode {self.rounding_mode!r}")

    def context(self) -> gmpy2.context:
        """A fresh gmpy2 context enforcing this configuration."""
        return gmpy2.context(
            precision=self.precision_bits,
            round=_GMPY_ROUNDING[self.rounding_mode],
        )

    @property
    def target_resolution(self) -> Fraction:
        return Fraction(1, 2**self.target_bits)


DEFAULT_PRECISION = PrecisionConfig()


def as_fraction(value: RationalLike) -> Fraction:
    """Parse a rational input exactly.

    Accepts Fractions, ints, gmpy2.mpq, decimal/scientific strings
    (e.g. ``"0.005"``, ``"1e-9"``) and floats (converted exactly, since every
    finite float is a dyadic rational).
    """
    if isinstance(value, Fraction):
        # Normalize mpz internals (left by gmpy2 round-trips) back to int.
        if type(value.numerator) is int and type(value.denominator) is int:
            return value
        return Fraction(int(value.numerator), int(value.denominator))
    if isinstance(value, (int, str)):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite value {value!r} is not rational")
        return Fraction(value)
    if isinstance(value, mpq):
        return Fraction(int(value.numerator), int(value.denominator))
    if isinstance(value, mpfr):
        if not gmpy2.is_finite(value):
            raise ValueError(f"non-finite value {value!r} is not rational")
        q = mpq(value)
        return Fraction(int(q.numerator), int(q.denominator))
    raise TypeError(f"cannot interpret {value!r} as a rational")


def to_mpq(value: RationalLike) -> mpq:
    """Exact conversion to gmpy2.mpq (robust to mpz-backed Fractions)."""
    if isinstance(value, mpq):
        return value
    if isinstance(value, mpfr):
        if not gmpy2.is_finite(value):
            raise ValueError(f"non-finite value {value!r} is not rational")
        return mpq(value)
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    return mpq(as_fraction(value))


def float_rounded(value, mode: str = ROUND_NEAREST) -> float:
    """Convert a rational or mpfr to a double with directed rounding."""
    with gmpy2.context(precision=53, round=_GMPY_ROUNDING[mode]):
        if isinstance(value, Fraction):
            value = to_mpq(value)
        return float(mpfr(value))


def float_up(value) -> float:
    return float_rounded(value, ROUND_UP)


def float_down(value) -> float:
    return float_rounded(value, ROUND_DOWN)


def softplus(x, config: PrecisionConfig = DEFAULT_PRECISION) -> mpfr:
    """ln(1 + e^x), overflow-safe.

    Uses ``x + ln(1 + e^-x)`` for positive ``x`` so the exponential never
    overflows; this is the per-factor term of products of ``(1 + e^eps)``.
    """
    with config.context():
        x = _to_mpfr(x)
        if not gmpy2.is_finite(x):
            raise ValueError("softplus requires finite input")
        if x > 0:
            return x + gmpy2.log1p(gmpy2.exp(-x))
        return gmpy2.log1p(gmpy2.exp(x))


def log_diff_exp(a, b, config: PrecisionConfig = DEFAULT_PRECISION) -> mpfr:
    """ln(e^a - e^b) for a >= b, with the -inf sentinel at a == b.

    Callers must clamp negative differences to zero before coming here;
    ``a < b`` is a contract violation, not a representable value.
    """
    with config.context():
        a = _to_mpfr(a)
        b = _to_mpfr(b)
        if a < b:
            raise ValueError(f"log_diff_exp requires a >= b (got a={a}, b={b})")
        if a == b:
            return NEG_INF
        if b == NEG_INF:
            return a
        d = b - a
        # ln(1 - e^d) for d < 0: pick the branch that keeps the argument
        # well-conditioned on either side of d = -ln 2.
        if d > -math.log(2):
            return a + gmpy2.log(-gmpy2.expm1(d))
        return a + gmpy2.log1p(-gmpy2.exp(d))


def ln1p_taylor(
    beta: RationalLike,
    tail_bound: Fraction | None = None,
) -> Fraction:
    """Certified rational over-approximation of ln(1 + beta) for beta in (0,1).

    Returns an odd partial sum y of the alternating series
    beta - beta^2/2 + beta^3/3 - ..., which satisfies
    ln(1+beta) <= y <= beta exactly. Enough terms are taken that the
    remainder y - ln(1+beta) is at most ``tail_bound`` (default: the
    three-term sum, whose remainder is below beta^4/4).
    """
    beta = as_fraction(beta)
    if not 0 < beta < 1:
        raise ValueError(f"beta must be in (0, 1), got {beta}")
    terms = 3
    if tail_bound is not None:
        if tail_bound <= 0:
            raise ValueError("tail_bound must be positive")
        # Alternating-series remainder after m terms is < beta^(m+1)/(m+1).
        while beta ** (terms + 1) / (terms + 1) > tail_bound:
            terms += 2
    total = Fraction(0)
    power = Fraction(1)
    for j in range(1, terms + 1):
        power *= beta
        total += power / j if j % 2 else -power / j
    return total


def binomial(k: int, l: int) -> int:
    """Exact C(k, l) as an arbitrary-size integer."""
    if l < 0 or k < 0:
        raise ValueError("binomial requires non-negative arguments")
    if l > k:
        raise ValueError(f"binomial requires l <= k (got k={k}, l={l})")
    return math.comb(k, l)


def _to_mpfr(x) -> mpfr:
    if isinstance(x, Fraction):
        return mpfr(to_mpq(x))
    return mpfr(x)
