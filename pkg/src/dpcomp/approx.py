"""Polynomial-time approximation of optimal composition.

Epsilon values are discretized onto a grid eps0 = ln(1 + beta) whose base
1 + beta is rational, so subset products of e^(eps_i') are exact rational
powers. Whether a candidate global level a* is feasible then reduces to two
weighted knapsack counts computed by an O(B k) dynamic program; binary search
over a* finds the least feasible level, and the reported epsilon* rounds the
grid value outward through a certified Taylor bracket of the logarithm.

Numerical policy: the default float mode runs the DP in doubles and applies a
certified relative-error band. A "feasible" verdict is only issued when the
inflated left-hand side still clears the exact rational right-hand side, so
feasible verdicts are never false positives and epsilon* remains a sound
upper bound. Verdicts inside the uncertainty band are re-decided by a
directed-rounding multiprecision pass; the exact-rational mode (for tests and
small instances) has no error at all.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Tuple

import gmpy2
import numpy as np
from gmpy2 import mpfr, mpq

from . import kernels
from .numerics import (
    DEFAULT_PRECISION,
    PrecisionConfig,
    RationalLike,
    as_fraction,
    float_down,
    float_up,
    ln1p_taylor,
    to_mpq,
)
from .parameters import (
    METHOD_APPROX,
    ApproxSizeError,
    CompositionInstance,
    GuaranteeResult,
    InfeasibleDeltaError,
)

MODE_FLOAT = "float"
MODE_EXACT = "exact"

#: Largest knapsack capacity (row length) the engine will allocate.
DEFAULT_MAX_CAPACITY = 10_000_000

#: Cell-update budget for the directed multiprecision escalation pass.
_DIRECTED_CELL_CAP = 40_000_000

# Certified relative error of the double-precision DP: each row applies at
# most a handful of roundings per cell on non-negative data, so the relative
# drift after k rows is below 12*(k+2) units in the last place.
_DP_ERROR_NUMERATOR = 12


@dataclass(frozen=True)
class Discretization:
    """Grid parameters: beta, integer levels a_i, and certified eps0 bounds."""

    eta: Fraction
    beta: Fraction
    levels: Tuple[int, ...]
    a_total: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "eta", as_fraction(self.eta))
        object.__setattr__(self, "beta", as_fraction(self.beta))
        object.__setattr__(self, "levels", tuple(int(a) for a in self.levels))
        if not 0 < self.beta <= 1:
            raise ValueError(f"beta must be in (0, 1], got {self.beta}")
        if any(a < 0 for a in self.levels):
            raise ValueError("levels must be non-negative")
        object.__setattr__(self, "a_total", sum(self.levels))

    @property
    def base(self) -> Fraction:
        """e^(eps0) exactly: the rational grid base 1 + beta."""
        return 1 + self.beta

    @property
    def eps0_lower(self) -> Fraction:
        """Certified lower bound beta/(1+beta) <= ln(1+beta)."""
        return self.beta / (1 + self.beta)

    @property
    def eps0_upper(self) -> Fraction:
        """Certified upper bound ln(1+beta) <= beta."""
        return self.beta

    @property
    def epsilon0(self) -> float:
        """Grid spacing ln(1+beta) as a double (reporting only)."""
        return math.log1p(float(self.beta))

    def grid_epsilon(self, index: int) -> Fraction:
        """Certified over-approximation of index * eps0 (exact rational)."""
        if index == 0:
            return Fraction(0)
        margin = self.beta**2 / 2 - self.beta**3 / 3
        return index * ln1p_taylor(self.beta, tail_bound=margin / index)


def discretize(instance: CompositionInstance, eta: RationalLike) -> Discretization:
    """Exact-rational discretization: beta = eta/(k(1+mean eps)+1), a_i = ceil(eps_i(1/beta+1))."""
    eta = as_fraction(eta)
    if not 0 < eta < 1:
        raise ValueError(f"eta must be in (0, 1), got {eta}")
    beta = eta / (instance.k * (1 + instance.eps_mean) + 1)
    scale = 1 / beta + 1
    levels = tuple(math.ceil(p.epsilon * scale) for p in instance.params)
    return Discretization(eta=eta, beta=beta, levels=levels)


@dataclass(frozen=True)
class KnapsackTable:
    """Full weighted-count table F(r, s), exact rationals (verification aid)."""

    levels: Tuple[int, ...]
    capacity: int
    weights: Tuple[Fraction, ...]
    rows: Tuple[Tuple[Fraction, ...], ...]

    def value(self, r: int, s: int) -> Fraction:
        return self.rows[r][s]


def knapsack_table(
    levels: Sequence[int], capacity: int, weights: Sequence[RationalLike]
) -> KnapsackTable:
    """Tabulate F(r, s) for 0 <= r <= k, 0 <= s <= capacity in exact rationals."""
    levels, weights_q = _validate_knapsack_args(levels, capacity, weights)
    row = [mpq(1)] * (capacity + 1)
    rows = [tuple(Fraction(v) for v in row)]
    for a, w in zip(levels, weights_q):
        row = _exact_row_advance(row, a, w)
        rows.append(tuple(Fraction(v) for v in row))
    return KnapsackTable(
        levels=tuple(levels),
        capacity=capacity,
        weights=tuple(Fraction(w) for w in weights_q),
        rows=tuple(rows),
    )


def knapsack_sum(
    levels: Sequence[int],
    capacity: int,
    weights: Sequence[RationalLike],
    exact: bool | None = None,
):
    """F(k, B): sum over subsets S with level sum <= B of prod_{i in S} w_i.

    Runs the O(B k) two-row dynamic program. Exact mode (rational weights)
    returns a Fraction with no error; float mode runs the compiled kernel on
    doubles and returns a float. The float result overflows to inf once the
    unnormalized total leaves double range (k in the high hundreds at
    weights near e); the feasibility engine is immune, as it compares
    normalized sums only.
    """
    levels, weights_q = _validate_knapsack_args(levels, capacity, weights, allow_float=True)
    if exact is None:
        exact = not any(isinstance(w, float) for w in weights)
    if exact:
        row = [mpq(1)] * (capacity + 1)
        for a, w in zip(levels, weights_q):
            row = _exact_row_advance(row, a, w)
        return Fraction(row[capacity])
    w_f = np.array([float(w) for w in weights_q], dtype=np.float64)
    g = kernels.knapsack_single(np.asarray(levels, dtype=np.int64), capacity, w_f)
    scale = 1.0
    for w in w_f:
        scale *= 1.0 + w
    return g * scale


def feasibility_check(
    discretization: Discretization,
    deltas: Sequence[RationalLike],
    delta_g: RationalLike,
    a_star: int,
    mode: str = MODE_FLOAT,
    precision: PrecisionConfig = DEFAULT_PRECISION,
) -> bool:
    """Decide whether the discretized composition meets epsilon = a_star * eps0.

    True means the optimal composition of (a_i*eps0, delta_i) is at most
    a_star*eps0 at the given delta_g. Monotone in a_star. Float-mode verdicts
    are one-sided: never feasible when the truth is infeasible.
    """
    oracle = _FeasibilityOracle(discretization, deltas, delta_g, mode, precision)
    return oracle.check(a_star)


class _FeasibilityOracle:
    """Per-instance state for repeated feasibility queries across a* values."""

    def __init__(self, disc, deltas, delta_g, mode, precision):
        if mode not in (MODE_FLOAT, MODE_EXACT):
            raise ValueError(f"unknown mode {mode!r}")
        deltas = [as_fraction(d) for d in deltas]
        if len(deltas) != len(disc.levels):
            raise ValueError(
                f"{len(disc.levels)} levels but {len(deltas)} delta values"
            )
        if any(not 0 <= d < 1 for d in deltas):
            raise ValueError("each delta must be in [0, 1)")
        delta_g = as_fraction(delta_g)
        if not 0 <= delta_g < 1:
            raise ValueError(f"delta_g must be in [0, 1), got {delta_g}")
        survival = Fraction(1)
        for d in deltas:
            survival *= 1 - d
        if delta_g < 1 - survival:
            raise InfeasibleDeltaError(1 - survival, delta_g)
        self.disc = disc
        self.mode = mode
        self.precision = precision
        self.rhs = to_mpq(1 - (1 - delta_g) / survival)
        base = to_mpq(disc.base)
        self._base = base
        self._w_plus_q = [base**a for a in disc.levels]
        self._levels = np.asarray(disc.levels, dtype=np.int64)
        if mode == MODE_FLOAT:
            self._w_plus_f = np.array([float(q) for q in self._w_plus_q])
            self._w_minus_f = np.array([float(1 / q) for q in self._w_plus_q])
            k = len(disc.levels)
            # The DP satisfies |g_hat - g| <= e*g with e = 12(k+2) ulp. A
            # rigorous upper bound on g is g_hat/(1-e); doubling e keeps the
            # algebra one-sided because (1+2e) >= 1/(1-e) for e <= 1/2.
            self._err = mpq(2 * _DP_ERROR_NUMERATOR * (k + 2), 2**53)

    def check(self, a_star: int) -> bool:
        if a_star < 0:
            raise ValueError(f"a_star must be >= 0, got {a_star}")
        disc = self.disc
        if a_star >= disc.a_total:
            # Every subset term of the optimal-composition sum is already
            # non-positive at epsilon = a_total * eps0.
            return True
        capacity = (disc.a_total - a_star) // 2
        if self.mode == MODE_EXACT:
            return self._check_exact(a_star, capacity)
        return self._check_float(a_star, capacity)

    def _check_exact(self, a_star: int, capacity: int) -> bool:
        gm = _exact_normalized_sum(self.disc.levels, capacity, [1 / q for q in self._w_plus_q])
        gp = _exact_normalized_sum(self.disc.levels, capacity, self._w_plus_q)
        lhs = gm - self._base**a_star * gp
        return lhs <= self.rhs

    def _check_float(self, a_star: int, capacity: int) -> bool:
        gm, gp = kernels.knapsack_pair(
            self._levels, capacity, self._w_minus_f, self._w_plus_f
        )
        gm_q = mpq(gm)
        gp_q = mpq(gp)
        err = self._err
        pow_dn, pow_up = _pow_bounds(self._base, a_star)
        gp_dn = gp_q * (1 - err)
        if gp_dn < 0:
            gp_dn = mpq(0)
        lhs_up = gm_q * (1 + err) - pow_dn * gp_dn
        if lhs_up <= self.rhs:
            return True
        lhs_dn = gm_q * (1 - err) - pow_up * gp_q * (1 + err)
        if lhs_dn > self.rhs:
            return False
        # The double-precision band straddles the boundary: re-decide with
        # directed multiprecision rounding (upper G_minus, lower G_plus).
        return self._check_directed(a_star, capacity)

    def _check_directed(self, a_star: int, capacity: int) -> bool:
        levels = self.disc.levels
        if (capacity + 1) * len(levels) > _DIRECTED_CELL_CAP:
            # Too large to escalate; stay on the sound side.
            return False
        bits = self.precision.precision_bits
        up = gmpy2.context(precision=bits, round=gmpy2.RoundUp)
        dn = gmpy2.context(precision=bits, round=gmpy2.RoundDown)
        w_minus_q = [1 / q for q in self._w_plus_q]
        gm_up = _directed_normalized_sum(levels, capacity, w_minus_q, up, dn)
        gp_dn = _directed_normalized_sum(levels, capacity, self._w_plus_q, dn, up)
        with dn:
            pow_dn = mpfr(self._base) ** a_star
        lhs_up = mpq(gm_up) - mpq(pow_dn) * mpq(gp_dn)
        return lhs_up <= self.rhs


@dataclass(frozen=True)
class ApproxResult:
    """Outcome of the grid search: epsilon* with its sandwich metadata."""

    epsilon_star: float
    epsilon_star_exact: Fraction
    a_star: int
    discretization: Discretization
    delta_g: Fraction
    eta: Fraction
    precision: PrecisionConfig
    mode: str

    @property
    def delta_g_shifted(self) -> float:
        """The shrunk failure budget e^(-eta/2) * delta_g of the guarantee."""
        with gmpy2.context(precision=64):
            return float(gmpy2.exp(-mpfr(to_mpq(self.eta)) / 2) * mpfr(to_mpq(self.delta_g)))

    def guarantee(self) -> GuaranteeResult:
        if self.a_star == 0:
            bracket = (0.0, 0.0)
        else:
            bracket = (
                float_down(self.a_star * self.discretization.eps0_lower),
                float_up(self.a_star * self.discretization.eps0_upper),
            )
        return GuaranteeResult(
            epsilon_g=float(self.epsilon_star_exact),
            delta_g=float(self.delta_g),
            method=METHOD_APPROX,
            bracket=bracket,
            precision=self.precision,
        )


def approx_optimal_epsilon(
    instance: CompositionInstance,
    delta_g: RationalLike,
    eta: RationalLike,
    mode: str = MODE_FLOAT,
    precision: PrecisionConfig = DEFAULT_PRECISION,
    max_capacity: int = DEFAULT_MAX_CAPACITY,
) -> ApproxResult:
    """epsilon* within [optimal, optimal-at-shrunk-delta + eta], in poly time.

    Binary-searches the least feasible grid level a* (feasibility is monotone
    in a*), then rounds a* * eps0 outward to a rational epsilon*.
    """
    delta_g = as_fraction(delta_g)
    eta = as_fraction(eta)
    instance.check_feasible(delta_g)
    disc = discretize(instance, eta)
    if disc.a_total // 2 + 1 > max_capacity:
        raise ApproxSizeError(
            f"knapsack capacity {disc.a_total // 2} exceeds the cap {max_capacity}; "
            "increase eta or raise max_capacity"
        )
    oracle = _FeasibilityOracle(disc, instance.deltas, delta_g, mode, precision)
    # a_total is feasible a priori; search the least feasible level below it.
    lo, hi = 0, disc.a_total
    if oracle.check(0):
        a_star = 0
    else:
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if oracle.check(mid):
                hi = mid
            else:
                lo = mid
        a_star = hi
    eps_exact = disc.grid_epsilon(a_star)
    return ApproxResult(
        epsilon_star=float(eps_exact),
        epsilon_star_exact=eps_exact,
        a_star=a_star,
        discretization=disc,
        delta_g=delta_g,
        eta=eta,
        precision=precision,
        mode=mode,
    )


def _validate_knapsack_args(levels, capacity, weights, allow_float=False):
    levels = [int(a) for a in levels]
    if any(a < 0 for a in levels):
        raise ValueError("levels must be non-negative")
    if len(levels) != len(weights):
        raise ValueError(f"{len(levels)} levels but {len(weights)} weights")
    if capacity < 0:
        raise ValueError(f"capacity must be >= 0, got {capacity}")
    if not allow_float and any(isinstance(w, float) for w in weights):
        raise ValueError("the exact table requires rational weights, not floats")
    weights_q = []
    for w in weights:
        q = to_mpq(w)
        if q <= 0:
            raise ValueError(f"weights must be positive, got {w}")
        weights_q.append(q)
    return levels, weights_q


def _exact_row_advance(row, a, w):
    capacity = len(row) - 1
    new = list(row)
    for s in range(capacity, a - 1, -1):
        new[s] = row[s] + w * row[s - a]
    return new


def _exact_normalized_sum(levels, capacity, weights_q) -> mpq:
    """G(k, B) = F(k, B) / prod(1 + w_i) in exact rationals."""
    row = [mpq(1)] * (capacity + 1)
    normalizer = mpq(1)
    for a, w in zip(levels, weights_q):
        row = _exact_row_advance(row, a, w)
        normalizer *= 1 + w
    return row[capacity] / normalizer


def _directed_normalized_sum(levels, capacity, weights_q, toward, away):
    """Directed-rounding bound on G(k, B).

    ``toward`` is the context rounding in the bound's direction (RoundUp for
    an upper bound, RoundDown for a lower bound); ``away`` rounds opposite,
    used for denominators so the reciprocal lands on the ``toward`` side.
    """
    with toward:
        w_toward = [mpfr(q) for q in weights_q]
    with away:
        w_away = [mpfr(q) for q in weights_q]
    g = [mpfr(1)] * (capacity + 1)
    for i, a in enumerate(levels):
        with away:
            denom = 1 + w_away[i]
        with toward:
            c = 1 / denom
            new = [mpfr(0)] * (capacity + 1)
            for s in range(capacity + 1):
                t = g[s]
                if a <= s:
                    t = t + w_toward[i] * g[s - a]
                new[s] = t * c
            g = new
    return g[capacity]


def _pow_bounds(base: mpq, exponent: int) -> Tuple[mpq, mpq]:
    """Bracket base**exponent: exact when small, directed 96-bit otherwise."""
    if exponent * base.numerator.bit_length() <= 4_000_000:
        p = base**exponent
        return p, p
    with gmpy2.context(precision=96, round=gmpy2.RoundDown):
        p_dn = mpfr(base) ** exponent
    with gmpy2.context(precision=96, round=gmpy2.RoundUp):
        p_up = mpfr(base) ** exponent
    return mpq(p_dn), mpq(p_up)
