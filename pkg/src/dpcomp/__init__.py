"""dpcomp: privacy budget accounting via optimal composition.

Computes the global (epsilon_g, delta_g) guarantee of composing k
heterogeneous (epsilon_i, delta_i)-differentially-private mechanisms:
exactly (exhaustive, exponential in k) for small k, and to arbitrary
accuracy in polynomial time via a knapsack-counting grid search for large k.
Exposed as a library, a CLI (``dpcomp``), and an HTTP JSON service.
"""

__version__ = "0.1.0"

from .allocate import (
    AllocatedStatistic,
    AllocationResult,
    StatisticSpec,
    allocate_budget,
)
from .approx import (
    ApproxResult,
    Discretization,
    KnapsackTable,
    approx_optimal_epsilon,
    discretize,
    feasibility_check,
    knapsack_sum,
    knapsack_table,
)
from .composition import (
    HomogeneousCurve,
    SubsetScan,
    advanced_compose,
    basic_compose,
    exact_delta_of_epsilon,
    exact_optimal_epsilon,
    homogeneous_delta_of_epsilon,
    homogeneous_optimal_epsilon,
)
from .numerics import (
    DEFAULT_PRECISION,
    NEG_INF,
    PrecisionConfig,
    as_fraction,
    binomial,
    ln1p_taylor,
    log_diff_exp,
    softplus,
)
from .oracle import RRDistribution, enumerate_delta, rr_pmf, rr_sample, rr_samples
from .parameters import (
    ApproxSizeError,
    CompositionInstance,
    DpcompError,
    EnumerationLimitError,
    GuaranteeResult,
    InfeasibleDeltaError,
    PrivacyParams,
    ZeroBudgetError,
)

__all__ = [
    "AllocatedStatistic",
    "AllocationResult",
    "ApproxResult",
    "ApproxSizeError",
    "CompositionInstance",
    "DEFAULT_PRECISION",
    "Discretization",
    "DpcompError",
    "EnumerationLimitError",
    "GuaranteeResult",
    "HomogeneousCurve",
    "InfeasibleDeltaError",
    "KnapsackTable",
    "NEG_INF",
    "PrecisionConfig",
    "PrivacyParams",
    "RRDistribution",
    "StatisticSpec",
    "SubsetScan",
    "ZeroBudgetError",
    "advanced_compose",
    "allocate_budget",
    "approx_optimal_epsilon",
    "as_fraction",
    "basic_compose",
    "binomial",
    "discretize",
    "enumerate_delta",
    "exact_delta_of_epsilon",
    "exact_optimal_epsilon",
    "feasibility_check",
    "homogeneous_delta_of_epsilon",
    "homogeneous_optimal_epsilon",
    "knapsack_sum",
    "knapsack_table",
    "ln1p_taylor",
    "log_diff_exp",
    "rr_pmf",
    "rr_sample",
    "rr_samples",
    "softplus",
    "__version__",
]
