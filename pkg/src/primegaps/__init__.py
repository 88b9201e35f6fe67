"""Gap counting over prime divisors: sweeps, model, and diagnostics."""

from .errors import (
    CacheFormatError,
    DivisorCapacityError,
    EnumerationCapError,
    HeadroomError,
)
from .gap_counter import (
    DivisorList,
    GapParameters,
    MomentAccumulator,
    delta_sum_of,
    intro_gap_count,
    segmented_sweep,
    sweep_histogram,
)
from .model import (
    ModelPrediction,
    MonteCarloResult,
    OutcomeEnumeration,
    SteinReport,
    central_abs_moment,
    enumerate_outcomes,
    exact_moments_by_enumeration,
    indicator_product_expectation,
    joint_b_distribution,
    minimal_enumeration_bound,
    model_h,
    model_mean_and_variance,
    monte_carlo,
    sample_S_N,
    stein_diagnostics,
)
from .primes import (
    PrimeTable,
    build_prime_table,
    distinct_prime_divisors,
    in_gap_interval,
    load_table,
    mertens_product,
    mertens_sum,
    primes_in_gap_interval,
    save_table,
    simple_sieve,
    smallest_prime_factor_table,
)
from .sieve_check import JointDeltaQuery, joint_empirical, joint_predicted
from .stats import (
    NormalizedMomentReport,
    gaussian_moment,
    ks_distance,
    normal_cdf,
    normalized_moment_report,
    recenter,
    report_csv,
)

__version__ = "0.1.0"

__all__ = [
    "CacheFormatError",
    "DivisorCapacityError",
    "DivisorList",
    "EnumerationCapError",
    "GapParameters",
    "HeadroomError",
    "JointDeltaQuery",
    "ModelPrediction",
    "MomentAccumulator",
    "MonteCarloResult",
    "NormalizedMomentReport",
    "OutcomeEnumeration",
    "PrimeTable",
    "SteinReport",
    "build_prime_table",
    "central_abs_moment",
    "delta_sum_of",
    "distinct_prime_divisors",
    "enumerate_outcomes",
    "exact_moments_by_enumeration",
    "gaussian_moment",
    "in_gap_interval",
    "indicator_product_expectation",
    "intro_gap_count",
    "joint_b_distribution",
    "joint_empirical",
    "joint_predicted",
    "ks_distance",
    "load_table",
    "mertens_product",
    "mertens_sum",
    "minimal_enumeration_bound",
    "model_h",
    "model_mean_and_variance",
    "monte_carlo",
    "normal_cdf",
    "normalized_moment_report",
    "primes_in_gap_interval",
    "recenter",
    "report_csv",
    "sample_S_N",
    "save_table",
    "segmented_sweep",
    "simple_sieve",
    "smallest_prime_factor_table",
    "stein_diagnostics",
    "sweep_histogram",
]
