"""Hypothesis tests for matched pairs with missing components.

Two families of tests are provided: the paired t test after multiple
imputation (Bayesian linear regression, predictive mean matching, iterative
forest imputation, chained forest donors) pooled with Rubin's rules, and a
weighted permutation test combining the complete pairs with the singletons.
A Monte Carlo harness estimates their rejection rates and imputation error.
"""

__version__ = "0.1.0"

from .data import (
    Bernoulli,
    CompletedDataset,
    FixedCounts,
    PairedSample,
    ingest_csv,
    inject_mcar,
    split,
    write_csv,
)
from .datagen import CovarianceSpec, ResidualLaw, generate
from .exceptions import (
    ComputationError,
    DegenerateVarianceError,
    FormatError,
    PairedMIError,
    ParameterError,
    RankError,
    SizeError,
    UndefinedMetricError,
    ValidationError,
)
from .forest import ForestParams, RandomForest, donor_draw, fit_forest, predict_mean
from .imputation import (
    ImputationMethod,
    MissForestImputer,
    NormImputer,
    PMMImputer,
    RFMiceImputer,
    make_imputer,
    multiple_impute,
)
from .metrics import nrmse
from .permutation import (
    PermutationConfig,
    WeightedPermutationTest,
    enumerate_exact,
    permute_and_test,
    t_ml,
    weight_a,
)
from .rubin import MIPairedTTest, mi_analysis, mi_t_test, rubin_pool
from .stats import TestOutcome, paired_t, t_cdf, welch

__all__ = [
    "Bernoulli", "CompletedDataset", "FixedCounts", "PairedSample", "ingest_csv", "inject_mcar",
    "split", "write_csv", "CovarianceSpec", "ResidualLaw", "generate", "ComputationError",
    "DegenerateVarianceError", "FormatError", "PairedMIError", "ParameterError", "RankError",
    "SizeError", "UndefinedMetricError", "ValidationError", "ForestParams", "RandomForest",
    "donor_draw", "fit_forest", "predict_mean", "ImputationMethod", "MissForestImputer",
    "NormImputer", "PMMImputer", "RFMiceImputer", "make_imputer", "multiple_impute", "nrmse",
    "PermutationConfig", "WeightedPermutationTest", "enumerate_exact", "permute_and_test",
    "t_ml", "weight_a", "MIPairedTTest", "mi_analysis", "mi_t_test", "rubin_pool",
    "TestOutcome", "paired_t", "t_cdf", "welch",
]
