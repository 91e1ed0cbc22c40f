"""Nonparametric statistics and study analysis."""

from .bootstrap import DEFAULT_ITERATIONS, DEFAULT_SEED, bootstrap_ci
from .nonparametric import (
    DegenerateDataError,
    TestResult,
    exact_min_sum_p,
    friedman_test,
    holm_correct,
    wilcoxon_signed_rank,
)
from .analysis import (
    CONSTRUCTS,
    ConditionSummary,
    ConstructSummary,
    PairResult,
    RankingMatrix,
    RankSummary,
    Study1Report,
    Study2Report,
    aggregate_rankings,
    analyze_study1,
    analyze_study2,
    condition_label,
)

__all__ = [
    "CONSTRUCTS",
    "DEFAULT_ITERATIONS",
    "DEFAULT_SEED",
    "ConditionSummary",
    "ConstructSummary",
    "DegenerateDataError",
    "PairResult",
    "RankSummary",
    "RankingMatrix",
    "Study1Report",
    "Study2Report",
    "TestResult",
    "aggregate_rankings",
    "analyze_study1",
    "analyze_study2",
    "bootstrap_ci",
    "condition_label",
    "exact_min_sum_p",
    "friedman_test",
    "holm_correct",
    "wilcoxon_signed_rank",
]
