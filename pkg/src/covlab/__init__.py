"""Monte Carlo laboratory for the renormalized sample covariance matrix
``H = X^T X / sqrt(M N) - sqrt(M/N) I`` in the regime ``N/M -> 0``.

Submodules
----------
analytic    semicircle limits, the two-term expansion of E m_N(z), CLT variance
entries     entry laws, moments, cumulants, truncation, Stein checks
matrixlab   construction of H, spectra, resolvents, matrix identities
montecarlo  replica engine and statistical reports
stats       mergeable running moments, Kolmogorov-Smirnov statistic
report      JSON / CSV serialization
battery     fast deterministic verification battery
cli         ``covlab`` command line
"""
from .analytic import (
    ExpansionTerms,
    QuadratureSpec,
    TestFunction,
    expansion_prediction,
    mp_density,
    self_consistency_residual,
    semicircle_density,
    semicircle_stieltjes,
    test_function,
    variance_functional,
)
from .entries import EntryDistribution, distribution, truncation_threshold
from .montecarlo import (
    EnsembleConfig,
    clt_report,
    collect_spectra,
    expansion_report,
    green_diag_report,
    run_ensemble,
    variance_scaling_report,
)
from .stats import RunningStats, ks_statistic, merge_stats

__version__ = "0.1.0"

__all__ = [
    "EnsembleConfig",
    "EntryDistribution",
    "ExpansionTerms",
    "QuadratureSpec",
    "RunningStats",
    "TestFunction",
    "clt_report",
    "collect_spectra",
    "distribution",
    "expansion_prediction",
    "expansion_report",
    "green_diag_report",
    "ks_statistic",
    "merge_stats",
    "mp_density",
    "run_ensemble",
    "self_consistency_residual",
    "semicircle_density",
    "semicircle_stieltjes",
    "test_function",
    "truncation_threshold",
    "variance_functional",
    "variance_scaling_report",
]
