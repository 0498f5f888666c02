"""Weighted geometric distribution WG(alpha, q) for over-dispersed counts."""

from .core import (
    MomentSummary,
    WGParams,
    cdf_survival,
    generating_functions,
    log_pmf,
    mode,
    moments,
    norm_const,
    pgf,
    pmf,
    pmf_ratio,
    quantile,
    raw_moment,
    reliability,
    stirling2,
)
from .errors import (
    CapExceededError,
    DataFormatError,
    DomainError,
    InfeasibleEstimateError,
    SingularInformationError,
    WGError,
)
from .estimate import FitResult, FreqTable, SampleSummary, fit, fit_mle, fit_mm, fit_mp, summarize
from .gof import GofReport, builtin_datasets, chi_square_test, expected_frequencies, regularized_gamma_q
from .sampling import Method, SamplerState, sample

__version__ = "0.1.0"
