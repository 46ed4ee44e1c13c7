"""Floating-point estimation engine: UIP regressions with HAC inference,
Johansen rank tests, VECM estimation, impulse responses and diagnostics."""

from .series import RateSeries, Frequency, resample_blocks, EmptyInput
from .regression import (
    RegressionResult,
    newey_west,
    ols,
    uip_regress,
    wald_test,
    InsufficientObservations,
    DegenerateRegressor,
    SingularDesign,
)
from .johansen import JohansenResult, johansen, trace_critical_values
from .vecm import (
    VecmFit,
    IrfResult,
    StabilityReport,
    vecm_fit,
    irf,
    stability_check,
    long_run_impact,
    ljung_box,
    RankOutOfRange,
    NumericalFailure,
    NonPsdCovariance,
    NumericalWarning,
)

__all__ = [
    "RateSeries", "Frequency", "resample_blocks", "EmptyInput",
    "RegressionResult", "newey_west", "ols", "uip_regress", "wald_test",
    "InsufficientObservations", "DegenerateRegressor", "SingularDesign",
    "JohansenResult", "johansen", "trace_critical_values",
    "VecmFit", "IrfResult", "StabilityReport", "vecm_fit", "irf",
    "stability_check", "long_run_impact", "ljung_box",
    "RankOutOfRange", "NumericalFailure", "NonPsdCovariance", "NumericalWarning",
]
