"""OLS with Newey-West HAC inference and the UIP hypothesis tests.

The UIP regression is Delta s_{t+1} = alpha + beta * (iota_i - iota_j) + eps
with the strict no-arbitrage null {alpha = 0, beta = 1} and the weak null
{beta = 1} (a free alpha absorbs a constant risk premium). Both are Wald
chi-square tests on the HAC covariance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .series import RateSeries


class InsufficientObservations(ValueError):
    pass


class DegenerateRegressor(ValueError):
    """Regressor with zero variance: the interest differential is constant."""


class SingularDesign(np.linalg.LinAlgError):
    pass


def auto_hac_lags(n: int) -> int:
    """Newey-West automatic truncation: floor(4 * (n/100)^(2/9))."""
    return int(math.floor(4.0 * (n / 100.0) ** (2.0 / 9.0)))


def _xtx_inverse(x: np.ndarray) -> np.ndarray:
    xtx = x.T @ x
    if np.linalg.cond(xtx) > 1e12:
        raise SingularDesign("design matrix is singular or nearly so")
    return np.linalg.inv(xtx)


def newey_west(x: np.ndarray, residuals: np.ndarray, lags: int) -> np.ndarray:
    """HAC covariance of OLS coefficients with Bartlett-kernel weights.

    S = Gamma_0 + sum_{l=1..L} (1 - l/(L+1)) (Gamma_l + Gamma_l'), with
    Gamma_l the lag-l autocovariance of the score x_t * e_t, and the
    sandwich (X'X)^-1 (n S) (X'X)^-1. L = 0 reduces to the White estimator.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    e = np.asarray(residuals, dtype=float)
    n = len(e)
    if lags < 0 or lags >= n:
        raise ValueError(f"hac lags must lie in [0, {n})")
    scores = x * e[:, None]
    s = scores.T @ scores / n
    for lag in range(1, lags + 1):
        gamma = scores[lag:].T @ scores[:-lag] / n
        s += (1.0 - lag / (lags + 1.0)) * (gamma + gamma.T)
    xtx_inv = _xtx_inverse(x)
    return n * (xtx_inv @ s @ xtx_inv)


def ols(y: np.ndarray, x: np.ndarray, hac_lags: int | None = None):
    """OLS fit returning (coefficients, hac covariance, residuals, r_squared)."""
    y = np.asarray(y, dtype=float)
    x = np.atleast_2d(np.asarray(x, dtype=float))
    n = len(y)
    theta = _xtx_inverse(x) @ (x.T @ y)
    residuals = y - x @ theta
    lags = auto_hac_lags(n) if hac_lags is None else hac_lags
    cov = newey_west(x, residuals, lags)
    tss = ((y - y.mean()) ** 2).sum()
    r_squared = 1.0 - (residuals @ residuals) / tss if tss > 0 else 0.0
    return theta, cov, residuals, r_squared


def wald_test(theta: np.ndarray, cov: np.ndarray, restrict: np.ndarray,
              value: np.ndarray) -> tuple[float, float]:
    """Wald chi-square test of R theta = v; returns (statistic, p-value)."""
    restrict = np.atleast_2d(np.asarray(restrict, dtype=float))
    gap = restrict @ theta - np.asarray(value, dtype=float)
    middle = restrict @ cov @ restrict.T
    try:
        stat = float(gap @ np.linalg.solve(middle, gap))
    except np.linalg.LinAlgError as exc:
        raise SingularDesign("restricted covariance is singular") from exc
    return stat, float(stats.chi2.sf(stat, df=restrict.shape[0]))


@dataclass
class RegressionResult:
    """UIP regression estimates in the layout of the reporting tables."""

    alpha_hat: float
    beta_hat: float
    hac_cov: np.ndarray
    n_obs: int
    r_squared: float
    p_alpha: float
    p_beta: float
    p_strict: float
    p_weak: float
    hac_lags: int
    meta: dict = field(default_factory=dict)

    @property
    def alpha_se(self) -> float:
        return math.sqrt(self.hac_cov[0, 0])

    @property
    def beta_se(self) -> float:
        return math.sqrt(self.hac_cov[1, 1])


def uip_regress(exchange: RateSeries, rate_i: RateSeries, rate_j: RateSeries,
                hac_lags: int | None = None) -> RegressionResult:
    """Test UIP for one token pair.

    `exchange` holds the spot rate S (units of j per i), strictly positive;
    the rate series hold per-period interest rates. All three must share an
    identical period index. The regression pairs the differential at t with
    the log exchange-rate change from t to t+1.
    """
    if not (np.array_equal(exchange.index, rate_i.index)
            and np.array_equal(exchange.index, rate_j.index)):
        raise ValueError("series must be aligned on an identical period index")
    n_levels = len(exchange)
    if n_levels < 10:
        raise InsufficientObservations(f"need at least 10 observations, got {n_levels}")
    if np.any(exchange.values <= 0):
        raise ValueError("exchange rates must be strictly positive before logging")
    s = np.log(exchange.values)
    y = s[1:] - s[:-1]
    diff = (rate_i.values - rate_j.values)[:-1]
    if np.ptp(diff) == 0.0:
        raise DegenerateRegressor("interest differential has zero variance")
    n = len(y)
    lags = auto_hac_lags(n) if hac_lags is None else hac_lags
    x = np.column_stack([np.ones(n), diff])
    theta, cov, _, r_squared = ols(y, x, hac_lags=lags)
    _, p_alpha = wald_test(theta, cov, [[1.0, 0.0]], [0.0])
    _, p_beta = wald_test(theta, cov, [[0.0, 1.0]], [0.0])
    _, p_strict = wald_test(theta, cov, np.eye(2), [0.0, 1.0])
    _, p_weak = wald_test(theta, cov, [[0.0, 1.0]], [1.0])
    return RegressionResult(
        alpha_hat=float(theta[0]), beta_hat=float(theta[1]), hac_cov=cov,
        n_obs=n, r_squared=r_squared, p_alpha=p_alpha, p_beta=p_beta,
        p_strict=p_strict, p_weak=p_weak, hac_lags=lags,
    )
