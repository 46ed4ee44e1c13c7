"""Synthetic data generators for estimator validation.

The empirical panels behind the published cross-protocol results are not
shippable, so estimators are validated by recovery on synthetic systems
whose ground truth is pinned here. The cointegrated system's long-run
coefficient (-1.151) and adjustment speeds (0.38, 0.28) are chosen to match
the magnitudes reported for the DAI borrow-rate panel.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .series import RateSeries


@dataclass
class CointegratedTruth:
    """Ground truth for the 3-series, rank-2 recovery benchmark."""

    alpha: np.ndarray = field(default_factory=lambda: np.array([
        [0.00, 0.00],
        [0.38, -0.53],
        [0.28, -0.04],
    ]))
    beta: np.ndarray = field(default_factory=lambda: np.array([
        [1.0, 0.0],
        [0.0, 1.0],
        [-1.151, -0.991],
    ]))
    beta_const: np.ndarray = field(default_factory=lambda: np.array([0.0296, 0.0051]))
    gamma1: np.ndarray = field(default_factory=lambda: 0.10 * np.eye(3))
    shock_sd: float = 0.005


def cointegrated_panel(n: int, seed: int,
                       truth: CointegratedTruth | None = None,
                       burn: int = 200) -> np.ndarray:
    """Simulate the rank-2 system Delta y = alpha (beta' y + c) +
    Gamma_1 Delta y_{-1} + eps; returns an (n x 3) level panel."""
    truth = truth or CointegratedTruth()
    rng = np.random.default_rng(seed)
    total = n + burn
    y = np.zeros((total, 3))
    dy_prev = np.zeros(3)
    shocks = rng.normal(0.0, truth.shock_sd, size=(total, 3))
    for t in range(1, total):
        ect = truth.beta.T @ y[t - 1] + truth.beta_const
        dy = truth.alpha @ ect + truth.gamma1 @ dy_prev + shocks[t]
        y[t] = y[t - 1] + dy
        dy_prev = dy
    return y[burn:]


def random_walks(n: int, k: int, seed: int, sd: float = 1.0) -> np.ndarray:
    """k independent driftless random walks (the rank-0 null)."""
    rng = np.random.default_rng(seed)
    return np.cumsum(rng.normal(0.0, sd, size=(n, k)), axis=0)


def stationary_var(n: int, k: int, seed: int, rho: float = 0.5,
                   sd: float = 1.0, burn: int = 100) -> np.ndarray:
    """Diagonal stable VAR(1) y_t = rho * y_{t-1} + eps (full rank case)."""
    rng = np.random.default_rng(seed)
    total = n + burn
    y = np.zeros((total, k))
    shocks = rng.normal(0.0, sd, size=(total, k))
    for t in range(1, total):
        y[t] = rho * y[t - 1] + shocks[t]
    return y[burn:]


def ar1(n: int, rho: float, sd: float, rng: np.random.Generator) -> np.ndarray:
    e = rng.normal(0.0, sd, size=n)
    if rho == 0.0:
        return e
    out = np.empty(n)
    out[0] = e[0] / np.sqrt(1.0 - rho * rho)
    for t in range(1, n):
        out[t] = rho * out[t - 1] + e[t]
    return out


def uip_panel(n: int, seed: int, alpha: float = 0.0, beta: float = 1.0,
              diff_sd: float = 0.01, noise_sd: float = 0.01,
              diff_rho: float = 0.0, noise_rho: float = 0.0,
              base_rate: float = 0.0003) -> tuple[RateSeries, RateSeries, RateSeries]:
    """Generate (exchange, rate_i, rate_j) satisfying
    s_{t+1} - s_t = alpha + beta * (i - j)_t + eps_t."""
    rng = np.random.default_rng(seed)
    diff = ar1(n, diff_rho, diff_sd, rng)
    eps = ar1(n, noise_rho, noise_sd, rng)
    s = np.zeros(n)
    for t in range(n - 1):
        s[t + 1] = s[t] + alpha + beta * diff[t] + eps[t]
    index = np.arange(n)
    exchange = RateSeries(index, np.exp(s))
    rate_j = RateSeries(index, np.full(n, base_rate))
    rate_i = RateSeries(index, base_rate + diff)
    return exchange, rate_i, rate_j
