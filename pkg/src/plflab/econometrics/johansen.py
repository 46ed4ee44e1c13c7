"""Johansen trace test for cointegration rank, restricted-constant case.

The deterministic specification pins the constant inside the cointegrating
relation (none outside), because the long-run relations of interest carry
their own constants. Critical values are the published Osterwald-Lenum
quantiles for that case, embedded for K - r up to 6.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .regression import InsufficientObservations


class NumericalFailure(RuntimeError):
    pass


#: Osterwald-Lenum (1992) trace-statistic quantiles, restricted constant:
#: K - r -> (95%, 99%).
_TRACE_CV = {
    1: (9.24, 12.97),
    2: (19.96, 24.60),
    3: (34.91, 41.07),
    4: (53.12, 60.16),
    5: (76.07, 84.45),
    6: (102.14, 111.01),
}


def trace_critical_values(k_minus_r: int, level: float = 0.05) -> float:
    if k_minus_r not in _TRACE_CV:
        raise ValueError(f"no critical values for K - r = {k_minus_r}")
    cv95, cv99 = _TRACE_CV[k_minus_r]
    if level == 0.05:
        return cv95
    if level == 0.01:
        return cv99
    raise ValueError("critical values embedded for the 5% and 1% levels only")


def _residualize(dep: np.ndarray, regressors: np.ndarray | None) -> np.ndarray:
    if regressors is None or regressors.shape[1] == 0:
        return dep
    coef, *_ = np.linalg.lstsq(regressors, dep, rcond=None)
    return dep - regressors @ coef


def reduced_rank_regression(y: np.ndarray, lags: int):
    """Concentrated eigenproblem of the VECM likelihood.

    Returns (T, eigenvalues desc, beta_star, z0, z1, z2) where beta_star
    columns are the candidate cointegrating vectors over [y_{t-1}, 1],
    normalized so beta' S11 beta = I. Eigen-solved by explicit Cholesky
    whitening of S11, which keeps the problem symmetric.
    """
    y = np.asarray(y, dtype=float)
    n, k = y.shape
    p = lags
    if p < 1:
        raise ValueError("lag order must be at least 1")
    if n <= p:
        raise InsufficientObservations(f"{n} rows cannot support lag order {p}")
    dy = np.diff(y, axis=0)
    t_range = np.arange(p, n)  # regression sample in level-row indices
    z0 = dy[t_range - 1]
    z1 = np.column_stack([y[t_range - 1], np.ones(len(t_range))])
    blocks = [dy[t_range - 1 - j] for j in range(1, p)]
    z2 = np.column_stack(blocks) if blocks else None

    r0 = _residualize(z0, z2)
    r1 = _residualize(z1, z2)
    t_obs = len(t_range)
    s00 = r0.T @ r0 / t_obs
    s01 = r0.T @ r1 / t_obs
    s11 = r1.T @ r1 / t_obs
    try:
        chol = np.linalg.cholesky(s11)
        chol_inv = np.linalg.inv(chol)
        middle = s01.T @ np.linalg.solve(s00, s01)
        whitened = chol_inv @ middle @ chol_inv.T
        eigvals, eigvecs = np.linalg.eigh((whitened + whitened.T) / 2.0)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"reduced-rank eigenproblem failed: {exc}") from exc
    order = np.argsort(eigvals)[::-1]
    eigvals = np.clip(eigvals[order], 0.0, 1.0 - 1e-15)
    beta_star = chol_inv.T @ eigvecs[:, order]
    return t_obs, eigvals, beta_star, z0, z1, z2


@dataclass
class JohansenResult:
    eigenvalues: np.ndarray  # K largest, descending
    trace_stats: np.ndarray  # statistic for H(r), r = 0..K-1
    crit_95: np.ndarray
    crit_99: np.ndarray
    selected_rank: int
    n_obs: int

    def table(self) -> list[dict]:
        rows = []
        for r, stat in enumerate(self.trace_stats):
            rows.append({
                "rank_tested": r,
                "eigenvalue": float(self.eigenvalues[r]),
                "trace_stat": float(stat),
                "crit_95": float(self.crit_95[r]),
                "crit_99": float(self.crit_99[r]),
                "reject_95": bool(stat >= self.crit_95[r]),
            })
        return rows


def johansen(panel: np.ndarray, lags: int) -> JohansenResult:
    """Trace-statistic rank selection on a (n x K) level panel.

    The selected rank is the smallest r whose trace statistic falls below
    the 5% critical value; K when every hypothesis is rejected.
    """
    panel = np.asarray(panel, dtype=float)
    if panel.ndim != 2:
        raise ValueError("panel must be two-dimensional (observations x series)")
    n, k = panel.shape
    if not 2 <= k <= 6:
        raise ValueError(f"rank test supports 2..6 series, got {k}")
    if n <= k * lags + 10:
        raise InsufficientObservations(
            f"need more than {k * lags + 10} observations for K={k}, p={lags}")
    t_obs, eigvals, _, _, _, _ = reduced_rank_regression(panel, lags)
    # The restricted-constant eigenproblem yields K+1 eigenvalues; the
    # likelihood ratio uses the K largest.
    lam = eigvals[:k]
    log_terms = np.log(1.0 - lam)
    trace = np.array([-t_obs * log_terms[r:].sum() for r in range(k)])
    crit95 = np.array([trace_critical_values(k - r, 0.05) for r in range(k)])
    crit99 = np.array([trace_critical_values(k - r, 0.01) for r in range(k)])
    selected = k
    for r in range(k):
        if trace[r] < crit95[r]:
            selected = r
            break
    return JohansenResult(lam, trace, crit95, crit99, selected, t_obs)
