"""VECM estimation, impulse responses, and companion-matrix diagnostics.

The model is Delta y_t = alpha (beta' y_{t-1} + c) + sum Gamma_i
Delta y_{t-i} + eps with the constant restricted to the cointegrating
relations. beta is Phillips-normalized: relation j carries a unit
coefficient on variable j and zeros on the other leading variables, which
is the layout long-run relations are quoted in.
"""

from __future__ import annotations

import warnings as _warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, stats

from .johansen import NumericalFailure, johansen, reduced_rank_regression


class RankOutOfRange(ValueError):
    pass


class NonPsdCovariance(np.linalg.LinAlgError):
    pass


class NumericalWarning(UserWarning):
    pass


@dataclass
class VecmFit:
    k: int
    rank: int
    lags: int  # VAR order p; the VECM carries p-1 difference lags
    nu: np.ndarray            # implied intercept alpha @ beta_const, (K,)
    alpha: np.ndarray         # adjustment loadings, (K, r)
    beta: np.ndarray          # cointegrating vectors, (K, r), unit leading block
    beta_const: np.ndarray    # constants inside the relations, (r,)
    gamma: list[np.ndarray]   # short-run matrices, p-1 of shape (K, K)
    sigma: np.ndarray         # residual covariance, (K, K)
    residuals: np.ndarray     # (T, K)
    eigenvalues: np.ndarray
    trace_stats: np.ndarray
    selected_rank: int
    n_obs: int
    alpha_se: np.ndarray      # (K, r) conditional-on-beta standard errors
    warnings: list[str] = field(default_factory=list)

    def cointegrating_relations(self) -> list[dict]:
        """Relations as {series index -> coefficient, "const": c}."""
        rows = []
        for j in range(self.rank):
            rows.append({
                "coefficients": self.beta[:, j].tolist(),
                "const": float(self.beta_const[j]),
            })
        return rows


def vecm_fit(panel: np.ndarray, rank: int, lags: int) -> VecmFit:
    """Johansen maximum-likelihood VECM estimates at a fixed rank."""
    panel = np.asarray(panel, dtype=float)
    n, k = panel.shape
    if not 0 <= rank <= k:
        raise RankOutOfRange(f"rank must lie in [0, {k}], got {rank}")
    t_obs, eigvals, beta_star, z0, z1, z2 = reduced_rank_regression(panel, lags)

    fit_warnings: list[str] = []
    selected = rank
    trace_stats = np.array([])
    if 2 <= k <= 6:
        jres = johansen(panel, lags)
        selected = jres.selected_rank
        trace_stats = jres.trace_stats
        if rank > selected:
            msg = (f"rank {rank} exceeds the trace-test selection {selected}; "
                   "adjustment estimates may be spurious")
            fit_warnings.append(msg)
            _warnings.warn(msg, NumericalWarning)

    if rank > 0:
        raw = beta_star[:, :rank]  # over [y_{t-1}, 1]
        lead = raw[:rank, :]
        if abs(np.linalg.det(lead)) < 1e-12:
            raise NumericalFailure("leading block of beta is singular; "
                                   "reorder the panel columns")
        normalized = raw @ np.linalg.inv(lead)
        beta = normalized[:k, :]
        beta_const = normalized[k, :]
        ect = z1 @ normalized  # (T, r)
        regressors = ect if z2 is None else np.column_stack([ect, z2])
    else:
        beta = np.zeros((k, 0))
        beta_const = np.zeros(0)
        regressors = z2  # pure VAR in differences, no deterministic terms

    if regressors is None or regressors.shape[1] == 0:
        coef = np.zeros((0, k))
        residuals = z0.copy()
        xtx_inv = None
    else:
        coef, *_ = np.linalg.lstsq(regressors, z0, rcond=None)
        residuals = z0 - regressors @ coef
        xtx_inv = np.linalg.inv(regressors.T @ regressors)

    alpha = coef[:rank, :].T if rank > 0 else np.zeros((k, 0))
    gamma = []
    for i in range(lags - 1):
        start = rank + i * k
        gamma.append(coef[start:start + k, :].T)
    sigma = residuals.T @ residuals / t_obs
    nu = alpha @ beta_const if rank > 0 else np.zeros(k)

    if xtx_inv is not None and rank > 0:
        eq_var = np.diag(sigma)  # per-equation residual variance
        alpha_se = np.sqrt(np.outer(eq_var, np.diag(xtx_inv)[:rank]))
    else:
        alpha_se = np.zeros((k, rank))

    return VecmFit(
        k=k, rank=rank, lags=lags, nu=nu, alpha=alpha, beta=beta,
        beta_const=beta_const, gamma=gamma, sigma=sigma, residuals=residuals,
        eigenvalues=eigvals, trace_stats=trace_stats, selected_rank=selected,
        n_obs=t_obs, alpha_se=alpha_se, warnings=fit_warnings,
    )


def level_var_coefficients(fit: VecmFit) -> list[np.ndarray]:
    """A_1..A_p of the level VAR implied by the VECM."""
    k, p = fit.k, fit.lags
    pi = fit.alpha @ fit.beta.T if fit.rank > 0 else np.zeros((k, k))
    coeffs = []
    for i in range(1, p + 1):
        a = np.zeros((k, k))
        if i == 1:
            a += np.eye(k) + pi
        if i == 1 and p > 1:
            a += fit.gamma[0]
        if 2 <= i <= p - 1:
            a += fit.gamma[i - 1] - fit.gamma[i - 2]
        if i == p and p > 1:
            a -= fit.gamma[p - 2]
        coeffs.append(a)
    return coeffs


def companion_matrix(fit: VecmFit) -> np.ndarray:
    k, p = fit.k, fit.lags
    a = level_var_coefficients(fit)
    top = np.hstack(a)
    if p == 1:
        return top
    lower = np.hstack([np.eye(k * (p - 1)), np.zeros((k * (p - 1), k))])
    return np.vstack([top, lower])


@dataclass
class IrfResult:
    horizons: np.ndarray
    responses: np.ndarray  # (H+1, K, K): [h, i, j] = response of i to shock j

    def series(self, impulse: int, response: int) -> np.ndarray:
        return self.responses[:, response, impulse]


def irf(fit: VecmFit, horizon: int) -> IrfResult:
    """Orthogonalized impulse responses via the companion recursion.

    Shocks are identified by the Cholesky factor of the residual covariance
    in panel column order; horizon 0 returns the factor's columns.
    """
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    try:
        chol = np.linalg.cholesky(fit.sigma)
    except np.linalg.LinAlgError as exc:
        raise NonPsdCovariance("residual covariance is not positive definite") from exc
    a = level_var_coefficients(fit)
    k, p = fit.k, fit.lags
    psi = [np.eye(k)]
    for h in range(1, horizon + 1):
        acc = np.zeros((k, k))
        for i in range(1, min(h, p) + 1):
            acc += a[i - 1] @ psi[h - i]
        psi.append(acc)
    responses = np.stack([m @ chol for m in psi])
    return IrfResult(np.arange(horizon + 1), responses)


def long_run_impact(fit: VecmFit) -> np.ndarray:
    """Granger-representation long-run impact C = beta_perp
    (alpha_perp' (I - sum Gamma) beta_perp)^-1 alpha_perp'; the limit of the
    cumulative (or, for permanent shocks, the level) responses."""
    k, r = fit.k, fit.rank
    if r == k:
        return np.zeros((k, k))
    gamma_sum = sum(fit.gamma) if fit.gamma else np.zeros((k, k))
    if r == 0:
        return np.linalg.inv(np.eye(k) - gamma_sum)
    alpha_perp = linalg.null_space(fit.alpha.T)
    beta_perp = linalg.null_space(fit.beta.T)
    core = alpha_perp.T @ (np.eye(k) - gamma_sum) @ beta_perp
    return beta_perp @ np.linalg.inv(core) @ alpha_perp.T


@dataclass
class StabilityReport:
    roots: np.ndarray   # complex companion eigenvalues, |.| descending
    moduli: np.ndarray  # companion eigenvalue moduli, descending
    expected_unit_roots: int
    unit_roots_found: int
    outside_unit_circle: list[float]
    extra_near_unit: list[float]

    @property
    def ok(self) -> bool:
        return (self.unit_roots_found == self.expected_unit_roots
                and not self.outside_unit_circle
                and not self.extra_near_unit)


def stability_check(fit: VecmFit, unit_tol: float = 1e-6,
                    near_margin: float = 0.05) -> StabilityReport:
    """Companion eigenvalue diagnostic: a well-specified fit shows exactly
    K - r unit roots and everything else well inside the circle. Extra
    roots within `near_margin` of the circle indicate an overstated rank."""
    roots = np.linalg.eigvals(companion_matrix(fit))
    order = np.argsort(np.abs(roots))[::-1]
    roots = roots[order]
    moduli = np.abs(roots)
    expected = fit.k - fit.rank
    unit = int(np.sum(np.abs(moduli - 1.0) <= unit_tol))
    outside = [float(m) for m in moduli if m > 1.0 + unit_tol]
    rest = moduli[expected:]
    near = [float(m) for m in rest
            if m > 1.0 - near_margin and abs(m - 1.0) > unit_tol]
    return StabilityReport(roots, moduli, expected, unit, outside, near)


def ljung_box(residuals: np.ndarray, lags: int) -> list[tuple[float, float]]:
    """Per-column Ljung-Box portmanteau (stat, p-value); reported as a
    summary diagnostic, never a gate."""
    residuals = np.atleast_2d(np.asarray(residuals, dtype=float))
    if residuals.shape[0] == 1:
        residuals = residuals.T
    t_obs = residuals.shape[0]
    if not 0 < lags < t_obs:
        raise ValueError("lags must lie in (0, n)")
    results = []
    for col in residuals.T:
        centered = col - col.mean()
        denom = centered @ centered
        q = 0.0
        for k in range(1, lags + 1):
            rho = (centered[k:] @ centered[:-k]) / denom
            q += rho * rho / (t_obs - k)
        q *= t_obs * (t_obs + 2.0)
        results.append((float(q), float(stats.chi2.sf(q, df=lags))))
    return results
