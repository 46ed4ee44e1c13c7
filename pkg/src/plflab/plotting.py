"""Figure rendering for the CLI report paths.

Every report command drops PNG figures next to its delimited output:
utilization/rate traces with shaded illiquidity bands, the realized-
utilization histogram around the kink, rate-curve surfaces, cumulative
fund-concentration curves, impulse responses, and the companion-root
circle. Figures are presentation artifacts; the CSV/JSON outputs stay the
machine-readable contract.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .analytics import Band
from .econometrics.vecm import IrfResult, StabilityReport

BAND_COLORS = {"mid": "#fa8072", "high": "#d62728", "illiquid": "#8b0000"}

plt.rcParams.update({
    "figure.figsize": (8.0, 4.5),
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 10,
})


def _save(fig, path) -> None:
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def simulation_series_figure(blocks, utilization, borrow_rate, supply_rate,
                             u_star: float | None, path) -> None:
    """Utilization and annualized rates over the run, kink marked."""
    fig, (ax_u, ax_r) = plt.subplots(2, 1, sharex=True, figsize=(8, 6))
    ax_u.plot(blocks, utilization, lw=0.7, color="#1f77b4")
    if u_star is not None:
        ax_u.axhline(u_star, color="#d62728", ls="--", lw=1, label=f"kink U*={u_star:g}")
        ax_u.legend(loc="lower right")
    ax_u.set_ylabel("utilization")
    ax_r.plot(blocks, borrow_rate, lw=0.7, color="#ff7f0e", label="borrow")
    ax_r.plot(blocks, supply_rate, lw=0.7, color="#2ca02c", label="supply")
    ax_r.set_ylabel("annualized rate")
    ax_r.set_xlabel("block")
    ax_r.legend(loc="lower right")
    _save(fig, path)


def utilization_histogram_figure(utilization, u_star: float | None, path,
                                 bin_width: float = 0.01) -> None:
    fig, ax = plt.subplots()
    top = max(1.0, max(utilization) if len(utilization) else 1.0)
    bins = np.arange(0.0, top + 2 * bin_width, bin_width)
    ax.hist(utilization, bins=bins, color="#1f77b4", edgecolor="white", lw=0.3)
    if u_star is not None:
        ax.axvline(u_star, color="#d62728", ls="--", lw=1, label=f"kink U*={u_star:g}")
        ax.legend()
    ax.set_xlabel("realized utilization")
    ax.set_ylabel("blocks")
    _save(fig, path)


def rate_curve_figure(grid, borrow, supply, u_star: float | None, path) -> None:
    fig, ax = plt.subplots()
    ax.plot(grid, borrow, color="#1f77b4", label="borrow rate")
    ax.plot(grid, supply, color="#2ca02c", label="supply rate")
    if u_star is not None:
        ax.axvline(u_star, color="#d62728", ls="--", lw=1, label=f"kink U*={u_star:g}")
    ax.set_xlabel("utilization")
    ax.set_ylabel("annualized rate")
    ax.legend()
    _save(fig, path)


def liquidity_figure(dates, total_supply, total_borrows, bands: list[Band],
                     title: str, path) -> None:
    """Supply vs borrows with illiquidity periods shaded by severity."""
    fig, ax = plt.subplots()
    for band in bands:
        color = BAND_COLORS.get(band.label, "#fa8072")
        lo = dates[band.start]
        hi = dates[min(band.end, len(dates) - 1)]
        ax.axvspan(lo, hi, color=color, alpha=0.3, lw=0)
    ax.plot(dates, total_supply, color="#1f77b4", label="total supply")
    ax.plot(dates, total_borrows, color="#ff7f0e", label="total borrows")
    ax.set_title(title)
    ax.set_ylabel("funds")
    ax.legend()
    fig.autofmt_xdate()
    _save(fig, path)


def concentration_figure(cumulative, title: str, path) -> None:
    fig, ax = plt.subplots()
    ranks = np.arange(1, len(cumulative) + 1)
    ax.step(ranks, cumulative, where="post", color="#1f77b4")
    ax.set_xscale("log")
    ax.set_ylim(0, 1.02)
    ax.set_xlabel("accounts (by balance, descending)")
    ax.set_ylabel("cumulative share of locked funds")
    ax.set_title(title)
    _save(fig, path)


def irf_figure(result: IrfResult, names: list[str], impulse: int, path) -> None:
    """Responses of every series to one orthogonalized shock."""
    fig, ax = plt.subplots()
    for i, name in enumerate(names):
        ax.plot(result.horizons, result.series(impulse, i), label=name)
    ax.axhline(0.0, color="black", lw=0.5)
    ax.set_xlabel("horizon")
    ax.set_ylabel("response")
    ax.set_title(f"impulse: {names[impulse]}")
    ax.legend()
    _save(fig, path)


def stability_figure(report: StabilityReport, path) -> None:
    """Companion-matrix roots in the complex plane against the unit circle."""
    fig, ax = plt.subplots(figsize=(5, 5))
    theta = np.linspace(0, 2 * np.pi, 256)
    ax.plot(np.cos(theta), np.sin(theta), color="black", lw=0.8)
    ax.scatter(report.roots.real, report.roots.imag, color="#1f77b4", zorder=3)
    ax.set_aspect("equal")
    ax.set_xlabel("real")
    ax.set_ylabel("imaginary")
    ax.set_title(f"companion roots ({report.unit_roots_found} unit, "
                 f"{report.expected_unit_roots} expected)")
    _save(fig, path)


def uip_coefficients_figure(pairs, betas, ses, path) -> None:
    """Per-pair slope estimates with 95% bands against the UIP value 1."""
    fig, ax = plt.subplots(figsize=(8, max(3, 0.35 * len(pairs))))
    y = np.arange(len(pairs))
    ax.errorbar(betas, y, xerr=1.96 * np.asarray(ses), fmt="o",
                color="#1f77b4", ecolor="#1f77b4", capsize=3)
    ax.axvline(1.0, color="#d62728", ls="--", lw=1, label="UIP (beta = 1)")
    ax.axvline(0.0, color="black", lw=0.5)
    ax.set_yticks(y, pairs)
    ax.set_xlabel("beta with 95% band")
    ax.legend()
    _save(fig, path)
