"""Liquidity and fund-concentration analytics.

Operates on float-space series (panel or snapshot exports); band edges are
closed on the left and open on the right, except the top band which is
closed at its threshold and unbounded above - the convention for shading
"between 80% and 90%", "above 90%" and "at or beyond 100%" periods.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

DEFAULT_THRESHOLDS = (0.8, 0.9, 1.0)
DEFAULT_BAND_LABELS = ("mid", "high", "illiquid")


class AllZero(ValueError):
    """Concentration of an all-zero balance vector is undefined."""


@dataclass(frozen=True)
class Band:
    label: str
    start: int  # first index inside the band
    end: int    # one past the last index (half-open)


def _band_labels(thresholds: Sequence[float]) -> list[str]:
    if tuple(thresholds) == DEFAULT_THRESHOLDS:
        return list(DEFAULT_BAND_LABELS)
    labels = [f"[{lo:g},{hi:g})" for lo, hi in zip(thresholds, thresholds[1:])]
    labels.append(f">={thresholds[-1]:g}")
    return labels


def _band_index(u: float, thresholds: Sequence[float]) -> int:
    """-1 below the first threshold, else the highest threshold met (with
    intermediate bands half-open on the right)."""
    if u < thresholds[0]:
        return -1
    for i in range(len(thresholds) - 1):
        if u < thresholds[i + 1]:
            return i
    return len(thresholds) - 1


def illiquidity_bands(utilization: Sequence[float],
                      thresholds: Sequence[float] = DEFAULT_THRESHOLDS) -> list[Band]:
    """Maximal runs of consecutive periods inside each utilization band."""
    u = list(utilization)
    if not u:
        raise ValueError("empty utilization series")
    if list(thresholds) != sorted(thresholds) or len(thresholds) < 1:
        raise ValueError("thresholds must be non-empty and increasing")
    labels = _band_labels(thresholds)
    bands: list[Band] = []
    run_band = -2  # sentinel distinct from "below all thresholds"
    run_start = 0
    for i, value in enumerate(u):
        b = _band_index(value, thresholds)
        if b != run_band:
            if run_band >= 0:
                bands.append(Band(labels[run_band], run_start, i))
            run_band = b
            run_start = i
    if run_band >= 0:
        bands.append(Band(labels[run_band], run_start, len(u)))
    return bands


@dataclass
class ConcentrationCurve:
    """Descending balance shares and their cumulative curve."""

    balances: np.ndarray   # sorted descending
    shares: np.ndarray
    cumulative: np.ndarray

    def top_k_share(self, k: int) -> float:
        if k <= 0:
            return 0.0
        return float(self.cumulative[min(k, len(self.cumulative)) - 1])


def concentration(balances: Sequence[float]) -> ConcentrationCurve:
    """Cumulative share of locked funds by account rank."""
    arr = np.asarray(list(balances), dtype=float)
    if len(arr) == 0:
        raise ValueError("no balances")
    if np.any(arr < 0):
        raise ValueError("balances must be non-negative")
    total = arr.sum()
    if total == 0:
        raise AllZero("all balances are zero")
    ordered = np.sort(arr)[::-1]
    shares = ordered / total
    return ConcentrationCurve(ordered, shares, np.cumsum(shares))


def median_locked(values: Sequence[float]) -> float:
    """Median total locked value (mean of the middle pair for even length)."""
    arr = np.asarray(list(values), dtype=float)
    if len(arr) == 0:
        raise ValueError("no values")
    return float(np.median(arr))
