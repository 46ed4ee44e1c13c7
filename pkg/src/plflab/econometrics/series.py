"""Time-indexed observation series and frequency conversion."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

#: 15-second blocks.
BLOCKS_PER_DAY = 5760
BLOCKS_PER_WEEK = 7 * BLOCKS_PER_DAY


class EmptyInput(ValueError):
    pass


class Frequency(enum.Enum):
    DAILY = "daily"
    WEEKLY = "weekly"

    @property
    def blocks(self) -> int:
        return BLOCKS_PER_DAY if self is Frequency.DAILY else BLOCKS_PER_WEEK


@dataclass
class RateSeries:
    """Aligned observation series: strictly increasing period index plus a
    float vector of values (log exchange rates or per-period rates)."""

    index: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.index = np.asarray(self.index)
        self.values = np.asarray(self.values, dtype=float)
        if len(self.index) != len(self.values):
            raise ValueError("index and values must have equal length")
        if len(self.index) > 1 and not np.all(self.index[1:] > self.index[:-1]):
            raise ValueError("series index must be strictly increasing")
        if np.isnan(self.values).any():
            raise ValueError("series contains missing values")

    def __len__(self) -> int:
        return len(self.values)


def resample_blocks(blocks: np.ndarray, values: np.ndarray,
                    frequency: Frequency, kind: str = "mean",
                    blocks_per_day: int = BLOCKS_PER_DAY) -> RateSeries:
    """Aggregate a block-granularity series to daily or weekly periods.

    ``kind="mean"`` takes the period mean (rates); ``kind="last"`` takes the
    period-end value (exchange rates). A trailing partial period is kept and
    flagged in the metadata.
    """
    blocks = np.asarray(blocks)
    values = np.asarray(values, dtype=float)
    if len(blocks) == 0:
        raise EmptyInput("nothing to resample")
    if kind not in ("mean", "last"):
        raise ValueError(f"unknown aggregation {kind!r}")
    span = blocks_per_day if frequency is Frequency.DAILY else 7 * blocks_per_day
    period = blocks // span
    out_index = []
    out_values = []
    for p in np.unique(period):
        chunk = values[period == p]
        out_index.append(int(p))
        out_values.append(chunk.mean() if kind == "mean" else chunk[-1])
    full_span = (blocks.max() - out_index[-1] * span + 1) >= span
    meta = {"frequency": frequency.value, "partial_final_period": not full_span}
    return RateSeries(np.array(out_index), np.array(out_values), meta)
