"""Interest-rate models for loanable-funds markets.

Covers the three variable-rate families used by deployed lending protocols
(linear, non-linear, kinked), the Aave-style two-slope variable rate, the
cross-platform market rate, the stable borrow rate built on top of it, and
the two stable-rate revision rules. All rates here are per-block unless a
function says otherwise; :func:`annualize` converts for reporting.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Union

from .fixed_point import FixedDec, ONE, ZERO, pow_u

#: 15-second blocks: 4 * 60 * 24 * 365. Reporting convention only; the
#: measured contracts never publish their annualization constant.
BLOCKS_PER_YEAR = 2_102_400


class RateModelError(Exception):
    pass


class NotDefinedForModel(RateModelError):
    """The requested rate is not defined for this model family."""


class EmptyMarket(RateModelError):
    """Aggregation over platforms with zero total borrows."""


class IllFormedMarket(RateModelError):
    """Loans outstanding against zero gross deposits."""


def _require_non_negative(name: str, value: FixedDec) -> None:
    if value.is_negative():
        raise ValueError(f"{name} must be non-negative, got {value!r}")


def _require_fraction(name: str, value: FixedDec) -> None:
    if value.is_negative() or value > ONE:
        raise ValueError(f"{name} must lie in [0, 1], got {value!r}")


@dataclass(frozen=True)
class Linear:
    """i_b = alpha + beta * U; i_s = i_b * U."""

    alpha: FixedDec
    beta: FixedDec

    def __post_init__(self):
        _require_non_negative("alpha", self.alpha)
        _require_non_negative("beta", self.beta)


@dataclass(frozen=True)
class NonLinear:
    """i_b = alpha*U + beta*U^32 + gamma*U^64; i_s = (1-lambda) * i_b * U."""

    alpha: FixedDec
    beta: FixedDec
    gamma: FixedDec
    reserve_factor: FixedDec

    def __post_init__(self):
        _require_non_negative("alpha", self.alpha)
        _require_non_negative("beta", self.beta)
        _require_non_negative("gamma", self.gamma)
        _require_fraction("reserve_factor", self.reserve_factor)


@dataclass(frozen=True)
class Kinked:
    """Two linear segments meeting at u_star, slope beta below and gamma above."""

    alpha: FixedDec
    beta: FixedDec
    gamma: FixedDec
    u_star: FixedDec
    reserve_factor: FixedDec

    def __post_init__(self):
        _require_non_negative("alpha", self.alpha)
        _require_non_negative("beta", self.beta)
        _require_non_negative("gamma", self.gamma)
        _require_fraction("reserve_factor", self.reserve_factor)
        if self.u_star <= ZERO or self.u_star > ONE:
            raise ValueError(f"u_star must lie in (0, 1], got {self.u_star!r}")


@dataclass(frozen=True)
class AaveVariable:
    """Two-slope variable rate: slope1 up to u_optimal, slope2 beyond."""

    base: FixedDec
    u_optimal: FixedDec
    r_slope1: FixedDec
    r_slope2: FixedDec

    def __post_init__(self):
        _require_non_negative("base", self.base)
        _require_non_negative("r_slope1", self.r_slope1)
        _require_non_negative("r_slope2", self.r_slope2)
        if self.u_optimal <= ZERO or self.u_optimal > ONE:
            raise ValueError(f"u_optimal must lie in (0, 1], got {self.u_optimal!r}")


RateModel = Union[Linear, NonLinear, Kinked, AaveVariable]


@dataclass(frozen=True)
class PlatformBorrowState:
    """Per-platform borrow book: total borrowed at the prevailing rate, plus
    the variable/stable split used by the stable-rate revision rules."""

    borrow_rate: FixedDec
    borrowed: FixedDec
    variable_borrowed: FixedDec = ZERO
    variable_rate: FixedDec = ZERO
    stable_borrowed: FixedDec = ZERO
    stable_rate: FixedDec = ZERO

    def __post_init__(self):
        for name in ("borrowed", "variable_borrowed", "stable_borrowed"):
            _require_non_negative(name, getattr(self, name))


@dataclass(frozen=True)
class StablePosition:
    """A user's stable-rate borrow position and its revision window."""

    rate: FixedDec
    window_blocks: int
    delta: FixedDec

    def __post_init__(self):
        if self.window_blocks < 1:
            raise ValueError("adjustment window must be at least one block")


class RebalanceDecision(enum.Enum):
    UP = "up"
    DOWN = "down"
    NONE = "none"


def utilization(total_loans: FixedDec, gross_deposits: FixedDec) -> FixedDec:
    """U = L / A. Zero when the market is empty; may exceed 1 (Compound and
    dYdX both realize over-utilization, only Aave caps at 100%)."""
    _require_non_negative("total_loans", total_loans)
    _require_non_negative("gross_deposits", gross_deposits)
    if gross_deposits.is_zero():
        if total_loans.is_zero():
            return ZERO
        raise IllFormedMarket("loans outstanding with zero gross deposits")
    return total_loans / gross_deposits


def _two_slope(base: FixedDec, u: FixedDec, u_optimal: FixedDec,
               r_slope1: FixedDec, r_slope2: FixedDec) -> FixedDec:
    if u < u_optimal:
        return base + (u / u_optimal) * r_slope1
    if u_optimal == ONE:
        # Degenerate second branch: the (1 - u_optimal) denominator vanishes,
        # so the rate is pinned at base + r_slope1 from U = 1 on.
        return base + r_slope1
    excess = (u - u_optimal) / (ONE - u_optimal)
    return base + r_slope1 + excess * r_slope2


def borrow_rate(model: RateModel, u: FixedDec) -> FixedDec:
    """Per-block borrow rate at utilization u (u > 1 extrapolates the top
    segment of each family)."""
    _require_non_negative("u", u)
    if isinstance(model, Linear):
        return model.alpha + model.beta * u
    if isinstance(model, NonLinear):
        return model.alpha * u + model.beta * pow_u(u, 32) + model.gamma * pow_u(u, 64)
    if isinstance(model, Kinked):
        if u <= model.u_star:
            return model.alpha + model.beta * u
        return model.alpha + model.beta * model.u_star + model.gamma * (u - model.u_star)
    if isinstance(model, AaveVariable):
        return _two_slope(model.base, u, model.u_optimal, model.r_slope1, model.r_slope2)
    raise TypeError(f"unknown rate model {model!r}")


def saving_rate(model: RateModel, u: FixedDec) -> FixedDec:
    """Per-block saving rate at utilization u. Association order of the
    floor multiplies follows each family's published formula exactly."""
    _require_non_negative("u", u)
    i_b = borrow_rate(model, u)
    if isinstance(model, Linear):
        return i_b * u
    if isinstance(model, NonLinear):
        return (ONE - model.reserve_factor) * i_b * u
    if isinstance(model, Kinked):
        return u * (i_b * (ONE - model.reserve_factor))
    raise NotDefinedForModel("no deposit-side rate is specified for the Aave variable model")


def market_rate(platforms: list[PlatformBorrowState]) -> FixedDec:
    """Borrow-volume-weighted mean rate across platforms for one market."""
    total = ZERO
    weighted = ZERO
    for p in platforms:
        weighted = weighted + p.borrow_rate * p.borrowed
        total = total + p.borrowed
    if total.is_zero():
        raise EmptyMarket("market rate undefined with zero borrows on every platform")
    return weighted / total


def stable_rate(m_r: FixedDec, slopes: AaveVariable, u: FixedDec) -> FixedDec:
    """Stable borrow rate: the two-slope curve re-based on the market rate
    m_r (the `base` field of `slopes` is ignored)."""
    _require_non_negative("u", u)
    return _two_slope(m_r, u, slopes.u_optimal, slopes.r_slope1, slopes.r_slope2)


def rebalance_check(pos: StablePosition, mkt: PlatformBorrowState,
                    latest_stable: FixedDec) -> RebalanceDecision:
    """Stable-rate revision rules, evaluated on pre-accrual balances.

    Up when the user's stable rate has fallen below the book-weighted
    average borrow rate (they would otherwise earn carry on a borrow);
    down when it exceeds the latest stable rate by more than the allowed
    drift. Up takes priority when both hold.
    """
    book = mkt.variable_borrowed + mkt.stable_borrowed
    if book.is_zero():
        raise EmptyMarket("rebalance undefined with an empty borrow book")
    weighted_avg = (mkt.variable_borrowed * mkt.variable_rate
                    + mkt.stable_borrowed * mkt.stable_rate) / book
    if pos.rate < weighted_avg:
        return RebalanceDecision.UP
    if pos.rate > latest_stable * (ONE + pos.delta):
        return RebalanceDecision.DOWN
    return RebalanceDecision.NONE


def annualize(rate_per_block: FixedDec, blocks_per_year: int = BLOCKS_PER_YEAR) -> FixedDec:
    """Exact per-block -> annual scaling (simple, not compounded)."""
    return rate_per_block.mul_int(blocks_per_year)


def per_block(rate_per_year: FixedDec, blocks_per_year: int = BLOCKS_PER_YEAR) -> FixedDec:
    """Annual -> per-block scaling, floored to the mantissa grid."""
    return rate_per_year.div_int(blocks_per_year)


# Stand-in coefficients for the non-linear family: the production values are
# not public, so pin alpha:beta:gamma ~ 0.1:0.3:0.1 annualized with the sum
# chosen so the rate ceiling i_b(1) annualizes to 0.50 within 1e-12.
DEFAULT_NONLINEAR = NonLinear(
    alpha=FixedDec(47_564_687_976),
    beta=FixedDec(142_694_063_926),
    gamma=FixedDec(47_564_687_976),
    reserve_factor=ZERO,
)
