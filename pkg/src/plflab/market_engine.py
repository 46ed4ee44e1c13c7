"""Block-level state machine for a single loanable-funds market.

The ledger carries gross deposits A, total loans L, reserves, and the
cumulative interest index. Interest accrues with the simple factor (1 + r*t)
over event-delimited intervals, at the rate fixed when the interval opened.
Every state-changing operation accrues first, returns a fresh state, and
never mutates its input, so identical event logs replay to bit-identical
states.

Reserve accounting differs by ceiling policy, mirroring the two deployed
designs:

* ``UNCAPPED`` (Compound / dYdX): reserves sit outside gross deposits, so A
  gains only the suppliers' (1 - reserve_factor) share of interest while L
  gains all of it. Sustained accrual near full utilization therefore pushes
  U above 100%, which is exactly how those protocols realize
  over-utilization.
* ``CAPPED`` (Aave): the reserve share is capitalized into deposits as
  protocol-owned supply, so L <= A survives accrual and available cash
  never goes negative.

Collateral is a single exogenously priced asset per market; the market
token itself is the unit of account for debt.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

from .fixed_point import FixedDec, ONE, ZERO
from .rate_models import RateModel, borrow_rate, saving_rate, utilization


class EngineError(Exception):
    pass


class InsufficientLiquidity(EngineError):
    """Redemption larger than the cash on hand (A - L)."""


class InsufficientShares(EngineError):
    pass


class InsufficientCash(EngineError):
    """Borrow larger than the cash on hand."""


class InsufficientCollateral(EngineError):
    pass


class ExceedsDebt(EngineError):
    pass


class NotUndercollateralized(EngineError):
    pass


class RepayTooLarge(EngineError):
    """Liquidation repay above the close-factor cap."""


class CeilingPolicy(enum.Enum):
    CAPPED = "capped"
    UNCAPPED = "uncapped"


@dataclass(frozen=True)
class Position:
    supplied_shares: FixedDec = ZERO
    debt_principal: FixedDec = ZERO
    debt_entry_index: FixedDec = ONE
    collateral_balance: FixedDec = ZERO


@dataclass(frozen=True)
class LiquidationParams:
    liquidation_threshold: FixedDec  # minimum collateral-value / debt-value ratio
    discount: FixedDec
    penalty: FixedDec
    close_factor: FixedDec = FixedDec(5 * 10**17)

    def __post_init__(self):
        if self.liquidation_threshold <= ONE:
            raise ValueError("liquidation threshold must exceed 1")
        for name in ("discount", "penalty"):
            v = getattr(self, name)
            if v.is_negative() or v >= ONE:
                raise ValueError(f"{name} must lie in [0, 1)")
        if self.close_factor <= ZERO or self.close_factor > ONE:
            raise ValueError("close factor must lie in (0, 1]")


@dataclass(frozen=True)
class MarketState:
    model: RateModel
    reserve_factor: FixedDec
    block_height: int = 0
    gross_deposits: FixedDec = ZERO
    total_loans: FixedDec = ZERO
    reserves: FixedDec = ZERO
    index: FixedDec = ONE
    derivative_supply: FixedDec = ZERO
    ceiling_policy: CeilingPolicy = CeilingPolicy.UNCAPPED
    collateral_price: FixedDec = ONE
    min_collateral_ratio: FixedDec = FixedDec(15 * 10**17)
    accruals: int = 0  # accrual intervals applied; bounds floor-drift in checks
    accounts: dict[str, Position] = field(default_factory=dict)

    def position(self, account: str) -> Position:
        return self.accounts.get(account, Position())


def _with_position(state: MarketState, account: str, pos: Position, **changes) -> MarketState:
    accounts = dict(state.accounts)
    accounts[account] = pos
    return replace(state, accounts=accounts, **changes)


def current_utilization(state: MarketState) -> FixedDec:
    return utilization(state.total_loans, state.gross_deposits)


def current_borrow_rate(state: MarketState) -> FixedDec:
    return borrow_rate(state.model, current_utilization(state))


def current_saving_rate(state: MarketState) -> FixedDec:
    return saving_rate(state.model, current_utilization(state))


def available_cash(state: MarketState) -> FixedDec:
    """Cash withdrawable by suppliers: A - L. Negative exactly when an
    uncapped market has accrued past full utilization."""
    return state.gross_deposits - state.total_loans


def debt_of(state: MarketState, account: str) -> FixedDec:
    """Current debt: principal scaled by index growth since entry, floored."""
    pos = state.position(account)
    if pos.debt_principal.is_zero():
        return ZERO
    return FixedDec(pos.debt_principal.mantissa * state.index.mantissa
                    // pos.debt_entry_index.mantissa)


def exchange_rate(state: MarketState) -> FixedDec:
    """Derivative-token redemption rate (A - reserves) / supply; 1 for a
    fresh market so the first mint prices at par."""
    if state.derivative_supply.is_zero():
        return ONE
    return (state.gross_deposits - state.reserves) / state.derivative_supply


def accrue(state: MarketState, to_block: int) -> MarketState:
    """Advance the clock, compounding index, loans, reserves and deposits
    at the borrow rate fixed at the start of the interval."""
    t = to_block - state.block_height
    if t < 0:
        raise ValueError(f"cannot accrue backwards: {to_block} < {state.block_height}")
    if t == 0:
        return state
    rate = current_borrow_rate(state)
    rt = rate.mul_int(t)
    interest = state.total_loans * rt
    reserve_cut = interest * state.reserve_factor
    if state.ceiling_policy is CeilingPolicy.CAPPED:
        deposit_gain = interest
    else:
        deposit_gain = interest - reserve_cut
    return replace(
        state,
        block_height=to_block,
        index=state.index * (ONE + rt),
        total_loans=state.total_loans + interest,
        reserves=state.reserves + reserve_cut,
        gross_deposits=state.gross_deposits + deposit_gain,
        accruals=state.accruals + 1,
    )


def _accrued(state: MarketState, block: int | None) -> MarketState:
    return state if block is None else accrue(state, block)


def mint(state: MarketState, account: str, amount: FixedDec,
         block: int | None = None) -> MarketState:
    state = _accrued(state, block)
    if amount <= ZERO:
        raise ValueError("mint amount must be positive")
    shares = amount / exchange_rate(state)
    pos = state.position(account)
    return _with_position(
        state, account,
        replace(pos, supplied_shares=pos.supplied_shares + shares),
        gross_deposits=state.gross_deposits + amount,
        derivative_supply=state.derivative_supply + shares,
    )


def redeem(state: MarketState, account: str, shares: FixedDec,
           block: int | None = None) -> MarketState:
    state = _accrued(state, block)
    if shares <= ZERO:
        raise ValueError("redeem shares must be positive")
    pos = state.position(account)
    if shares > pos.supplied_shares:
        raise InsufficientShares(f"{account} holds {pos.supplied_shares!r}, asked {shares!r}")
    payout = shares * exchange_rate(state)
    if payout > available_cash(state):
        raise InsufficientLiquidity(
            f"payout {payout!r} exceeds cash on hand {available_cash(state)!r}")
    return _with_position(
        state, account,
        replace(pos, supplied_shares=pos.supplied_shares - shares),
        gross_deposits=state.gross_deposits - payout,
        derivative_supply=state.derivative_supply - shares,
    )


def borrow(state: MarketState, account: str, amount: FixedDec,
           block: int | None = None) -> MarketState:
    state = _accrued(state, block)
    if amount.is_negative():
        raise ValueError("borrow amount must be non-negative")
    if amount.is_zero():
        return state
    if amount > available_cash(state):
        raise InsufficientCash(
            f"borrow {amount!r} exceeds cash on hand {available_cash(state)!r}")
    pos = state.position(account)
    debt = debt_of(state, account)
    collateral_value = pos.collateral_balance * state.collateral_price
    if collateral_value < state.min_collateral_ratio * (debt + amount):
        raise InsufficientCollateral(
            f"{account}: collateral {collateral_value!r} below required ratio")
    return _with_position(
        state, account,
        replace(pos, debt_principal=debt + amount, debt_entry_index=state.index),
        total_loans=state.total_loans + amount,
    )


def repay(state: MarketState, account: str, amount: FixedDec,
          block: int | None = None) -> MarketState:
    state = _accrued(state, block)
    if amount <= ZERO:
        raise ValueError("repay amount must be positive")
    debt = debt_of(state, account)
    if amount > debt:
        raise ExceedsDebt(f"repay {amount!r} exceeds debt {debt!r}")
    pos = state.position(account)
    new_loans = state.total_loans - amount
    if new_loans.is_negative():
        new_loans = ZERO  # floor-rounding dust from per-account index scaling
    return _with_position(
        state, account,
        replace(pos, debt_principal=debt - amount, debt_entry_index=state.index),
        total_loans=new_loans,
    )


def deposit_collateral(state: MarketState, account: str, units: FixedDec,
                       block: int | None = None) -> MarketState:
    state = _accrued(state, block)
    if units <= ZERO:
        raise ValueError("collateral amount must be positive")
    pos = state.position(account)
    return _with_position(
        state, account,
        replace(pos, collateral_balance=pos.collateral_balance + units))


def liquidate(state: MarketState, params: LiquidationParams, liquidator: str,
              borrower: str, repay_amount: FixedDec,
              block: int | None = None) -> MarketState:
    """Repay part of an undercollateralized borrower's debt, seizing
    collateral at a discount; the penalty share of the seizure is sold to
    the pool at the oracle price and booked as reserves."""
    state = _accrued(state, block)
    if repay_amount <= ZERO:
        raise ValueError("liquidation repay must be positive")
    debt = debt_of(state, borrower)
    pos = state.position(borrower)
    collateral_value = pos.collateral_balance * state.collateral_price
    if debt.is_zero() or collateral_value >= params.liquidation_threshold * debt:
        raise NotUndercollateralized(f"{borrower} is above the liquidation threshold")
    if repay_amount > params.close_factor * debt:
        raise RepayTooLarge(
            f"repay {repay_amount!r} above close factor cap {(params.close_factor * debt)!r}")
    seized = (repay_amount / (ONE - params.discount)) / state.collateral_price
    penalty_value = params.penalty * repay_amount
    penalty_units = penalty_value / state.collateral_price
    total_taken = seized + penalty_units
    if total_taken > pos.collateral_balance:
        raise InsufficientCollateral(
            f"{borrower}: seizure {total_taken!r} exceeds collateral {pos.collateral_balance!r}")
    new_loans = state.total_loans - repay_amount
    if new_loans.is_negative():
        new_loans = ZERO
    accounts = dict(state.accounts)
    accounts[borrower] = replace(
        pos,
        debt_principal=debt - repay_amount,
        debt_entry_index=state.index,
        collateral_balance=pos.collateral_balance - total_taken,
    )
    liq_pos = accounts.get(liquidator, Position())
    accounts[liquidator] = replace(
        liq_pos, collateral_balance=liq_pos.collateral_balance + seized)
    return replace(
        state,
        accounts=accounts,
        total_loans=new_loans,
        reserves=state.reserves + penalty_value,
        gross_deposits=state.gross_deposits + penalty_value,
    )


def set_model(state: MarketState, model: RateModel, block: int | None = None) -> MarketState:
    """Swap the rate model; accrues first so the old model prices its own
    final interval."""
    state = _accrued(state, block)
    return replace(state, model=model)


def set_price(state: MarketState, price: FixedDec, block: int | None = None) -> MarketState:
    state = _accrued(state, block)
    if price <= ZERO:
        raise ValueError("collateral price must be positive")
    return replace(state, collateral_price=price)


def check_invariants(state: MarketState) -> None:
    """Assert the ledger invariants; used by property tests and the
    simulator's paranoid mode."""
    assert not state.gross_deposits.is_negative()
    assert not state.total_loans.is_negative()
    assert not state.reserves.is_negative()
    assert not state.derivative_supply.is_negative()
    assert state.index >= ONE
    share_sum = ZERO
    for pos in state.accounts.values():
        share_sum = share_sum + pos.supplied_shares
    assert share_sum == state.derivative_supply, "share ledger out of sync"
    if state.ceiling_policy is CeilingPolicy.CAPPED:
        assert state.total_loans <= state.gross_deposits, "capped market over-utilized"
    debt_sum = 0
    for account in state.accounts:
        debt_sum += debt_of(state, account).mantissa
    # Per-account index scaling floors independently of the market ledger,
    # so the two drift by at most a few mantissa units per accrual interval.
    slack = (len(state.accounts) + 2) * (state.accruals + 1)
    assert abs(debt_sum - state.total_loans.mantissa) <= slack, (
        f"debt ledger out of sync: {debt_sum} vs {state.total_loans.mantissa}")
