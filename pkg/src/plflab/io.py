"""File formats: model parameter JSON, scenario JSON, snapshot/event CSV,
and the observation panel CSV consumed by the analytics and econometrics
commands.

Conventions: CSV is RFC-4180, UTF-8, mandatory header row, '.' decimal
separator, ISO-8601 dates. Protocol-side quantities serialize as FixedDec
decimal strings with exactly 18 fractional digits; rate-model parameters
serialize as raw 1e18-mantissa integer strings (the way the on-chain
parameterizations are quoted). Econometrics-side panels are plain floats.
"""

from __future__ import annotations

import csv
import json
import os
from importlib import resources
from pathlib import Path

import pandas as pd

from .fixed_point import FixedDec, ZERO
from .market_engine import CeilingPolicy, LiquidationParams
from .rate_models import AaveVariable, Kinked, Linear, NonLinear, RateModel
from .simulator import AgentKind, AgentSpec, Event, Scenario, SimOutput

SCENARIO_SCHEMA_VERSION = 1

SNAPSHOT_COLUMNS = ["block", "A", "L", "reserves", "index",
                    "utilization", "borrow_rate", "supply_rate"]
EVENT_COLUMNS = ["block", "action", "account", "amount"]
PANEL_COLUMNS = ["date", "platform", "market", "borrow_rate", "supply_rate",
                 "total_supply", "total_borrows"]


class SchemaError(ValueError):
    """Input file violates a documented schema."""


def data_root() -> Path:
    return Path(os.environ.get("PLFLAB_DATA_DIR", "."))


def resolve_input(path: str | Path) -> Path:
    """Resolve a user-supplied input path, falling back to PLFLAB_DATA_DIR
    for relative names that do not exist in the working directory."""
    p = Path(path)
    if p.is_absolute() or p.exists():
        return p
    candidate = data_root() / p
    return candidate if candidate.exists() else p


# -- rate model parameter files -----------------------------------------


def _mantissa(obj: dict, key: str, default: FixedDec | None = None) -> FixedDec:
    if key not in obj:
        if default is not None:
            return default
        raise SchemaError(f"model is missing required parameter {key!r}")
    try:
        return FixedDec(int(obj[key]))
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"parameter {key!r} must be a 1e18-mantissa integer string") from exc


def model_from_dict(obj: dict) -> RateModel:
    kind = obj.get("model")
    if kind == "linear":
        return Linear(alpha=_mantissa(obj, "alpha"), beta=_mantissa(obj, "beta"))
    if kind == "nonlinear":
        return NonLinear(alpha=_mantissa(obj, "alpha"), beta=_mantissa(obj, "beta"),
                         gamma=_mantissa(obj, "gamma"),
                         reserve_factor=_mantissa(obj, "lambda", ZERO))
    if kind == "kinked":
        return Kinked(alpha=_mantissa(obj, "alpha"), beta=_mantissa(obj, "beta"),
                      gamma=_mantissa(obj, "gamma"), u_star=_mantissa(obj, "u_star"),
                      reserve_factor=_mantissa(obj, "lambda", ZERO))
    if kind == "aave":
        return AaveVariable(base=_mantissa(obj, "base"),
                            u_optimal=_mantissa(obj, "u_optimal"),
                            r_slope1=_mantissa(obj, "r_slope1"),
                            r_slope2=_mantissa(obj, "r_slope2"))
    raise SchemaError(f"unknown model discriminator {kind!r}")


def model_to_dict(model: RateModel, effective_from_block: int | None = None) -> dict:
    if isinstance(model, Linear):
        obj = {"model": "linear", "alpha": str(model.alpha.mantissa),
               "beta": str(model.beta.mantissa)}
    elif isinstance(model, NonLinear):
        obj = {"model": "nonlinear", "alpha": str(model.alpha.mantissa),
               "beta": str(model.beta.mantissa), "gamma": str(model.gamma.mantissa),
               "lambda": str(model.reserve_factor.mantissa)}
    elif isinstance(model, Kinked):
        obj = {"model": "kinked", "alpha": str(model.alpha.mantissa),
               "beta": str(model.beta.mantissa), "gamma": str(model.gamma.mantissa),
               "u_star": str(model.u_star.mantissa),
               "lambda": str(model.reserve_factor.mantissa)}
    elif isinstance(model, AaveVariable):
        obj = {"model": "aave", "base": str(model.base.mantissa),
               "u_optimal": str(model.u_optimal.mantissa),
               "r_slope1": str(model.r_slope1.mantissa),
               "r_slope2": str(model.r_slope2.mantissa)}
    else:
        raise TypeError(f"unknown rate model {model!r}")
    if effective_from_block is not None:
        obj["effective_from_block"] = effective_from_block
    return obj


def load_models(path: str | Path) -> list[tuple[int, RateModel]]:
    """Load a model file: a single model object or a schedule of them,
    returned as (effective_from_block, model) sorted by block."""
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    entries = raw if isinstance(raw, list) else [raw]
    out = []
    for obj in entries:
        if not isinstance(obj, dict):
            raise SchemaError("model entries must be JSON objects")
        out.append((int(obj.get("effective_from_block", 0)), model_from_dict(obj)))
    out.sort(key=lambda pair: pair[0])
    return out


def bundled_cdai_schedule() -> list[tuple[int, RateModel]]:
    """The ten cDAI parameterizations from 17 Dec 2019 through 27 Apr 2020,
    block offsets measured from the first row at 5760 blocks/day."""
    ref = resources.files("plflab").joinpath("data/cdai_schedule.json")
    with resources.as_file(ref) as path:
        return load_models(path)


def bundled_reference_scenario_path() -> Path:
    ref = resources.files("plflab").joinpath("data/reference_scenario.json")
    with resources.as_file(ref) as path:
        return Path(path)


# -- scenario files ------------------------------------------------------


def _fixed(obj: dict, key: str) -> FixedDec:
    if key not in obj:
        raise SchemaError(f"missing required field {key!r}")
    try:
        return FixedDec.parse(str(obj[key]))
    except ValueError as exc:
        raise SchemaError(f"field {key!r}: {exc}") from exc


def scenario_from_dict(obj: dict) -> Scenario:
    version = obj.get("schema_version")
    if version != SCENARIO_SCHEMA_VERSION:
        raise SchemaError(f"unsupported scenario schema_version {version!r}")
    try:
        seed = int(obj["rng_seed"])
        horizon = int(obj["horizon_blocks"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad or missing rng_seed/horizon_blocks: {exc}") from exc
    policy_text = obj.get("ceiling_policy", "uncapped")
    try:
        policy = CeilingPolicy(policy_text)
    except ValueError as exc:
        raise SchemaError(f"unknown ceiling_policy {policy_text!r}") from exc
    agents = []
    for i, spec in enumerate(obj.get("agents", [])):
        kind_text = spec.get("kind")
        try:
            kind = AgentKind(kind_text)
        except ValueError as exc:
            raise SchemaError(f"agent {i}: unknown kind {kind_text!r}") from exc
        agents.append(AgentSpec(
            kind=kind,
            target_rate=_fixed(spec, "target_rate"),
            size=_fixed(spec, "size"),
            responsiveness=_fixed(spec, "responsiveness"),
            noise_scale=_fixed(spec, "noise_scale"),
        ))
    schedule = []
    for entry in obj.get("model_schedule", []):
        schedule.append((int(entry.get("effective_from_block", 0)),
                         model_from_dict(entry)))
    prices = []
    for entry in obj.get("price_path", []):
        prices.append((int(entry["block"]), _fixed(entry, "price")))
    liq = obj.get("liquidation")
    if liq is None:
        liquidation = Scenario.__dataclass_fields__["liquidation"].default
    else:
        liquidation = LiquidationParams(
            liquidation_threshold=_fixed(liq, "threshold"),
            discount=_fixed(liq, "discount"),
            penalty=_fixed(liq, "penalty"),
            close_factor=(_fixed(liq, "close_factor")
                          if "close_factor" in liq else FixedDec(5 * 10**17)),
        )
    try:
        return Scenario(
            rng_seed=seed, horizon_blocks=horizon, agents=tuple(agents),
            model_schedule=tuple(schedule), price_path=tuple(prices),
            ceiling_policy=policy, liquidation=liquidation,
        )
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc


def scenario_to_dict(scenario: Scenario) -> dict:
    return {
        "schema_version": SCENARIO_SCHEMA_VERSION,
        "rng_seed": scenario.rng_seed,
        "horizon_blocks": scenario.horizon_blocks,
        "ceiling_policy": scenario.ceiling_policy.value,
        "agents": [
            {
                "kind": a.kind.value,
                "target_rate": a.target_rate.to_decimal_string(),
                "size": a.size.to_decimal_string(),
                "responsiveness": a.responsiveness.to_decimal_string(),
                "noise_scale": a.noise_scale.to_decimal_string(),
            }
            for a in scenario.agents
        ],
        "model_schedule": [model_to_dict(m, block) for block, m in scenario.model_schedule],
        "price_path": [
            {"block": block, "price": price.to_decimal_string()}
            for block, price in scenario.price_path
        ],
        "liquidation": {
            "threshold": scenario.liquidation.liquidation_threshold.to_decimal_string(),
            "discount": scenario.liquidation.discount.to_decimal_string(),
            "penalty": scenario.liquidation.penalty.to_decimal_string(),
            "close_factor": scenario.liquidation.close_factor.to_decimal_string(),
        },
    }


def load_scenario(path: str | Path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return scenario_from_dict(json.load(fh))


def write_json(obj, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


# -- snapshot and event CSV ----------------------------------------------


def write_snapshot_csv(out: SimOutput, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SNAPSHOT_COLUMNS)
        for i, block in enumerate(out.blocks):
            writer.writerow([
                block,
                out.gross_deposits[i].to_decimal_string(),
                out.total_loans[i].to_decimal_string(),
                out.reserves[i].to_decimal_string(),
                out.index[i].to_decimal_string(),
                out.utilization[i].to_decimal_string(),
                out.borrow_rate[i].to_decimal_string(),
                out.supply_rate[i].to_decimal_string(),
            ])


def read_snapshot_csv(path: str | Path) -> dict[str, list]:
    """Parse a snapshot CSV back into columns of ints/FixedDec."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != SNAPSHOT_COLUMNS:
            raise SchemaError(f"snapshot header {header} != {SNAPSHOT_COLUMNS}")
        columns: dict[str, list] = {name: [] for name in SNAPSHOT_COLUMNS}
        for row in reader:
            if len(row) != len(SNAPSHOT_COLUMNS):
                raise SchemaError(f"snapshot row has {len(row)} fields")
            columns["block"].append(int(row[0]))
            for name, text in zip(SNAPSHOT_COLUMNS[1:], row[1:]):
                columns[name].append(FixedDec.parse(text))
    return columns


def write_events_csv(events: list[Event], path: str | Path) -> None:
    """Event log: liquidations store "liquidator:borrower" in the account
    column; set_model stores the model family name."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(EVENT_COLUMNS)
        for e in events:
            writer.writerow([e.block, e.action, e.account, e.amount.to_decimal_string()])


def read_events_csv(path: str | Path) -> list[Event]:
    events = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != EVENT_COLUMNS:
            raise SchemaError(f"event header {header} != {EVENT_COLUMNS}")
        for row in reader:
            events.append(Event(int(row[0]), row[1], row[2], FixedDec.parse(row[3])))
    return events


# -- observation panel ----------------------------------------------------


def read_panel_csv(path: str | Path) -> pd.DataFrame:
    """Observation panel: date,platform,market,borrow_rate,supply_rate,
    total_supply,total_borrows with annualized decimal rates."""
    frame = pd.read_csv(path)
    missing = [c for c in PANEL_COLUMNS if c not in frame.columns]
    if missing:
        raise SchemaError(f"panel is missing columns {missing}")
    try:
        frame["date"] = pd.to_datetime(frame["date"], format="ISO8601")
    except (ValueError, TypeError) as exc:
        raise SchemaError(f"panel dates must be ISO-8601: {exc}") from exc
    for col in PANEL_COLUMNS[3:]:
        frame[col] = pd.to_numeric(frame[col], errors="raise")
    return frame


def read_prices_csv(path: str | Path) -> pd.DataFrame:
    """Market price series for UIP exchange rates: date,market,price."""
    frame = pd.read_csv(path)
    missing = [c for c in ("date", "market", "price") if c not in frame.columns]
    if missing:
        raise SchemaError(f"prices file is missing columns {missing}")
    frame["date"] = pd.to_datetime(frame["date"], format="ISO8601")
    frame["price"] = pd.to_numeric(frame["price"], errors="raise")
    if (frame["price"] <= 0).any():
        raise SchemaError("prices must be strictly positive")
    return frame


def read_balances_csv(path: str | Path) -> pd.DataFrame:
    """Account balance snapshot for concentration curves: account,balance."""
    frame = pd.read_csv(path)
    missing = [c for c in ("account", "balance") if c not in frame.columns]
    if missing:
        raise SchemaError(f"balances file is missing columns {missing}")
    frame["balance"] = pd.to_numeric(frame["balance"], errors="raise")
    return frame
