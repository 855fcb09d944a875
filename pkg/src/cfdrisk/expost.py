"""Ex-post cost recovery, consumer prices and their spread across scenarios."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import core
from .cfd import CfDContract, payment
from .core import CfdType, Fleet, PlantProfile, Reference, Scenario, ScenarioEnsemble, ZONE_REFERENCE
from .errors import InputError, UndefinedRatioError

# Letter-value levels: median, quartiles, octiles, sixteenths.
SUMMARY_PERCENTILES = (6.25, 12.5, 25.0, 50.0, 75.0, 87.5, 93.75)


@dataclass(frozen=True)
class ExPostResult:
    plant_id: str
    zone: str
    scenario_id: str
    cfd_type: CfdType
    market_revenue: float
    payment: float
    cost: float

    @property
    def cost_recovery(self) -> float:
        """(market revenue + CfD payment) / annual cost."""
        return (self.market_revenue + self.payment) / self.cost


@dataclass(frozen=True)
class ConsumerPriceResult:
    zone: str
    scenario_id: str
    cfd_type: CfdType
    energy_price: float
    levy: float
    payments: float
    total_demand: float

    @property
    def total(self) -> float:
        return self.energy_price + self.levy


def cost_recovery(plant: PlantProfile, contract: CfDContract | None, fleet: Fleet | None, s: Scenario) -> ExPostResult:
    """Cost recovery of one plant in one scenario; no contract means market revenue only."""
    cost = core.annual_cost(plant, s)
    if not cost > 0:
        raise UndefinedRatioError(f"plant {plant.id} has zero cost in scenario {s.id}")
    if contract is None:
        paid, cfd_type = 0.0, CfdType.NONE
    else:
        paid, cfd_type = payment(contract, plant, fleet, s).payment, contract.cfd_type
    return ExPostResult(plant.id, plant.zone, s.id, cfd_type, core.market_revenue(plant, s), paid, cost)


def coefficient_of_variation(values, weights=None) -> float:
    """Population standard deviation over mean."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise InputError("no values")
    w = np.full(values.size, 1.0 / values.size) if weights is None else np.asarray(weights, dtype=float)
    mean = float(w @ values)
    if mean == 0:
        raise UndefinedRatioError("coefficient of variation undefined for zero mean")
    std = float(np.sqrt(w @ (values - mean) ** 2))
    return std / mean


def _zone_contracts(contracts: Iterable[CfDContract], zone: str, s: Scenario):
    for contract in contracts:
        plant = s.plants.get(contract.plant_id)
        if plant is not None and plant.zone == zone:
            yield contract, plant


def zone_payments(contracts: Iterable[CfDContract], zone: str, s: Scenario, reference: Reference = ZONE_REFERENCE) -> float:
    """Net payments of all contracted plants of ``zone`` present in the scenario."""
    return float(
        sum(payment(c, plant, reference.fleet(s, plant.id), s).payment for c, plant in _zone_contracts(contracts, zone, s))
    )


def consumer_price(
    zone: str,
    contracts: Sequence[CfDContract],
    s: Scenario,
    reference: Reference = ZONE_REFERENCE,
    cfd_type: CfdType | None = None,
) -> ConsumerPriceResult:
    """Demand-weighted spot price plus a uniform per-MWh levy financing the net payments."""
    demand = s.demand[zone]
    total_demand = float(demand.sum())
    if not total_demand > 0:
        raise UndefinedRatioError(f"zone {zone} has no demand in scenario {s.id}")
    if cfd_type is None:
        types = {c.cfd_type for c in contracts}
        cfd_type = types.pop() if len(types) == 1 else CfdType.NONE
    energy = float(s.prices[zone] @ demand) / total_demand
    paid = zone_payments(contracts, zone, s, reference)
    return ConsumerPriceResult(zone, s.id, CfdType(cfd_type), energy, paid / total_demand, paid, total_demand)


def distribution_summary(values) -> dict[str, float]:
    """Letter-value percentiles with linear interpolation between order statistics."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise InputError("no values")
    pct = np.percentile(values, SUMMARY_PERCENTILES)
    out = {"n": float(values.size), "mean": float(values.mean()), "min": float(values.min())}
    out.update({percentile_label(q): float(v) for q, v in zip(SUMMARY_PERCENTILES, pct)})
    out["max"] = float(values.max())
    return out


def percentile_label(q: float) -> str:
    return "median" if q == 50 else f"p{q:g}"


def evaluate(
    ensemble: ScenarioEnsemble,
    contracts: Sequence[CfDContract],
    reference: Reference = ZONE_REFERENCE,
    zones: Sequence[str] | None = None,
):
    """Cost recovery and consumer prices for every scenario, contract type and the no-CfD baseline.

    Returns:
        (list of ExPostResult, list of ConsumerPriceResult)
    """
    by_type = defaultdict(list)
    for c in contracts:
        by_type[c.cfd_type].append(c)
    plant_ids = list(dict.fromkeys(c.plant_id for c in contracts))
    types = [CfdType.NONE] + [t for t in core.CONTRACT_TYPES if t in by_type]
    if zones is None:
        zones = sorted({z for s in ensemble for z in s.demand})

    plant_rows, consumer_rows = [], []
    for s in ensemble:
        for cfd_type in types:
            type_contracts = {c.plant_id: c for c in by_type.get(cfd_type, [])}
            for pid in plant_ids:
                plant = s.plants.get(pid)
                if plant is None:
                    continue
                contract = type_contracts.get(pid)
                if cfd_type is not CfdType.NONE and contract is None:
                    continue
                fleet = reference.fleet(s, pid) if contract is not None and cfd_type is not CfdType.BASIC else None
                plant_rows.append(cost_recovery(plant, contract, fleet, s))
            for zone in zones:
                consumer_rows.append(consumer_price(zone, list(type_contracts.values()), s, reference, cfd_type))
    return plant_rows, consumer_rows


def cv_table(rows, key) -> dict:
    """CV per (key(row), cfd_type) across scenarios; rows are ExPost or consumer results."""
    groups = defaultdict(list)
    for row in rows:
        value = row.cost_recovery if isinstance(row, ExPostResult) else row.total
        groups[(key(row), row.cfd_type)].append(value)
    return {k: coefficient_of_variation(v) for k, v in groups.items()}
