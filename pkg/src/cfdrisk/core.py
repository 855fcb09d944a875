"""Domain types and per-scenario plant metrics.

Currency is EUR throughout, energy is MWh and one time step is one hour, so
power in MW times one step gives MWh. All metrics return 0 when the
generation (or capacity) they divide by is zero; strike computations guard
against that case themselves.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DimensionError, InputError

HOURS_PER_YEAR = 8760
HOUR_DURATION = 1.0


def _frozen_array(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be one-dimensional, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


def annuity_factor(interest_rate: float, lifetime: float) -> float:
    """Capital recovery factor r / (1 - (1 + r)^-n); 1/n for r == 0."""
    if lifetime <= 0:
        raise InputError("lifetime must be positive")
    if interest_rate == 0:
        return 1.0 / lifetime
    return interest_rate / (1.0 - (1.0 + interest_rate) ** (-lifetime))


class PlantLabel(str, Enum):
    HIGH_FLH = "HighFLH"
    HIGH_MV = "HighMV"
    REFERENCE = "Reference"
    OTHER = "Other"


@dataclass(frozen=True)
class TimeGrid:
    hours: int = HOURS_PER_YEAR
    hour_duration: float = HOUR_DURATION

    def __post_init__(self):
        if self.hours < 1:
            raise InputError("a time grid needs at least one hour")
        if self.hour_duration != HOUR_DURATION:
            raise InputError("only hourly resolution is supported")


@dataclass(frozen=True)
class BiddingZone:
    id: str
    name: str = ""


@dataclass(frozen=True)
class CostParameters:
    """Cost assumptions of the (single) plant technology.

    Attributes:
        variable_cost: EUR/MWh produced.
        annuity_factor: 1/year, converts the investment into a yearly cost.
        invest_cost: EUR/MW installed.
    """

    variable_cost: float
    annuity_factor: float
    invest_cost: float

    def __post_init__(self):
        if self.annuity_factor <= 0:
            raise InputError("annuity factor must be positive")
        if self.invest_cost < 0 or self.variable_cost < 0:
            raise InputError("costs must be non-negative")

    @property
    def fixed_cost_per_mw(self) -> float:
        """Annualised investment cost A*M in EUR/MW/year."""
        return self.annuity_factor * self.invest_cost

    @classmethod
    def from_financials(cls, variable_cost, invest_cost, interest_rate, lifetime):
        return cls(variable_cost, annuity_factor(interest_rate, lifetime), invest_cost)


# Assumed onshore wind costs. Not taken from any measured source: 1.2 MEUR/MW,
# 5 % over 25 years, 2 EUR/MWh variable O&M.
DEFAULT_WIND_COSTS = CostParameters.from_financials(
    variable_cost=2.0, invest_cost=1.2e6, interest_rate=0.05, lifetime=25
)


@dataclass(frozen=True)
class PlantProfile:
    """A wind plant as realised in one scenario.

    Generation in hour t is ``capacity_factors[t] * capacity`` (MWh).
    """

    id: str
    zone: str
    capacity: float
    capacity_factors: np.ndarray
    costs: CostParameters = DEFAULT_WIND_COSTS
    label: PlantLabel = PlantLabel.OTHER

    def __post_init__(self):
        cf = _frozen_array(self.capacity_factors, f"capacity factors of {self.id}")
        if not self.capacity > 0:
            raise InputError(f"plant {self.id}: capacity must be positive")
        if cf.size and (cf.min() < 0 or cf.max() > 1 or not np.isfinite(cf).all()):
            raise InputError(f"plant {self.id}: capacity factors must lie in [0, 1]")
        object.__setattr__(self, "capacity_factors", cf)
        object.__setattr__(self, "label", PlantLabel(self.label))

    @property
    def hours(self) -> int:
        return self.capacity_factors.size

    @property
    def generation(self) -> np.ndarray:
        return self.capacity_factors * self.capacity


@dataclass(frozen=True)
class Fleet:
    """All plants of the technology in one bidding zone."""

    zone: str
    plants: tuple[PlantProfile, ...]

    def __post_init__(self):
        plants = tuple(self.plants)
        if not plants:
            raise InputError(f"fleet in zone {self.zone} is empty")
        ids = [p.id for p in plants]
        if len(set(ids)) != len(ids):
            raise InputError(f"duplicate plant ids in fleet {self.zone}")
        if len({p.hours for p in plants}) != 1:
            raise DimensionError(f"fleet {self.zone}: plants have different series lengths")
        object.__setattr__(self, "plants", plants)

    @property
    def weights(self) -> np.ndarray:
        """Capacity shares w_i = Q_i / sum_j Q_j."""
        caps = np.array([p.capacity for p in self.plants])
        return caps / caps.sum()

    @property
    def total_capacity(self) -> float:
        return float(sum(p.capacity for p in self.plants))

    def __iter__(self):
        return iter(self.plants)

    def __len__(self):
        return len(self.plants)


@dataclass(frozen=True)
class Scenario:
    """One market realisation.

    Attributes:
        id: Scenario name.
        prices: zone -> hourly price series (EUR/MWh).
        demand: zone -> hourly demand series (MWh).
        plants: plant id -> PlantProfile realised in this scenario (its
            capacity and capacity factors may differ between scenarios).
        metadata: free-form labels, e.g. weather year or fuel price level.
    """

    id: str
    prices: Mapping[str, np.ndarray]
    demand: Mapping[str, np.ndarray]
    plants: Mapping[str, PlantProfile] = field(default_factory=dict)
    metadata: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        prices = {z: _frozen_array(v, f"prices of {z}") for z, v in self.prices.items()}
        demand = {z: _frozen_array(v, f"demand of {z}") for z, v in self.demand.items()}
        plants = dict(self.plants)
        lengths = {a.size for a in prices.values()} | {a.size for a in demand.values()}
        lengths |= {p.hours for p in plants.values()}
        if len(lengths) > 1:
            raise DimensionError(f"scenario {self.id}: series lengths differ {sorted(lengths)}")
        for zone, d in demand.items():
            if (d < 0).any():
                raise InputError(f"scenario {self.id}: negative demand in zone {zone}")
        for pid, plant in plants.items():
            if pid != plant.id:
                raise InputError(f"scenario {self.id}: plant key {pid} != id {plant.id}")
            if plant.zone not in prices:
                raise InputError(f"scenario {self.id}: no prices for zone {plant.zone} of {pid}")
        object.__setattr__(self, "prices", MappingProxyType(prices))
        object.__setattr__(self, "demand", MappingProxyType(demand))
        object.__setattr__(self, "plants", MappingProxyType(plants))
        object.__setattr__(self, "metadata", MappingProxyType(dict(self.metadata)))

    @property
    def hours(self) -> int:
        for arr in self.prices.values():
            return arr.size
        for arr in self.demand.values():
            return arr.size
        return 0

    @property
    def grid(self) -> TimeGrid:
        return TimeGrid(self.hours)

    @property
    def zones(self) -> list[str]:
        return sorted(set(self.prices) | set(self.demand))

    def plant(self, plant_id: str) -> PlantProfile:
        try:
            return self.plants[plant_id]
        except KeyError:
            raise InputError(f"plant {plant_id} is not part of scenario {self.id}") from None

    def plant_generation(self, plant_id: str) -> np.ndarray:
        return self.plant(plant_id).generation

    def fleet(self, zone: str, exclude: Iterable[str] = (), only: Sequence[str] | None = None) -> Fleet:
        """Plants located in ``zone``, optionally filtered."""
        exclude = set(exclude)
        if only is not None:
            members = [self.plant(pid) for pid in only]
            bad = [p.id for p in members if p.zone != zone]
            if bad:
                raise InputError(f"reference plants {bad} are not in zone {zone}")
        else:
            members = [p for p in self.plants.values() if p.zone == zone]
        return Fleet(zone, tuple(p for p in members if p.id not in exclude))


@dataclass(frozen=True)
class ScenarioEnsemble:
    """A finite set of scenarios with probability weights (uniform by default)."""

    scenarios: tuple[Scenario, ...]
    weights: np.ndarray | None = None

    def __post_init__(self):
        scenarios = tuple(self.scenarios)
        if not scenarios:
            raise InputError("an ensemble needs at least one scenario")
        ids = [s.id for s in scenarios]
        if len(set(ids)) != len(ids):
            raise InputError("scenario ids must be unique")
        if len({s.hours for s in scenarios}) != 1:
            raise DimensionError("all scenarios must share one time grid")
        if self.weights is None:
            weights = np.full(len(scenarios), 1.0 / len(scenarios))
        else:
            weights = _frozen_array(self.weights, "scenario weights")
        if weights.size != len(scenarios):
            raise DimensionError("one weight per scenario required")
        if (weights < 0).any() or abs(weights.sum() - 1.0) > 1e-12:
            raise InputError("scenario weights must be non-negative and sum to 1")
        weights = np.array(weights)
        weights.setflags(write=False)
        object.__setattr__(self, "scenarios", scenarios)
        object.__setattr__(self, "weights", weights)

    def __len__(self):
        return len(self.scenarios)

    def __iter__(self):
        return iter(self.scenarios)

    def __getitem__(self, idx):
        return self.scenarios[idx]

    @property
    def ids(self) -> list[str]:
        return [s.id for s in self.scenarios]

    def subset(self, keep) -> "ScenarioEnsemble":
        """Scenarios for which ``keep(scenario)`` is true, reweighted uniformly."""
        kept = tuple(s for s in self.scenarios if keep(s))
        return ScenarioEnsemble(kept)


def _zone_prices(plant: PlantProfile, s: Scenario) -> np.ndarray:
    try:
        prices = s.prices[plant.zone]
    except KeyError:
        raise InputError(f"scenario {s.id} has no prices for zone {plant.zone}") from None
    if prices.size != plant.hours:
        raise DimensionError(
            f"plant {plant.id} has {plant.hours} hours, scenario {s.id} has {prices.size}"
        )
    return prices


def total_generation(plant: PlantProfile, s: Scenario) -> float:
    """Annual generation sum_t f_t * Q in MWh."""
    _zone_prices(plant, s)
    return float(plant.generation.sum())


def market_revenue(plant: PlantProfile, s: Scenario) -> float:
    """Spot market revenue sum_t q_t p_t in EUR."""
    return float(plant.generation @ _zone_prices(plant, s))


def annual_cost(plant: PlantProfile, s: Scenario) -> float:
    """C = c * sum_t q_t + A * M * Q."""
    costs = plant.costs
    return costs.variable_cost * total_generation(plant, s) + costs.fixed_cost_per_mw * plant.capacity


def lcoe(plant: PlantProfile, s: Scenario) -> float:
    gen = total_generation(plant, s)
    if gen <= 0:
        return 0.0
    return annual_cost(plant, s) / gen


def cost_per_capacity(plant: PlantProfile, s: Scenario) -> float:
    """C / Q in EUR/MW."""
    return annual_cost(plant, s) / plant.capacity


def market_value_plant(plant: PlantProfile, s: Scenario) -> float:
    """Generation-weighted average price earned by one plant (EUR/MWh)."""
    gen = total_generation(plant, s)
    if gen <= 0:
        return 0.0
    return market_revenue(plant, s) / gen


def market_value_zone(fleet: Fleet, s: Scenario) -> float:
    """Generation-weighted average price over all plants of a fleet (EUR/MWh)."""
    revenue = sum(market_revenue(p, s) for p in fleet)
    gen = sum(total_generation(p, s) for p in fleet)
    if gen <= 0:
        return 0.0
    return revenue / gen


def revenue_per_capacity_plant(plant: PlantProfile, s: Scenario) -> float:
    """Market revenue per installed MW (EUR/MW)."""
    return market_revenue(plant, s) / plant.capacity


def revenue_per_capacity_zone(fleet: Fleet, s: Scenario) -> float:
    """Pooled fleet revenue divided by pooled capacity (EUR/MW)."""
    return sum(market_revenue(p, s) for p in fleet) / fleet.total_capacity


class CfdType(str, Enum):
    """Contract designs; NONE is the market-only baseline."""

    NONE = "none"
    BASIC = "basic"
    TWO_WAY = "2way"
    FINANCIAL = "financial"

    @property
    def strike_unit(self) -> str:
        return "EUR/MW" if self is CfdType.FINANCIAL else "EUR/MWh"


CONTRACT_TYPES = (CfdType.BASIC, CfdType.TWO_WAY, CfdType.FINANCIAL)


class ReferenceMode(str, Enum):
    INCLUDE = "include"
    EXCLUDE = "exclude"
    CUSTOM = "custom"


@dataclass(frozen=True)
class Reference:
    """Which plants form the reference fleet of a contracted plant.

    ``include`` uses every plant of the zone, ``exclude`` drops the
    contracted plant itself, ``custom`` uses the listed plants that lie in
    the contracted plant's zone.
    """

    mode: ReferenceMode = ReferenceMode.INCLUDE
    plants: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "mode", ReferenceMode(self.mode))
        object.__setattr__(self, "plants", tuple(self.plants))
        if self.mode is ReferenceMode.CUSTOM and not self.plants:
            raise InputError("custom reference needs at least one plant")

    def fleet(self, s: Scenario, plant_id: str) -> Fleet:
        zone = s.plant(plant_id).zone
        if self.mode is ReferenceMode.EXCLUDE:
            return s.fleet(zone, exclude=[plant_id])
        if self.mode is ReferenceMode.CUSTOM:
            return s.fleet(zone, only=[p for p in self.plants if p in s.plants and s.plants[p].zone == zone])
        return s.fleet(zone)


ZONE_REFERENCE = Reference()
