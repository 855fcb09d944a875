"""Merit-order market clearing and scenario-ensemble generation.

Each bidding zone clears on its own, hour by hour. Supply is the zone's
variable renewable output (bid at 0 EUR/MWh) plus dispatchable units bidding
their marginal cost; demand is split into segments that withdraw once the
price exceeds their value of lost load. The ensemble is the Cartesian product
of capacity mixes, weather years and fuel price levels.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .core import CostParameters, DEFAULT_WIND_COSTS, PlantLabel, PlantProfile, Scenario, ScenarioEnsemble
from .errors import ConfigError, DimensionError, InputError

logger = logging.getLogger(__name__)

DEFAULT_SHED_PRICE = 4000.0
DEFAULT_PRICE_CAP = 617.0

# Hydrogen import price levels in EUR/MWh.
H2_PRICE_LEVELS = {"H2Price--": 45.07, "H2Price+": 116.90, "H2Price++": 188.73}

ALL_ZONES = "*"


@dataclass(frozen=True)
class DispatchableUnit:
    """A thermal, storage-backed or hydrogen unit.

    With ``fuel_efficiency`` set the unit burns the scenario fuel and bids
    ``marginal_cost + fuel_price / fuel_efficiency``.
    """

    id: str
    zone: str
    capacity: float
    marginal_cost: float = 0.0
    fuel_efficiency: float | None = None

    def __post_init__(self):
        if self.capacity < 0:
            raise InputError(f"unit {self.id}: negative capacity")
        if self.marginal_cost < 0:
            raise InputError(f"unit {self.id}: negative marginal cost")
        if self.fuel_efficiency is not None and not self.fuel_efficiency > 0:
            raise InputError(f"unit {self.id}: fuel efficiency must be positive")

    def bid(self, fuel_price: float | None = None) -> float:
        if self.fuel_efficiency is None:
            return self.marginal_cost
        if fuel_price is None:
            raise InputError(f"unit {self.id} needs a fuel price")
        return self.marginal_cost + fuel_price / self.fuel_efficiency

    def at_fuel_price(self, fuel_price: float | None) -> "DispatchableUnit":
        return replace(self, marginal_cost=self.bid(fuel_price), fuel_efficiency=None)


@dataclass(frozen=True)
class DemandSegment:
    zone: str
    value_of_lost_load: float
    share: float


# Assumed ladder: two industrial demand-response tiers and inelastic load.
# The top response tier equals the default price cap.
DEFAULT_DEMAND_SEGMENTS = (
    DemandSegment(ALL_ZONES, 150.0, 0.02),
    DemandSegment(ALL_ZONES, DEFAULT_PRICE_CAP, 0.03),
    DemandSegment(ALL_ZONES, DEFAULT_SHED_PRICE, 0.95),
)


def segments_for_zone(segments: Iterable[DemandSegment], zone: str) -> tuple[DemandSegment, ...]:
    """Zone-specific segments if any exist, otherwise the wildcard ones."""
    segments = tuple(segments)
    own = tuple(s for s in segments if s.zone == zone)
    chosen = own or tuple(s for s in segments if s.zone == ALL_ZONES)
    _check_segments(chosen, zone)
    return chosen


def _check_segments(segments: Sequence[DemandSegment], zone: str) -> None:
    if not segments:
        raise ConfigError(f"no demand segments for zone {zone}")
    if abs(sum(s.share for s in segments) - 1.0) > 1e-9:
        raise ConfigError(f"demand segment shares for zone {zone} must sum to 1")
    if any(s.share < 0 for s in segments):
        raise ConfigError(f"negative demand segment share in zone {zone}")
    vols = [s.value_of_lost_load for s in segments]
    if len(set(vols)) != len(vols):
        raise ConfigError(f"value-of-lost-load tiers in zone {zone} must be distinct")


@dataclass(frozen=True)
class PlantSpec:
    """A contracted-technology (wind) plant whose capacity factors come from weather data."""

    id: str
    zone: str
    label: PlantLabel = PlantLabel.OTHER
    costs: CostParameters = DEFAULT_WIND_COSTS


@dataclass(frozen=True)
class ResourceSpec:
    """Another variable renewable (e.g. solar) that only shifts the merit order."""

    id: str
    zone: str


@dataclass(frozen=True)
class WeatherVariant:
    name: str
    capacity_factors: Mapping[str, np.ndarray]
    demand: Mapping[str, np.ndarray]

    @property
    def hours(self) -> int:
        lengths = {len(v) for v in self.capacity_factors.values()} | {len(v) for v in self.demand.values()}
        if len(lengths) != 1:
            raise DimensionError(f"weather variant {self.name}: series lengths differ {sorted(lengths)}")
        return lengths.pop()


@dataclass(frozen=True)
class InvestVariant:
    name: str
    capacities: Mapping[str, float]
    units: tuple[DispatchableUnit, ...] = ()


@dataclass(frozen=True)
class MarketConfig:
    price_cap: float | None = DEFAULT_PRICE_CAP
    shed_price: float = DEFAULT_SHED_PRICE
    fuel_price_levels: Mapping[str, float] = field(default_factory=lambda: dict(H2_PRICE_LEVELS))
    weather_variants: tuple[WeatherVariant, ...] = ()
    invest_variants: tuple[InvestVariant, ...] = ()
    plants: tuple[PlantSpec, ...] = ()
    resources: tuple[ResourceSpec, ...] = ()
    demand_segments: tuple[DemandSegment, ...] = DEFAULT_DEMAND_SEGMENTS

    def __post_init__(self):
        if self.price_cap is not None and self.price_cap > self.shed_price:
            raise ConfigError("price cap must not exceed the shed price")
        ids = [p.id for p in self.plants] + [r.id for r in self.resources]
        if len(set(ids)) != len(ids):
            raise ConfigError("plant and resource ids must be unique")

    @property
    def zones(self) -> list[str]:
        zones = {p.zone for p in self.plants} | {r.zone for r in self.resources}
        for w in self.weather_variants:
            zones |= set(w.demand)
        return sorted(zones)


class HourClearing(NamedTuple):
    price: float
    dispatch: np.ndarray
    renewables_used: float
    shed: float


class MarketClearing(NamedTuple):
    """Hourly clearing results; ``dispatch`` has shape (hours, units)."""

    price: np.ndarray
    uncapped_price: np.ndarray
    dispatch: np.ndarray
    renewables_used: np.ndarray
    shed: np.ndarray


def _segment_arrays(segments, shed_price):
    if segments is None:
        segments = (DemandSegment(ALL_ZONES, shed_price, 1.0),)
    vols = np.array([min(s.value_of_lost_load, shed_price) for s in segments], dtype=float)
    shares = np.array([s.share for s in segments], dtype=float)
    return vols, shares


def clear_hour(renewable_supply, units, demand, segments=None, cap=None, shed_price=DEFAULT_SHED_PRICE):
    """Clear one hour of one zone.

    Walks the supply stack in merit order until the supply offered at a
    price covers the demand still willing to pay more than that price.
    Units with equal marginal cost share the marginal quantity pro rata.
    Renewables bid 0 and are only curtailed when the price is 0.

    Returns:
        HourClearing(price, dispatch per unit, renewables used, shed), where
        shed includes demand withdrawn by price-responsive segments.
    """
    if demand < 0:
        raise InputError("demand must be non-negative")
    if renewable_supply < 0:
        raise InputError("renewable supply must be non-negative")
    units = list(units)
    vols, shares = _segment_arrays(segments, shed_price)
    mcs = [u.marginal_cost for u in units]
    levels = sorted({0.0, float(shed_price), *mcs, *vols.tolist()})

    for level in levels:
        s_lo = (renewable_supply if level > 0 else 0.0) + sum(u.capacity for u in units if u.marginal_cost < level)
        s_hi = renewable_supply + sum(u.capacity for u in units if u.marginal_cost <= level)
        d_lo = demand * shares[vols > level].sum()
        d_hi = demand * shares[vols >= level].sum()
        if s_hi >= d_lo or level == levels[-1]:
            break

    served = min(s_hi, d_hi)
    frac = (served - s_lo) / (s_hi - s_lo) if s_hi > s_lo else 0.0
    dispatch = np.array(
        [u.capacity if u.marginal_cost < level else u.capacity * frac if u.marginal_cost == level else 0.0 for u in units],
        dtype=float,
    )
    renewables_used = renewable_supply if level > 0 else renewable_supply * frac
    price = level if cap is None else min(level, cap)
    return HourClearing(float(price), dispatch, float(renewables_used), float(demand - served))


def clear_market(renewables, units, demand, segments=None, cap=None, shed_price=DEFAULT_SHED_PRICE):
    """Vectorised ``clear_hour`` over an hourly series."""
    renewables = np.asarray(renewables, dtype=float)
    demand = np.asarray(demand, dtype=float)
    if renewables.shape != demand.shape or renewables.ndim != 1:
        raise DimensionError("renewable supply and demand must be 1-d series of equal length")
    if (demand < 0).any():
        raise InputError("demand must be non-negative")
    if (renewables < 0).any():
        raise InputError("renewable supply must be non-negative")
    units = list(units)
    vols, shares = _segment_arrays(segments, shed_price)
    caps = np.array([u.capacity for u in units], dtype=float)
    mcs = np.array([u.marginal_cost for u in units], dtype=float)
    levels = np.unique(np.concatenate([[0.0, float(shed_price)], mcs, vols]))

    cum_lo = np.array([caps[mcs < lv].sum() for lv in levels])
    cum_hi = np.array([caps[mcs <= lv].sum() for lv in levels])
    share_gt = np.array([shares[vols > lv].sum() for lv in levels])
    share_ge = np.array([shares[vols >= lv].sum() for lv in levels])

    s_hi = renewables[:, None] + cum_hi[None, :]
    d_lo = demand[:, None] * share_gt[None, :]
    ok = s_hi >= d_lo
    ok[:, -1] = True
    k = ok.argmax(axis=1)
    level = levels[k]

    hi = s_hi[np.arange(k.size), k]
    lo = np.where(level > 0, renewables, 0.0) + cum_lo[k]
    served = np.minimum(hi, demand * share_ge[k])
    span = hi - lo
    frac = np.divide(served - lo, span, out=np.zeros_like(span), where=span > 0)

    below = mcs[None, :] < level[:, None]
    at = mcs[None, :] == level[:, None]
    dispatch = caps[None, :] * (below + at * frac[:, None])
    renewables_used = np.where(level > 0, renewables, renewables * frac)
    price = level if cap is None else np.minimum(level, cap)
    return MarketClearing(price, level, dispatch, renewables_used, demand - served)


def _zone_renewables(config: MarketConfig, mix: InvestVariant, weather: WeatherVariant, zone: str) -> np.ndarray:
    supply = np.zeros(weather.hours)
    for spec in itertools.chain(config.plants, config.resources):
        if spec.zone != zone:
            continue
        capacity = mix.capacities.get(spec.id, 0.0)
        if capacity <= 0:
            continue
        try:
            supply += capacity * np.asarray(weather.capacity_factors[spec.id])
        except KeyError:
            raise DimensionError(f"weather {weather.name} lacks capacity factors for {spec.id}") from None
    return supply


def simulate_scenario(mix: InvestVariant, weather: WeatherVariant, fuel_level, config: MarketConfig) -> Scenario:
    """Dispatch one capacity mix under one weather year and fuel price.

    ``fuel_level`` is either a ``(label, price)`` pair or a bare price.
    Plant output is always its available generation f * Q; surplus hours
    clear at 0 EUR/MWh.
    """
    if isinstance(fuel_level, tuple):
        fuel_label, fuel_price = fuel_level
    else:
        fuel_label, fuel_price = f"{fuel_level:g}", fuel_level
    hours = weather.hours
    prices, demand = {}, {}
    for zone in config.zones:
        try:
            zone_demand = np.asarray(weather.demand[zone], dtype=float)
        except KeyError:
            raise DimensionError(f"weather {weather.name} lacks demand for zone {zone}") from None
        units = [u.at_fuel_price(fuel_price) for u in mix.units if u.zone == zone]
        result = clear_market(
            _zone_renewables(config, mix, weather, zone),
            units,
            zone_demand,
            segments_for_zone(config.demand_segments, zone),
            cap=config.price_cap,
            shed_price=config.shed_price,
        )
        prices[zone] = result.price
        demand[zone] = zone_demand

    plants = {}
    for spec in config.plants:
        capacity = mix.capacities.get(spec.id, 0.0)
        if capacity <= 0:
            continue
        cf = weather.capacity_factors.get(spec.id)
        if cf is None:
            raise DimensionError(f"weather {weather.name} lacks capacity factors for {spec.id}")
        if len(cf) != hours:
            raise DimensionError(f"capacity factors of {spec.id} do not match the weather grid")
        plants[spec.id] = PlantProfile(spec.id, spec.zone, capacity, cf, spec.costs, spec.label)

    metadata = {
        "invest": mix.name,
        "weather": weather.name,
        "fuel": fuel_label,
        "fuel_price": repr(float(fuel_price)),
        "price_cap": "none" if config.price_cap is None else repr(float(config.price_cap)),
    }
    return Scenario(scenario_id(mix.name, weather.name, fuel_label), prices, demand, plants, metadata)


def scenario_id(invest: str, weather: str, fuel: str) -> str:
    return f"{invest}__{weather}__{fuel}"


def build_ensemble(config: MarketConfig, drop_weather: Iterable[str] = ()) -> ScenarioEnsemble:
    """All invest x weather x fuel combinations with uniform weights."""
    drop = {str(w) for w in drop_weather}
    unknown = drop - {w.name for w in config.weather_variants}
    if unknown:
        raise ConfigError(f"cannot drop unknown weather variants {sorted(unknown)}")
    weathers = [w for w in config.weather_variants if w.name not in drop]
    if not config.invest_variants:
        raise ConfigError("at least one invest variant is required")
    if not weathers:
        raise ConfigError("at least one weather variant is required")
    if not config.fuel_price_levels:
        raise ConfigError("at least one fuel price level is required")
    scenarios = [
        simulate_scenario(mix, weather, (label, price), config)
        for mix in config.invest_variants
        for weather in weathers
        for label, price in config.fuel_price_levels.items()
    ]
    logger.info("built ensemble of %d scenarios", len(scenarios))
    return ScenarioEnsemble(tuple(scenarios))
