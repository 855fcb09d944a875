"""Study configuration files (TOML).

Schema (all paths relative to the config file)::

    [study]        output_dir
    [costs]        variable_cost, invest_cost, and annuity_factor or
                   (interest_rate, lifetime)
    [market]       price_cap (number or false), shed_price,
                   fuel_prices = {label = EUR/MWh}, [[market.demand_segments]]
    [[weather]]    name, capacity_factors, demand
    [[plants]]     id, zone, label
    [[resources]]  id, zone
    [[invest]]     name, capacities = {id = MW}, [[invest.units]]
    [contracts]    plants, types, reference, reference_plants
    [strike]       drop_last_cov
    [sensitivity]  price_cap (bool), drop_weather_years

Unknown keys are rejected so that typos in sensitivity switches fail loudly.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .core import CONTRACT_TYPES, CfdType, CostParameters, PlantLabel, Reference, ReferenceMode
from .errors import ConfigError, DataError
from .io import ingest_timeseries
from .market import (
    DEFAULT_DEMAND_SEGMENTS,
    DEFAULT_PRICE_CAP,
    DEFAULT_SHED_PRICE,
    H2_PRICE_LEVELS,
    DemandSegment,
    DispatchableUnit,
    InvestVariant,
    MarketConfig,
    PlantSpec,
    ResourceSpec,
    WeatherVariant,
)

_SECTIONS = {"study", "costs", "market", "weather", "plants", "resources", "invest", "contracts", "strike", "sensitivity"}


def _take(table: dict, where: str, required=(), optional=()):
    if not isinstance(table, dict):
        raise ConfigError(f"{where}: expected a table")
    unknown = set(table) - set(required) - set(optional)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    missing = [k for k in required if k not in table]
    if missing:
        raise ConfigError(f"{where}: missing keys {missing}")
    return table


def _number(value, where) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    return float(value)


@dataclass(frozen=True)
class WeatherSource:
    name: str
    capacity_factors: Path
    demand: Path

    def load(self) -> WeatherVariant:
        try:
            cf = ingest_timeseries(self.capacity_factors)
            demand = ingest_timeseries(self.demand)
        except DataError as exc:
            raise DataError(f"weather {self.name}: {exc}") from exc
        return WeatherVariant(self.name, cf, demand)


@dataclass(frozen=True)
class StudyConfig:
    base_dir: Path
    output_dir: Path
    costs: CostParameters
    price_cap: float | None
    shed_price: float
    fuel_prices: dict
    demand_segments: tuple
    weather: tuple[WeatherSource, ...]
    plants: tuple[PlantSpec, ...]
    resources: tuple[ResourceSpec, ...]
    invest: tuple[InvestVariant, ...]
    contract_plants: tuple[str, ...]
    contract_types: tuple[CfdType, ...] = CONTRACT_TYPES
    reference: Reference = field(default_factory=Reference)
    drop_last_cov: bool = True
    use_price_cap: bool = True
    drop_weather_years: tuple[str, ...] = ()

    def with_overrides(self, **changes) -> "StudyConfig":
        changes = {k: v for k, v in changes.items() if v is not None}
        out = replace(self, **changes)
        out.validate()
        return out

    def validate(self) -> None:
        names = {w.name for w in self.weather}
        unknown = set(self.drop_weather_years) - names
        if unknown:
            raise ConfigError(f"cannot drop unknown weather years {sorted(unknown)}; known: {sorted(names)}")
        if len(names) == len(set(self.drop_weather_years)):
            raise ConfigError("dropping every weather year leaves no scenarios")
        plant_ids = {p.id for p in self.plants}
        bad = [p for p in self.contract_plants if p not in plant_ids]
        if bad:
            raise ConfigError(f"contracted plants {bad} are not defined under [[plants]]")
        bad = [p for p in self.reference.plants if p not in plant_ids]
        if bad:
            raise ConfigError(f"reference plants {bad} are not defined under [[plants]]")

    @property
    def effective_price_cap(self) -> float | None:
        return self.price_cap if self.use_price_cap else None

    def market_config(self) -> MarketConfig:
        """MarketConfig with weather data loaded from disk."""
        return MarketConfig(
            price_cap=self.effective_price_cap,
            shed_price=self.shed_price,
            fuel_price_levels=dict(self.fuel_prices),
            weather_variants=tuple(w.load() for w in self.weather),
            invest_variants=self.invest,
            plants=self.plants,
            resources=self.resources,
            demand_segments=self.demand_segments,
        )


def _costs(table) -> CostParameters:
    _take(table, "[costs]", ("variable_cost", "invest_cost"), ("annuity_factor", "interest_rate", "lifetime"))
    c = _number(table["variable_cost"], "costs.variable_cost")
    m = _number(table["invest_cost"], "costs.invest_cost")
    if "annuity_factor" in table:
        if "interest_rate" in table or "lifetime" in table:
            raise ConfigError("[costs]: give annuity_factor or interest_rate/lifetime, not both")
        return CostParameters(c, _number(table["annuity_factor"], "costs.annuity_factor"), m)
    if "interest_rate" not in table or "lifetime" not in table:
        raise ConfigError("[costs]: annuity_factor or interest_rate and lifetime required")
    return CostParameters.from_financials(
        c, m, _number(table["interest_rate"], "costs.interest_rate"), _number(table["lifetime"], "costs.lifetime")
    )


def _market(table):
    _take(table, "[market]", (), ("price_cap", "shed_price", "fuel_prices", "demand_segments"))
    shed = _number(table.get("shed_price", DEFAULT_SHED_PRICE), "market.shed_price")
    cap = table.get("price_cap", DEFAULT_PRICE_CAP)
    if cap is False:
        cap = None
    elif cap is not None:
        cap = _number(cap, "market.price_cap")
    fuel = table.get("fuel_prices", H2_PRICE_LEVELS)
    if not isinstance(fuel, dict) or not fuel:
        raise ConfigError("market.fuel_prices must be a non-empty table of label = price")
    fuel = {str(k): _number(v, f"market.fuel_prices.{k}") for k, v in fuel.items()}
    segments = DEFAULT_DEMAND_SEGMENTS
    if "demand_segments" in table:
        segments = tuple(
            DemandSegment(
                str(_take(s, "[[market.demand_segments]]", ("value_of_lost_load", "share"), ("zone",)).get("zone", "*")),
                _number(s["value_of_lost_load"], "demand_segments.value_of_lost_load"),
                _number(s["share"], "demand_segments.share"),
            )
            for s in table["demand_segments"]
        )
    return cap, shed, fuel, segments


def _path(base: Path, value, where) -> Path:
    if not isinstance(value, str):
        raise ConfigError(f"{where}: expected a path string")
    path = (base / value).resolve()
    if not path.exists():
        raise ConfigError(f"{where}: file not found: {path}")
    return path


def _invest(table, i) -> InvestVariant:
    where = f"[[invest]] #{i + 1}"
    _take(table, where, ("name", "capacities"), ("units",))
    caps = {str(k): _number(v, f"{where}.capacities.{k}") for k, v in table["capacities"].items()}
    units = []
    for u in table.get("units", []):
        _take(u, f"{where} unit", ("id", "zone", "capacity"), ("marginal_cost", "fuel_efficiency"))
        eff = u.get("fuel_efficiency")
        units.append(
            DispatchableUnit(
                str(u["id"]),
                str(u["zone"]),
                _number(u["capacity"], f"{where}.units.capacity"),
                _number(u.get("marginal_cost", 0.0), f"{where}.units.marginal_cost"),
                None if eff is None else _number(eff, f"{where}.units.fuel_efficiency"),
            )
        )
    return InvestVariant(str(table["name"]), caps, tuple(units))


def parse_config(data: dict, base_dir: Path) -> StudyConfig:
    unknown = set(data) - _SECTIONS
    if unknown:
        raise ConfigError(f"unknown sections {sorted(unknown)}")
    for required in ("costs", "weather", "plants", "invest"):
        if required not in data:
            raise ConfigError(f"missing section [{required}]")
    base_dir = Path(base_dir).resolve()

    study = _take(data.get("study", {}), "[study]", (), ("output_dir",))
    costs = _costs(data["costs"])
    cap, shed, fuel, segments = _market(data.get("market", {}))

    weather = []
    for i, w in enumerate(data["weather"]):
        _take(w, f"[[weather]] #{i + 1}", ("name", "capacity_factors", "demand"))
        weather.append(
            WeatherSource(
                str(w["name"]),
                _path(base_dir, w["capacity_factors"], f"weather {w['name']}.capacity_factors"),
                _path(base_dir, w["demand"], f"weather {w['name']}.demand"),
            )
        )
    if len({w.name for w in weather}) != len(weather):
        raise ConfigError("weather names must be unique")

    plants = []
    for p in data["plants"]:
        _take(p, "[[plants]]", ("id", "zone"), ("label",))
        try:
            label = PlantLabel(p.get("label", "Other"))
        except ValueError:
            raise ConfigError(f"plant {p['id']}: unknown label {p['label']!r}") from None
        plants.append(PlantSpec(str(p["id"]), str(p["zone"]), label, costs))
    resources = [
        ResourceSpec(str(_take(r, "[[resources]]", ("id", "zone"))["id"]), str(r["zone"]))
        for r in data.get("resources", [])
    ]
    invest = [_invest(t, i) for i, t in enumerate(data["invest"])]
    if len({v.name for v in invest}) != len(invest):
        raise ConfigError("invest variant names must be unique")

    contracts = _take(data.get("contracts", {}), "[contracts]", (), ("plants", "types", "reference", "reference_plants"))
    try:
        types = tuple(CfdType(t) for t in contracts.get("types", [t.value for t in CONTRACT_TYPES]))
        mode = ReferenceMode(contracts.get("reference", "include"))
    except ValueError as exc:
        raise ConfigError(f"[contracts]: {exc}") from None
    if CfdType.NONE in types:
        raise ConfigError("[contracts]: 'none' is the implicit baseline, not a contract type")
    try:
        reference = Reference(mode, tuple(contracts.get("reference_plants", ())))
    except ValueError as exc:
        raise ConfigError(f"[contracts]: {exc}") from None
    contract_plants = tuple(
        contracts.get("plants", [p.id for p in plants if p.label in (PlantLabel.HIGH_FLH, PlantLabel.HIGH_MV)])
    )

    strike = _take(data.get("strike", {}), "[strike]", (), ("drop_last_cov",))
    sens = _take(data.get("sensitivity", {}), "[sensitivity]", (), ("price_cap", "drop_weather_years"))
    for key, value in (("strike.drop_last_cov", strike.get("drop_last_cov", True)), ("sensitivity.price_cap", sens.get("price_cap", True))):
        if not isinstance(value, bool):
            raise ConfigError(f"{key} must be true or false")

    config = StudyConfig(
        base_dir=base_dir,
        output_dir=(base_dir / study.get("output_dir", "output")).resolve(),
        costs=costs,
        price_cap=cap,
        shed_price=shed,
        fuel_prices=fuel,
        demand_segments=segments,
        weather=tuple(weather),
        plants=tuple(plants),
        resources=tuple(resources),
        invest=tuple(invest),
        contract_plants=contract_plants,
        contract_types=types,
        reference=reference,
        drop_last_cov=strike.get("drop_last_cov", True),
        use_price_cap=sens.get("price_cap", True),
        drop_weather_years=tuple(str(y) for y in sens.get("drop_weather_years", ())),
    )
    config.validate()
    return config


def load_config(path) -> StudyConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return parse_config(data, path.parent)
