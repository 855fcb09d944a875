"""File-based pipeline: simulate -> strike -> expost -> report.

Every stage reads the previous stage's files from the study output
directory, so stages can be rerun independently. Output layout::

    ensemble/scenarios.csv, ensemble/plants.csv
    ensemble/weather/<name>/{capacity_factors,demand}.csv
    ensemble/prices/<scenario>.csv
    strikes.csv, strike_diagnostics.csv
    payments.csv, expost.csv, consumer.csv
    report/*.csv
"""

from __future__ import annotations

import logging
import shutil
import warnings
from collections import defaultdict
from pathlib import Path

import numpy as np

from . import core, expost, strike
from .cfd import CfDContract, payment
from .config import StudyConfig
from .core import CfdType, CostParameters, PlantProfile, Scenario, ScenarioEnsemble
from .errors import DataError, FormatError, PrerequisiteError
from .io import ingest_timeseries, read_table, table_float, write_table, write_timeseries
from .market import build_ensemble

logger = logging.getLogger(__name__)

SCENARIO_COLUMNS = ["scenario", "invest", "weather", "fuel", "fuel_price", "price_cap", "weight"]
PLANT_COLUMNS = ["scenario", "plant", "zone", "label", "capacity", "variable_cost", "annuity_factor", "invest_cost"]
STRIKE_COLUMNS = ["plant", "zone", "cfd_type", "cost_base", "markup", "value", "unit"]
PAYMENT_COLUMNS = ["scenario", "plant", "cfd_type", "payment", "reference_price"]
EXPOST_COLUMNS = ["plant", "zone", "scenario", "cfd_type", "market_revenue", "payment", "cost", "cost_recovery"]
CONSUMER_COLUMNS = ["zone", "scenario", "cfd_type", "energy_price", "levy", "total"]
TYPE_ORDER = [CfdType.NONE, *core.CONTRACT_TYPES]


def _ensemble_dir(out: Path) -> Path:
    return out / "ensemble"


# -- simulate --------------------------------------------------------------

def simulate(config: StudyConfig) -> ScenarioEnsemble:
    market = config.market_config()
    ensemble = build_ensemble(market, config.drop_weather_years)
    write_ensemble(ensemble, market.weather_variants, [p.id for p in config.plants], config.output_dir)
    return ensemble


def write_ensemble(ensemble: ScenarioEnsemble, weathers, plant_ids, out: Path) -> Path:
    root = _ensemble_dir(out)
    if root.exists():
        shutil.rmtree(root)
    rows, plant_rows = [], []
    for s, weight in zip(ensemble, ensemble.weights):
        m = s.metadata
        rows.append([s.id, m["invest"], m["weather"], m["fuel"], m["fuel_price"], m["price_cap"], float(weight)])
        for pid in sorted(s.plants):
            p = s.plants[pid]
            plant_rows.append(
                [s.id, p.id, p.zone, p.label, p.capacity, p.costs.variable_cost, p.costs.annuity_factor, p.costs.invest_cost]
            )
        write_timeseries(root / "prices" / f"{s.id}.csv", dict(s.prices), "zone")
    used = {s.metadata["weather"] for s in ensemble}
    for w in weathers:
        if w.name not in used:
            continue
        cf = {pid: w.capacity_factors[pid] for pid in plant_ids if pid in w.capacity_factors}
        write_timeseries(root / "weather" / w.name / "capacity_factors.csv", cf, "plant")
        write_timeseries(root / "weather" / w.name / "demand.csv", dict(w.demand), "zone")
    write_table(root / "plants.csv", PLANT_COLUMNS, plant_rows)
    write_table(root / "scenarios.csv", SCENARIO_COLUMNS, rows)
    logger.info("wrote %d scenarios to %s", len(rows), root)
    return root


def _require(path: Path, command: str) -> Path:
    if not path.exists():
        raise PrerequisiteError(f"{path} not found; run `cfdrisk {command}` first", command=command)
    return path


def read_scenario_table(out: Path, drop_weather=()) -> list[dict]:
    rows = read_table(_require(_ensemble_dir(out) / "scenarios.csv", "simulate"), SCENARIO_COLUMNS)
    # names are validated against the config; a year already dropped at
    # simulate time is simply absent here
    drop = {str(w) for w in drop_weather}
    kept = [r for r in rows if r["weather"] not in drop]
    if not kept:
        raise DataError("no scenarios left after dropping weather years")
    return kept


def load_ensemble(out: Path, drop_weather=()) -> ScenarioEnsemble:
    root = _ensemble_dir(out)
    rows = read_scenario_table(out, drop_weather)
    plant_rows = defaultdict(list)
    for r in read_table(_require(root / "plants.csv", "simulate"), PLANT_COLUMNS):
        plant_rows[r["scenario"]].append(r)
    weather_cache = {}
    scenarios = []
    for r in rows:
        name = r["weather"]
        if name not in weather_cache:
            wdir = root / "weather" / name
            weather_cache[name] = (
                ingest_timeseries(_require(wdir / "capacity_factors.csv", "simulate")),
                ingest_timeseries(_require(wdir / "demand.csv", "simulate")),
            )
        cf, demand = weather_cache[name]
        prices = ingest_timeseries(_require(root / "prices" / f"{r['scenario']}.csv", "simulate"))
        plants = {}
        for pr in plant_rows[r["scenario"]]:
            where = f"plants.csv {pr['scenario']}/{pr['plant']}"
            costs = CostParameters(
                table_float(pr, "variable_cost", where), table_float(pr, "annuity_factor", where), table_float(pr, "invest_cost", where)
            )
            if pr["plant"] not in cf:
                raise FormatError(f"no capacity factors for plant {pr['plant']} in weather {name}")
            plants[pr["plant"]] = PlantProfile(pr["plant"], pr["zone"], table_float(pr, "capacity", where), cf[pr["plant"]], costs, pr["label"])
        meta = {k: r[k] for k in ("invest", "weather", "fuel", "fuel_price", "price_cap")}
        scenarios.append(Scenario(r["scenario"], prices, demand, plants, meta))
    return ScenarioEnsemble(tuple(scenarios))


# -- strike ----------------------------------------------------------------

def compute_strikes(config: StudyConfig, ensemble: ScenarioEnsemble) -> list[strike.StrikeEstimate]:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", strike.TaylorApproximationWarning)
        estimates = strike.strike_table(
            config.contract_plants, ensemble, config.contract_types, config.reference, config.drop_last_cov
        )
    for w in caught:
        if issubclass(w.category, strike.TaylorApproximationWarning):
            logger.warning("%s", w.message)
        else:
            warnings.warn_explicit(w.message, w.category, w.filename, w.lineno)
    return estimates


def run_strike(config: StudyConfig) -> list[strike.StrikeEstimate]:
    out = config.output_dir
    ensemble = load_ensemble(out, config.drop_weather_years)
    estimates = compute_strikes(config, ensemble)
    write_table(
        out / "strikes.csv",
        STRIKE_COLUMNS,
        ([e.plant_id, e.zone, e.cfd_type, e.cost_base, e.markup, e.value, e.unit] for e in estimates),
    )
    diag = [e for e in estimates if e.cfd_type is CfdType.TWO_WAY]
    write_table(
        out / "strike_diagnostics.csv",
        ["plant", "own_ratio", "own_correction", "zone_ratio", "zone_correction", "taylor_ok"],
        (
            [e.plant_id, e.diagnostics["own_ratio"], e.diagnostics["own_correction"], e.diagnostics["zone_ratio"],
             e.diagnostics["zone_correction"], str(e.diagnostics["taylor_ok"]).lower()]
            for e in diag
        ),
    )
    logger.info("wrote %d strike prices over %d scenarios", len(estimates), len(ensemble))
    return estimates


def load_contracts(out: Path) -> list[CfDContract]:
    rows = read_table(_require(out / "strikes.csv", "strike"), STRIKE_COLUMNS)
    return [CfDContract(r["plant"], CfdType(r["cfd_type"]), table_float(r, "value", "strikes.csv")) for r in rows]


# -- expost ----------------------------------------------------------------

def run_expost(config: StudyConfig):
    out = config.output_dir
    contracts = load_contracts(out)
    ensemble = load_ensemble(out, config.drop_weather_years)
    payments = []
    for s in ensemble:
        for c in contracts:
            plant = s.plants.get(c.plant_id)
            if plant is None:
                continue
            fleet = None if c.cfd_type is CfdType.BASIC else config.reference.fleet(s, plant.id)
            rec = payment(c, plant, fleet, s)
            payments.append([s.id, rec.plant_id, rec.cfd_type, rec.payment, rec.reference_price])
    plant_rows, consumer_rows = expost.evaluate(ensemble, contracts, config.reference)
    write_table(out / "payments.csv", PAYMENT_COLUMNS, payments)
    write_table(
        out / "expost.csv",
        EXPOST_COLUMNS,
        ([r.plant_id, r.zone, r.scenario_id, r.cfd_type, r.market_revenue, r.payment, r.cost, r.cost_recovery] for r in plant_rows),
    )
    write_table(
        out / "consumer.csv",
        CONSUMER_COLUMNS,
        ([r.zone, r.scenario_id, r.cfd_type, r.energy_price, r.levy, r.total] for r in consumer_rows),
    )
    logger.info("wrote ex-post results for %d scenarios", len(ensemble))
    return plant_rows, consumer_rows


# -- report ----------------------------------------------------------------

def _summary_rows(groups, key_columns):
    stats_keys = list(expost.distribution_summary([0.0]))
    header = key_columns + ["cfd_type", "cv"] + stats_keys
    rows = []
    for key, values in groups.items():
        *ids, cfd_type = key
        summary = expost.distribution_summary(values)
        rows.append([*ids, cfd_type, expost.coefficient_of_variation(values), *(summary[k] for k in stats_keys)])
    return header, rows


def _heatmap(cvs, row_keys):
    types = [t for t in TYPE_ORDER if any(k[-1] is t for k in cvs)]
    rows = [[*rk, *(cvs.get((*rk, t), "") for t in types)] for rk in row_keys]
    return [t.value for t in types], rows


def _grouped(rows, id_columns, value_column, scenarios):
    groups = defaultdict(list)
    for r in rows:
        if r["scenario"] not in scenarios:
            continue
        key = tuple(r[c] for c in id_columns) + (CfdType(r["cfd_type"]),)
        groups[key].append(table_float(r, value_column, value_column))
    order = {t: i for i, t in enumerate(TYPE_ORDER)}
    return dict(sorted(groups.items(), key=lambda kv: (kv[0][:-1], order[kv[0][-1]])))


def run_report(config: StudyConfig) -> dict:
    """Distribution summaries and CV tables for cost recovery, consumer prices and strike components."""
    out = config.output_dir
    report = out / "report"
    scenarios = {r["scenario"] for r in read_scenario_table(out, config.drop_weather_years)}
    plant_rows = read_table(_require(out / "expost.csv", "expost"), EXPOST_COLUMNS)
    consumer_rows = read_table(_require(out / "consumer.csv", "expost"), CONSUMER_COLUMNS)
    upstream = {r["scenario"] for r in plant_rows}
    if not scenarios <= upstream:
        raise PrerequisiteError("ex-post results miss scenarios of the ensemble; rerun `cfdrisk expost`", command="expost")
    if upstream != scenarios:
        logger.info("report restricted to %d of %d ex-post scenarios", len(scenarios), len(upstream))

    recovery = _grouped(plant_rows, ["plant", "zone"], "cost_recovery", scenarios)
    header, rows = _summary_rows(recovery, ["plant", "zone"])
    write_table(report / "cost_recovery_summary.csv", header, rows)
    cvs = {k: expost.coefficient_of_variation(v) for k, v in recovery.items()}
    types, rows = _heatmap(cvs, list(dict.fromkeys(k[:-1] for k in recovery)))
    write_table(report / "cv_cost_recovery.csv", ["plant", "zone", *types], rows)

    consumer = _grouped(consumer_rows, ["zone"], "total", scenarios)
    header, rows = _summary_rows(consumer, ["zone"])
    write_table(report / "consumer_price_summary.csv", header, rows)
    levy = _grouped(consumer_rows, ["zone"], "levy", scenarios)
    stats_keys = list(expost.distribution_summary([0.0]))
    write_table(
        report / "levy_summary.csv",
        ["zone", "cfd_type", *stats_keys],
        ([*k[:-1], k[-1], *(expost.distribution_summary(v)[s] for s in stats_keys)] for k, v in levy.items()),
    )
    cvs_c = {k: expost.coefficient_of_variation(v) for k, v in consumer.items()}
    types, rows = _heatmap(cvs_c, list(dict.fromkeys(k[:-1] for k in consumer)))
    write_table(report / "cv_consumer_price.csv", ["zone", *types], rows)

    ensemble = load_ensemble(out, config.drop_weather_years)
    write_strike_components(report, ensemble, config)
    logger.info("wrote report over %d scenarios to %s", len(scenarios), report)
    return {"scenarios": len(scenarios), "cost_recovery_cv": cvs, "consumer_price_cv": cvs_c}


COMPONENTS = ["lcoe", "market_value", "zone_market_value", "cost_per_capacity", "revenue_per_capacity", "zone_revenue_per_capacity"]


def strike_components(plant_id: str, s: Scenario, reference) -> dict[str, float]:
    plant = s.plant(plant_id)
    fleet = reference.fleet(s, plant_id)
    return {
        "lcoe": core.lcoe(plant, s),
        "market_value": core.market_value_plant(plant, s),
        "zone_market_value": core.market_value_zone(fleet, s),
        "cost_per_capacity": core.cost_per_capacity(plant, s),
        "revenue_per_capacity": core.revenue_per_capacity_plant(plant, s),
        "zone_revenue_per_capacity": core.revenue_per_capacity_zone(fleet, s),
    }


def write_strike_components(report: Path, ensemble: ScenarioEnsemble, config: StudyConfig) -> None:
    rows, groups = [], defaultdict(list)
    for pid in config.contract_plants:
        for s in ensemble:
            if pid not in s.plants:
                continue
            comp = strike_components(pid, s, config.reference)
            rows.append([pid, s.plants[pid].zone, s.id, *(comp[c] for c in COMPONENTS)])
            for c in COMPONENTS:
                groups[(pid, c)].append(comp[c])
    write_table(report / "strike_components.csv", ["plant", "zone", "scenario", *COMPONENTS], rows)
    stats_keys = list(expost.distribution_summary([0.0]))
    write_table(
        report / "strike_components_summary.csv",
        ["plant", "component", *stats_keys],
        ([pid, c, *(expost.distribution_summary(v)[k] for k in stats_keys)] for (pid, c), v in groups.items()),
    )


STAGES = {"simulate": simulate, "strike": run_strike, "expost": run_expost, "report": run_report}
