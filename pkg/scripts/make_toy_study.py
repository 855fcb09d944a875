#!/usr/bin/env python3
"""Generate the bundled toy study: synthetic weather years and the study config.

Three zones (DK, ES, FR) with an existing wind fleet, two new wind profiles
(High FLH: windier but coincident with the fleet; High MV: less wind, but
partly decorrelated and tilted towards evening peaks), solar, and a small
dispatchable stack. Weather year 2010 is calm with high demand, 2015 windy
with low demand, 2019 average.

    python scripts/make_toy_study.py [OUTDIR] [--seed N]
"""

import argparse
from pathlib import Path

import numpy as np

from cfdrisk.io import write_timeseries

HOURS = 8760
ZONES = {
    # demand scale (MW), wind offset, solar scale
    "DK": dict(load=5200.0, wind=0.25, solar=0.75),
    "ES": dict(load=31000.0, wind=-0.15, solar=1.25),
    "FR": dict(load=52000.0, wind=0.0, solar=1.0),
}
YEARS = {
    # wind offset, demand factor, solar factor
    "2010": dict(wind=-0.15, load=1.05, solar=0.97),
    "2015": dict(wind=0.12, load=0.98, solar=1.02),
    "2019": dict(wind=0.0, load=1.0, solar=1.0),
}


def ar1(rng, n, phi):
    eps = rng.standard_normal(n)
    x = np.empty(n)
    x[0] = eps[0]
    scale = np.sqrt(1 - phi**2)
    for t in range(1, n):
        x[t] = phi * x[t - 1] + scale * eps[t]
    return x


def sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def weather_year(year, seed):
    rng = np.random.default_rng(seed)
    t = np.arange(HOURS)
    day = t // 24
    hour = t % 24
    season = np.cos(2 * np.pi * (day - 15) / 365.0)  # +1 mid-January, -1 mid-July
    evening = np.exp(-0.5 * ((hour - 19) / 3.0) ** 2)
    daylight = np.clip(np.sin(np.pi * (hour - 6) / 12.0), 0, None)
    y = YEARS[year]
    cf, demand = {}, {}
    for zone, z in ZONES.items():
        common = ar1(rng, HOURS, 0.985)
        local = ar1(rng, HOURS, 0.97)
        level = y["wind"] + z["wind"] + 0.45 * season
        cf[f"{zone}_existing"] = 0.9 * sigmoid(-1.1 + level + 1.3 * common)
        cf[f"{zone}_HighFLH"] = 0.93 * sigmoid(-0.55 + level + 1.3 * common)
        mixed = 0.45 * common + np.sqrt(1 - 0.45**2) * local
        cf[f"{zone}_HighMV"] = 0.9 * sigmoid(-1.05 + level + 1.2 * mixed + 0.5 * evening)
        clouds = np.clip(0.75 + 0.25 * ar1(rng, HOURS, 0.9), 0.2, 1.0)
        cf[f"{zone}_solar"] = np.clip(0.75 * z["solar"] * y["solar"] * daylight * (0.75 - 0.25 * season) * clouds, 0, 1)
        profile = 1 + 0.16 * season + 0.1 * np.sin(np.pi * (hour - 7) / 14.0).clip(0) + 0.12 * evening
        noise = 1 + 0.03 * ar1(rng, HOURS, 0.95)
        cold = 1 + 0.06 * np.clip(-common, 0, None) * (season > 0)  # calm winter spells are cold
        demand[zone] = z["load"] * y["load"] * profile * noise * cold
    return cf, demand


# Shares of mean demand met by wind and solar energy in the reference mix.
WIND_SHARE = {"DK": 0.8, "ES": 0.35, "FR": 0.45}
SOLAR_SHARE = {"DK": 0.1, "ES": 0.45, "FR": 0.25}
WIND_SPLIT = {"existing": 0.6, "HighFLH": 0.22, "HighMV": 0.18}
FIRM = {
    "DK": [("DK_biomass", 0.25, 55.0)],
    "ES": [("ES_hydro", 0.3, 25.0)],
    "FR": [("FR_nuclear", 0.5, 12.0)],
}


def invest_variants(reference_weather):
    """Four capacity mixes: H2 price level x PV cost level.

    Renewable capacities follow energy shares of the reference weather year;
    hydrogen turbines close the gap to a high quantile of its residual load,
    so scarcity is rare in average years and more frequent in 2010.
    """
    cf, demand = reference_weather
    out = []
    for h2_name, re_scale, firm_q in (("H2Price--", 0.9, 0.995), ("H2Price+", 1.1, 0.985)):
        for pv_name, pv_scale, wind_scale in (("PVcost--", 1.3, 0.85), ("PVcost+", 0.8, 1.15)):
            caps, units = {}, []
            for zone in ZONES:
                d = demand[zone]
                pooled = sum(WIND_SPLIT[k] * cf[f"{zone}_{k}"] for k in WIND_SPLIT)
                wind_total = WIND_SHARE[zone] * re_scale * wind_scale * d.mean() / pooled.mean()
                for k, split in WIND_SPLIT.items():
                    caps[f"{zone}_{k}"] = wind_total * split
                solar_cf = cf[f"{zone}_solar"]
                caps[f"{zone}_solar"] = SOLAR_SHARE[zone] * re_scale * pv_scale * d.mean() / solar_cf.mean()
                residual = d - wind_total * pooled - caps[f"{zone}_solar"] * solar_cf
                firm_total = np.quantile(residual, firm_q)
                for uid, share, mc in FIRM[zone]:
                    units.append(dict(id=uid, zone=zone, capacity=float(round(share * firm_total, -1)), marginal_cost=mc))
                h2 = firm_total - sum(u["capacity"] for u in units if u["zone"] == zone)
                units.append(dict(id=f"{zone}_h2", zone=zone, capacity=float(round(h2, -1)), marginal_cost=3.0, fuel_efficiency=0.55))
            out.append((f"{h2_name}{pv_name}", {k: float(round(v, 1)) for k, v in caps.items()}, units))
    return out


def toml_config(years, variants):
    lines = [
        "# Toy study: 4 capacity mixes x 3 weather years x 3 H2 price levels = 36 scenarios.",
        "# Generated by scripts/make_toy_study.py; all data are synthetic.",
        "",
        "[study]",
        'output_dir = "output"',
        "",
        "[costs]",
        "# assumed onshore wind costs",
        "variable_cost = 2.0",
        "invest_cost = 1400000.0",
        "interest_rate = 0.05",
        "lifetime = 25",
        "",
        "[market]",
        "price_cap = 617.0",
        "shed_price = 4000.0",
        'fuel_prices = { "H2Price--" = 45.07, "H2Price+" = 116.90, "H2Price++" = 188.73 }',
        "",
    ]
    for vol, share in ((150.0, 0.02), (617.0, 0.03), (4000.0, 0.95)):
        lines += ["[[market.demand_segments]]", f"value_of_lost_load = {vol}", f"share = {share}", ""]
    for year in years:
        lines += [
            "[[weather]]",
            f'name = "{year}"',
            f'capacity_factors = "capacity_factors_{year}.csv.gz"',
            f'demand = "demand_{year}.csv.gz"',
            "",
        ]
    for zone in ZONES:
        for suffix, label in (("existing", "Reference"), ("HighFLH", "HighFLH"), ("HighMV", "HighMV")):
            lines += ["[[plants]]", f'id = "{zone}_{suffix}"', f'zone = "{zone}"', f'label = "{label}"', ""]
    for zone in ZONES:
        lines += ["[[resources]]", f'id = "{zone}_solar"', f'zone = "{zone}"', ""]
    for name, caps, units in variants:
        lines += ["[[invest]]", f'name = "{name}"', "capacities = { " + ", ".join(f"{k} = {v:.1f}" for k, v in caps.items()) + " }"]
        for u in units:
            lines += ["[[invest.units]]"] + [f"{k} = {v!r}" if not isinstance(v, str) else f'{k} = "{v}"' for k, v in u.items()]
        lines.append("")
    contracted = [f"{z}_{p}" for z in ZONES for p in ("HighFLH", "HighMV")]
    lines += [
        "[contracts]",
        "plants = [" + ", ".join(f'"{p}"' for p in contracted) + "]",
        'types = ["basic", "2way", "financial"]',
        'reference = "include"',
        "",
        "[strike]",
        "drop_last_cov = true",
        "",
        "[sensitivity]",
        "price_cap = true",
        "drop_weather_years = []",
    ]
    return "\n".join(lines) + "\n"


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("outdir", nargs="?", type=Path, default=Path(__file__).resolve().parents[1] / "src" / "cfdrisk" / "data" / "toy")
    parser.add_argument("--seed", type=int, default=20240517)
    args = parser.parse_args()
    args.outdir.mkdir(parents=True, exist_ok=True)
    weather = {}
    for i, year in enumerate(YEARS):
        cf, demand = weather_year(year, args.seed + i)
        # 6 significant digits keep the files small
        cf = {k: np.round(v, 6) for k, v in cf.items()}
        demand = {k: np.round(v, 1) for k, v in demand.items()}
        write_timeseries(args.outdir / f"capacity_factors_{year}.csv.gz", cf, "plant")
        write_timeseries(args.outdir / f"demand_{year}.csv.gz", demand, "zone")
        weather[year] = (cf, demand)
    (args.outdir / "study.toml").write_text(toml_config(YEARS, invest_variants(weather["2019"])))


if __name__ == "__main__":
    main()
