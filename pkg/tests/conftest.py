import numpy as np
import pytest

from cfdrisk.cli import toy_config_path
from cfdrisk.config import load_config
from cfdrisk.core import CostParameters, PlantLabel, PlantProfile, Scenario, ScenarioEnsemble
from cfdrisk.market import build_ensemble


def costs(c=0.0, am=100.0):
    """Cost parameters with A*M = am."""
    return CostParameters(variable_cost=c, annuity_factor=1.0, invest_cost=am)


def plant(pid="p", zone="Z", capacity=1.0, cf=(0.5, 0.5), c=0.0, am=100.0, label=PlantLabel.OTHER):
    return PlantProfile(pid, zone, capacity, np.asarray(cf, dtype=float), costs(c, am), label)


def scenario(plants, prices, sid="s", demand=None, zone="Z", **meta):
    prices = np.asarray(prices, dtype=float)
    if demand is None:
        demand = np.ones_like(prices)
    return Scenario(sid, {zone: prices}, {zone: np.asarray(demand, dtype=float)}, {p.id: p for p in plants}, meta)


def random_ensemble(rng, n_scen=5, hours=24, zones=("A", "B", "C"), vary_capacity=True, price_scale=80.0):
    """Random multi-zone ensemble with HighFLH / HighMV / Reference plants per zone."""
    scenarios = []
    for s in range(n_scen):
        prices, demand, plants = {}, {}, {}
        for z in zones:
            prices[z] = rng.gamma(2.0, price_scale / 2, hours)
            demand[z] = rng.uniform(50, 150, hours)
            for label, pid in ((PlantLabel.REFERENCE, "ref"), (PlantLabel.HIGH_FLH, "flh"), (PlantLabel.HIGH_MV, "mv")):
                cap = rng.uniform(1, 5) if vary_capacity else {"ref": 4.0, "flh": 2.0, "mv": 1.5}[pid]
                plants[f"{z}_{pid}"] = PlantProfile(
                    f"{z}_{pid}", z, cap, rng.uniform(0.05, 0.95, hours), CostParameters(2.0, 0.07, 1.2e6), label
                )
        scenarios.append(Scenario(f"s{s}", prices, demand, plants))
    return ScenarioEnsemble(tuple(scenarios))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def toy_config():
    return load_config(toy_config_path())


@pytest.fixture(scope="session")
def toy_ensemble(toy_config):
    return build_ensemble(toy_config.market_config())
