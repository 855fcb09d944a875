import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from cfdrisk import core, strike
from cfdrisk.core import CfdType, Fleet, Reference, ScenarioEnsemble
from cfdrisk.errors import UndefinedStrikeError
from cfdrisk.strike import TaylorApproximationWarning

from conftest import plant, random_ensemble, scenario


# -- estimators -----------------------------------------------------------

def test_expect_examples():
    assert strike.expect([3.0]) == 3.0
    assert strike.expect([1.0, 3.0]) == 2.0
    assert strike.expect([1.0, 3.0], [1.0, 0.0]) == 1.0


def test_cov_examples():
    assert strike.cov([5.0, 5.0], [5.0, 5.0]) == 0.0
    assert strike.cov([0.0, 2.0], [0.0, 2.0]) == 1.0
    assert strike.cov([0.0, 2.0], [2.0, 0.0]) == -1.0


def test_expect_product2_examples():
    f = np.array([0.2, 0.7, 0.4])
    assert strike.expect_product2(f, np.full(3, 9.0)) == pytest.approx(strike.expect(f) * 9.0, rel=1e-15)
    assert strike.expect_product2([0.0, 2.0], [0.0, 2.0]) == 2.0


def test_expect_product3_examples():
    f, p = np.array([0.2, 0.7, 0.4]), np.array([30.0, 5.0, 80.0])
    w = np.full(3, 0.3)
    a = strike.expect_product3(w, f, p, drop_last_cov=True)
    b = strike.expect_product3(w, f, p, drop_last_cov=False)
    assert a == pytest.approx(b, rel=1e-12)
    assert a == pytest.approx(0.3 * strike.expect_product2(f, p), rel=1e-12)
    assert strike.expect_product3([1.0, 1.0], [0.0, 2.0], [0.0, 2.0]) == 2.0
    w, f, p = np.array([0.4, 0.6]), np.array([1.0, 1.0]), np.array([10.0, 20.0])
    full = strike.expect_product3(w, f, p, drop_last_cov=False)
    assert abs(full - np.mean(w * f * p)) <= 1e-12 * abs(full)


def test_product_identities_random_series(rng):
    """Oracle: direct mean of products over 1000 random series pairs."""
    for _ in range(1000):
        n = int(rng.integers(1, 40))
        f, p, w = rng.uniform(0, 1, n), rng.normal(60, 40, n), rng.uniform(0, 1, n)
        e2 = strike.expect_product2(f, p)
        assert abs(e2 - np.mean(f * p)) <= 1e-12 * max(1.0, abs(np.mean(f * p)))
        e3 = strike.expect_product3(w, f, p, drop_last_cov=False)
        assert abs(e3 - np.mean(w * f * p)) <= 1e-12 * max(1.0, abs(np.mean(w * f * p)))


@settings(max_examples=100, deadline=None)
@given(data=st.data(), n=st.integers(1, 12))
def test_estimators_with_weights(data, n):
    floats = st.floats(-1e3, 1e3, allow_nan=False)
    x = data.draw(arrays(float, n, elements=floats))
    y = data.draw(arrays(float, n, elements=floats))
    raw = data.draw(arrays(float, n, elements=st.floats(0.01, 1)))
    wts = raw / raw.sum()
    if abs(wts.sum() - 1) > 1e-12:
        wts[-1] = 1 - wts[:-1].sum()
    scale = max(1.0, float(np.max(np.abs(x * y))))
    assert strike.expect_product2(x, y, wts) == pytest.approx(float(wts @ (x * y)), abs=1e-9 * scale)
    assert strike.cov(x, y, wts) == pytest.approx(strike.cov(y, x, wts), abs=1e-9 * scale)
    assert strike.cov(x, x, wts) >= -1e-9 * scale


# -- deterministic --------------------------------------------------------

def test_strike_basic_det_examples():
    p = plant(cf=[0.5, 0.5], c=1.0, am=100.0)
    assert strike.strike_basic_det(p, scenario([p], [0, 0])).value == 101.0
    p = plant(cf=[1.0, 1.0])
    est = strike.strike_basic_det(p, scenario([p], [0, 0]))
    assert est.value == 50.0 and est.markup == 0.0
    # generation doubles at fixed total fixed cost: fixed-cost part halves
    p3 = plant(cf=[0.5, 0.5], c=3.0, am=100.0)
    p4 = plant(cf=[1.0, 1.0], c=3.0, am=100.0)
    v3 = strike.strike_basic_det(p3, scenario([p3], [0, 0])).value
    v4 = strike.strike_basic_det(p4, scenario([p4], [0, 0])).value
    assert (v4 - 3.0) == pytest.approx((v3 - 3.0) / 2)


def test_strike_2way_det_examples():
    a = plant("a", cf=[0.3, 0.8])
    s = scenario([a], [10, 30])
    est = strike.strike_2way_det(a, s.fleet("Z"), s)
    assert est.markup == 0.0 and est.value == core.lcoe(a, s)
    # lcoe 50 (A*M*Q = 100, gen 2), v_n 45 from the reference plant
    i = plant("i", capacity=2.0, cf=[0, 1, 0], am=50.0)
    ref = plant("ref", cf=[1, 0, 0])
    s = scenario([i, ref], [45, 55, 65])
    est = strike.strike_2way_det(i, Fleet("Z", (ref,)), s)
    assert (est.cost_base, est.markup, est.value) == (50.0, -10.0, 40.0)
    s = scenario([i, ref], [45, 40, 65])
    est = strike.strike_2way_det(i, Fleet("Z", (ref,)), s)
    assert (est.markup, est.value) == (5.0, 55.0)


def test_strike_fin_det_examples():
    a = plant("a", cf=[0.3, 0.8], c=1.0)
    s = scenario([a], [10, 30])
    est = strike.strike_fin_det(a, s.fleet("Z"), s)
    assert est.markup == 0.0
    assert est.value == pytest.approx(core.annual_cost(a, s) / a.capacity)
    i = plant("i", cf=[1.0], am=1e5)
    ref = plant("ref", cf=[90000 / 95000], am=1e5)
    s = scenario([i, ref], [95000.0])
    est = strike.strike_fin_det(i, Fleet("Z", (ref,)), s)
    assert est.value == pytest.approx(95000.0, rel=1e-12)
    assert est.cost_base == 100000.0


def test_strike_fin_det_price_scaling(rng):
    i = plant("i", capacity=2.0, cf=rng.uniform(0, 1, 24), c=2.0, am=5e4)
    j = plant("j", capacity=3.0, cf=rng.uniform(0, 1, 24), c=2.0, am=5e4)
    prices = rng.uniform(0, 100, 24)
    base = strike.strike_fin_det(i, Fleet("Z", (i, j)), scenario([i, j], prices))
    scaled = strike.strike_fin_det(i, Fleet("Z", (i, j)), scenario([i, j], 3.5 * prices))
    assert scaled.markup == pytest.approx(3.5 * base.markup, rel=1e-12)
    assert scaled.cost_base == base.cost_base


# -- under uncertainty ----------------------------------------------------

def test_strike_basic_unc_examples():
    p1, p2 = plant(cf=[0.4, 0.4]), plant(cf=[0.6, 0.6])
    ens = ScenarioEnsemble((scenario([p1], [0, 0], sid="a"), scenario([p2], [0, 0], sid="b")))
    assert strike.strike_basic_unc("p", ens).value == pytest.approx(100.0, rel=1e-12)
    lcoes = [core.lcoe(p, s) for p, s in zip((p1, p2), ens)]
    assert lcoes[0] == pytest.approx(125.0)
    assert np.mean(lcoes) != pytest.approx(100.0)
    p0 = plant(cf=[0.0, 0.0])
    with pytest.raises(UndefinedStrikeError):
        strike.strike_basic_unc("p", ScenarioEnsemble((scenario([p0], [0, 0]),)))


@pytest.mark.parametrize("mode", ["include", "exclude"])
def test_single_scenario_equals_deterministic(rng, mode):
    ens = random_ensemble(rng, n_scen=1, hours=48)
    ref = Reference(mode)
    s = ens[0]
    for pid in s.plants:
        p, fleet = s.plant(pid), ref.fleet(s, pid)
        for t in core.CONTRACT_TYPES:
            det = strike.strike_det(t, p, fleet, s)
            for keep in (True, False):
                unc = strike.strike_unc(t, pid, ens, ref, drop_last_cov=keep)
                assert unc.value == pytest.approx(det.value, rel=1e-9)
                assert unc.markup == pytest.approx(det.markup, rel=1e-9, abs=1e-9 * abs(det.value))


def test_2way_unc_flat_prices_zero_markup(rng):
    ens = random_ensemble(rng, n_scen=4)
    flat = ScenarioEnsemble(tuple(
        core.Scenario(s.id, {z: np.full(s.hours, 42.0) for z in s.prices}, s.demand, s.plants) for s in ens
    ))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TaylorApproximationWarning)
        est = strike.strike_2way_unc("A_flh", flat)
    assert est.markup == pytest.approx(0.0, abs=1e-9)


def test_fin_unc_constant_w_matches_scenario_mean(rng):
    ens = random_ensemble(rng, n_scen=6, hours=24, vary_capacity=False)
    for pid in ("A_flh", "B_mv", "C_ref"):
        est = strike.strike_fin_unc(pid, ens)
        oracle = np.mean([strike.strike_fin_det(s.plant(pid), s.fleet(s.plant(pid).zone), s).value for s in ens])
        assert est.value == pytest.approx(oracle, rel=1e-9)


def test_fin_unc_fleet_average_plant_zero_markup(rng):
    scen = []
    for k in range(4):
        cf = rng.uniform(0, 1, 12)
        a, b = plant("a", capacity=1.0, cf=cf), plant("b", capacity=3.0, cf=cf)
        scen.append(scenario([a, b], rng.uniform(0, 90, 12), sid=f"s{k}"))
    est = strike.strike_fin_unc("a", ScenarioEnsemble(tuple(scen)))
    assert est.markup == pytest.approx(0.0, abs=1e-9 * est.value)


def test_strike_unc_price_scaling(rng):
    ens = random_ensemble(rng, n_scen=4)
    scaled = ScenarioEnsemble(tuple(
        core.Scenario(s.id, {z: 2.0 * p for z, p in s.prices.items()}, s.demand, s.plants) for s in ens
    ))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TaylorApproximationWarning)
        for t in core.CONTRACT_TYPES:
            a, b = strike.strike_unc(t, "B_mv", ens), strike.strike_unc(t, "B_mv", scaled)
            assert b.cost_base == a.cost_base
            assert b.markup == pytest.approx(2.0 * a.markup, rel=1e-9, abs=1e-9)


def test_taylor_warning_fires_when_ratio_approximation_is_poor():
    # generation and price strongly anti-correlated across scenarios
    s1 = scenario([plant("a", cf=[0.1, 0.1]), plant("b", cf=[0.5, 0.5])], [100, 100], sid="s1")
    s2 = scenario([plant("a", cf=[0.9, 0.9]), plant("b", cf=[0.5, 0.5])], [10, 10], sid="s2")
    ens = ScenarioEnsemble((s1, s2))
    with pytest.warns(TaylorApproximationWarning):
        est = strike.strike_2way_unc("a", ens)
    assert est.diagnostics["taylor_ok"] is False
    oracle = np.mean([strike.strike_2way_det(s.plant("a"), s.fleet("Z"), s).value for s in ens])
    assert abs(est.value - oracle) / abs(oracle) > 0.05


def test_no_taylor_warning_for_single_scenario(rng):
    ens = random_ensemble(rng, n_scen=1)
    with warnings.catch_warnings():
        warnings.simplefilter("error", TaylorApproximationWarning)
        est = strike.strike_2way_unc("A_flh", ens)
    assert est.diagnostics["taylor_ok"] is True
    assert est.diagnostics["own_correction"] == pytest.approx(0.0, abs=1e-9)


def test_2way_unc_zero_fleet_generation():
    a, b = plant("a", cf=[0.5, 0.5]), plant("b", cf=[0.0, 0.0])
    ens = ScenarioEnsemble((scenario([a, b], [1, 2]),))
    with pytest.raises(UndefinedStrikeError):
        strike.strike_2way_unc("a", ens, Reference("exclude"))


def test_markup_signs():
    """High MV above the pooled market value gets a markdown, High FLH a markup."""
    prices = [10.0, 20.0, 90.0, 100.0]
    flh = plant("flh", cf=[0.9, 0.9, 0.3, 0.3], label=core.PlantLabel.HIGH_FLH)
    mv = plant("mv", cf=[0.1, 0.1, 0.6, 0.6], label=core.PlantLabel.HIGH_MV)
    ref = plant("ref", capacity=4.0, cf=[0.6, 0.6, 0.4, 0.4], label=core.PlantLabel.REFERENCE)
    s = scenario([flh, mv, ref], prices)
    v_n = core.market_value_zone(s.fleet("Z"), s)
    assert core.market_value_plant(mv, s) > v_n > core.market_value_plant(flh, s)
    ens = ScenarioEnsemble((s,))
    assert strike.strike_2way_unc("mv", ens).markup < 0
    assert strike.strike_2way_unc("flh", ens).markup > 0
    # financial: a plant earning more per MW than the fleet gets a markdown
    big = plant("big", cf=[0.9, 0.9, 0.8, 0.8])
    small = plant("small", capacity=3.0, cf=[0.3, 0.3, 0.2, 0.2])
    s = scenario([big, small], prices)
    assert core.revenue_per_capacity_plant(big, s) > core.revenue_per_capacity_zone(s.fleet("Z"), s)
    assert strike.strike_fin_unc("big", ScenarioEnsemble((s,))).markup < 0


def test_strike_table_order(rng):
    ens = random_ensemble(rng, n_scen=2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TaylorApproximationWarning)
        table = strike.strike_table(["A_flh", "B_mv"], ens)
    assert [(e.plant_id, e.cfd_type) for e in table] == [
        (pid, t) for pid in ("A_flh", "B_mv") for t in (CfdType.BASIC, CfdType.TWO_WAY, CfdType.FINANCIAL)
    ]
    assert table[2].unit == "EUR/MW" and table[0].unit == "EUR/MWh"
