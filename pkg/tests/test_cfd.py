import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cfdrisk import core
from cfdrisk.cfd import CfDContract, payment, payment_2way, payment_basic, payment_financial
from cfdrisk.core import CfdType, Fleet
from cfdrisk.errors import InputError

from conftest import plant, scenario


def test_payment_basic_examples():
    p = plant(cf=[1, 1])
    c = CfDContract("p", "basic", 50.0)
    assert payment_basic(c, p, scenario([p], [40, 60])).payment == 0.0
    p0 = plant(cf=[0, 0])
    assert payment_basic(c, p0, scenario([p0], [40, 60])).payment == 0.0
    p1 = plant(cf=[1, 0])
    assert payment_basic(c, p1, scenario([p1], [40, 60])).payment == 10.0


def test_payment_2way_examples():
    i = plant("i", cf=[1, 1])
    ref = plant("ref", cf=[1, 0])
    s = scenario([i, ref], [45, 70])  # v_n = 45, sum q = 2
    fleet = Fleet("Z", (ref,))
    assert payment_2way(CfDContract("i", "2way", 45.0), i, fleet, s).payment == 0.0
    rec = payment_2way(CfDContract("i", "2way", 50.0), i, fleet, s)
    assert (rec.payment, rec.reference_price) == (10.0, 45.0)
    s = scenario([i, ref], [60, 70])
    assert payment_2way(CfDContract("i", "2way", 50.0), i, fleet, s).payment == -20.0


def test_payment_financial_examples():
    i = plant("i", cf=[1.0])
    ref = plant("ref", cf=[0.9])
    s = scenario([i, ref], [100000.0])  # r_n = 90000
    fleet = Fleet("Z", (ref,))
    assert payment_financial(CfDContract("i", "financial", 90000.0), i, fleet, s).payment == 0.0
    rec = payment_financial(CfDContract("i", "financial", 100000.0), i, fleet, s)
    assert rec.payment == pytest.approx(10000.0, rel=1e-12)
    assert rec.reference_unit == "EUR/MW"
    idle = plant("i", cf=[0.0])
    s_idle = scenario([idle, ref], [100000.0])
    assert payment_financial(CfDContract("i", "financial", 100000.0), idle, fleet, s_idle).payment == rec.payment


def test_contract_validation():
    with pytest.raises(ValueError):
        CfDContract("p", "bogus", 1.0)
    with pytest.raises(InputError):
        CfDContract("p", "none", 1.0)
    assert CfDContract("p", "financial", 1.0).unit == "EUR/MW"
    assert CfDContract("p", "2way", 1.0).unit == "EUR/MWh"
    p = plant("q")
    with pytest.raises(InputError):
        payment_basic(CfDContract("p", "basic", 1.0), p, scenario([p], [1, 1]))
    with pytest.raises(InputError):
        payment_basic(CfDContract("q", "2way", 1.0), p, scenario([p], [1, 1]))


def test_basic_hedge_metamorphic(rng):
    """Revenue plus basic payment is S * sum(q) whatever the prices."""
    p = plant(capacity=3.0, cf=rng.uniform(0, 1, 48))
    c = CfDContract("p", CfdType.BASIC, 63.0)
    target = 63.0 * core.total_generation(p, scenario([p], np.zeros(48)))
    for _ in range(100):
        s = scenario([p], rng.normal(50, 80, 48))
        total = core.market_revenue(p, s) + payment(c, p, None, s).payment
        assert total == pytest.approx(target, rel=1e-9)


def test_financial_self_reference_hedge(rng):
    p = plant(capacity=2.5, cf=rng.uniform(0, 1, 48))
    c = CfDContract("p", "financial", 1.5e5)
    for _ in range(20):
        s = scenario([p], rng.uniform(-20, 300, 48))
        total = core.market_revenue(p, s) + payment(c, p, s.fleet("Z"), s).payment
        assert total == pytest.approx(2.5 * 1.5e5, rel=1e-9)


@settings(max_examples=100, deadline=None)
@given(strike=st.floats(0, 500), shift=st.floats(-100, 100))
def test_2way_payment_linear_in_reference(strike, shift):
    i, ref = plant("i", cf=[0.4, 0.9]), plant("ref", cf=[0.7, 0.2])
    fleet = Fleet("Z", (ref,))
    base = scenario([i, ref], [20.0, 80.0])
    moved = scenario([i, ref], [20.0 + shift, 80.0 + shift])
    c = CfDContract("i", "2way", strike)
    delta = payment(c, i, fleet, base).payment - payment(c, i, fleet, moved).payment
    assert delta == pytest.approx(shift * 1.3, abs=1e-9 * max(1.0, abs(strike)))
