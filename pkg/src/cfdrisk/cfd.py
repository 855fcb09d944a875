"""Ex-post CfD payments.

Positive payments flow from the government to the plant operator, negative
ones back to the government. Settlement is annual.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import core
from .core import CfdType, Fleet, PlantProfile, Scenario
from .errors import InputError


@dataclass(frozen=True)
class CfDContract:
    """A contract on one plant; ``strike`` is EUR/MW for financial CfDs, EUR/MWh otherwise."""

    plant_id: str
    cfd_type: CfdType
    strike: float
    duration: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "cfd_type", CfdType(self.cfd_type))
        if self.cfd_type is CfdType.NONE:
            raise InputError("a contract needs a CfD type other than 'none'")

    @property
    def unit(self) -> str:
        return self.cfd_type.strike_unit

    @classmethod
    def from_estimate(cls, estimate) -> "CfDContract":
        return cls(estimate.plant_id, estimate.cfd_type, estimate.value)


@dataclass(frozen=True)
class PaymentRecord:
    plant_id: str
    scenario_id: str
    cfd_type: CfdType
    payment: float
    reference_price: float | None
    reference_unit: str


def _check(contract: CfDContract, plant: PlantProfile, expected: CfdType) -> None:
    if contract.plant_id != plant.id:
        raise InputError(f"contract for {contract.plant_id} applied to plant {plant.id}")
    if contract.cfd_type is not expected:
        raise InputError(f"expected a {expected.value} contract, got {contract.cfd_type.value}")


def payment_basic(contract: CfDContract, plant: PlantProfile, s: Scenario) -> PaymentRecord:
    """sum_t (S - p_t) q_t; the reference is the hourly spot price."""
    _check(contract, plant, CfdType.BASIC)
    payment = contract.strike * core.total_generation(plant, s) - core.market_revenue(plant, s)
    return PaymentRecord(plant.id, s.id, CfdType.BASIC, payment, None, "EUR/MWh hourly")


def payment_2way(contract: CfDContract, plant: PlantProfile, fleet: Fleet, s: Scenario) -> PaymentRecord:
    """(S - v_n) * sum_t q_t with v_n the reference fleet's market value."""
    _check(contract, plant, CfdType.TWO_WAY)
    v_n = core.market_value_zone(fleet, s)
    payment = (contract.strike - v_n) * core.total_generation(plant, s)
    return PaymentRecord(plant.id, s.id, CfdType.TWO_WAY, payment, v_n, "EUR/MWh")


def payment_financial(contract: CfDContract, plant: PlantProfile, fleet: Fleet, s: Scenario) -> PaymentRecord:
    """Q * (S - r_n); does not depend on the plant's own output."""
    _check(contract, plant, CfdType.FINANCIAL)
    r_n = core.revenue_per_capacity_zone(fleet, s)
    payment = plant.capacity * (contract.strike - r_n)
    return PaymentRecord(plant.id, s.id, CfdType.FINANCIAL, payment, r_n, "EUR/MW")


def payment(contract: CfDContract, plant: PlantProfile, fleet: Fleet, s: Scenario) -> PaymentRecord:
    if contract.cfd_type is CfdType.BASIC:
        return payment_basic(contract, plant, s)
    if contract.cfd_type is CfdType.TWO_WAY:
        return payment_2way(contract, plant, fleet, s)
    return payment_financial(contract, plant, fleet, s)
