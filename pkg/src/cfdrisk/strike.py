"""Zero-expected-profit strike prices for the three CfD designs.

Deterministic strikes follow from one scenario. Strikes under uncertainty
replace every uncertain term by its expectation over a scenario ensemble,
computed hour by hour from means and covariances of capacity factors,
prices and capacity shares.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import core
from .core import CfdType, Fleet, PlantProfile, Reference, Scenario, ScenarioEnsemble, ZONE_REFERENCE
from .errors import DimensionError, InputError, UndefinedStrikeError

logger = logging.getLogger(__name__)

# Relative size of the neglected second-order ratio terms that triggers a warning.
TAYLOR_TOLERANCE = 0.01


class TaylorApproximationWarning(UserWarning):
    """The ratio-of-expectations approximation in the 2way strike is poor."""


@dataclass(frozen=True)
class StrikeEstimate:
    """A strike price split into its cost base and markup (negative: markdown)."""

    plant_id: str
    zone: str
    cfd_type: CfdType
    value: float
    cost_base: float
    markup: float
    diagnostics: dict = field(default_factory=dict, compare=False)

    @property
    def unit(self) -> str:
        return self.cfd_type.strike_unit


def _weights(weights, n):
    if weights is None:
        return np.full(n, 1.0 / n)
    w = np.asarray(weights, dtype=float)
    if w.shape != (n,):
        raise DimensionError(f"expected {n} scenario weights, got shape {w.shape}")
    if abs(w.sum() - 1.0) > 1e-12:
        raise InputError("scenario weights must sum to 1")
    return w


def expect(x, weights=None):
    """Weighted mean over the leading (scenario) axis."""
    x = np.asarray(x, dtype=float)
    return np.tensordot(_weights(weights, x.shape[0]), x, axes=1)


def cov(x, y, weights=None):
    """Population covariance over the leading (scenario) axis.

    Uniform weights give (1/S) * sum_s (x_s - E x)(y_s - E y).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x, y = np.broadcast_arrays(x, y)
    w = _weights(weights, x.shape[0])
    return expect((x - expect(x, w)) * (y - expect(y, w)), w)


def expect_product2(f, p, weights=None):
    """E[f p] = E[f] E[p] + Cov[f, p]."""
    return expect(f, weights) * expect(p, weights) + cov(f, p, weights)


def expect_product3(w, f, p, weights=None, drop_last_cov=True):
    """E[w f p] = E[w] E[f] E[p] + E[w] Cov[f, p] + Cov[w, f p].

    The last term vanishes when w is independent of f p and is dropped by
    default.
    """
    w = np.asarray(w, dtype=float)
    f = np.asarray(f, dtype=float)
    p = np.asarray(p, dtype=float)
    ew = expect(w, weights)
    value = ew * expect(f, weights) * expect(p, weights) + ew * cov(f, p, weights)
    if not drop_last_cov:
        value = value + cov(w, f * p, weights)
    return value


@dataclass(frozen=True)
class EstimatorStats:
    """Scenario statistics entering the strikes of one plant.

    Hourly arrays have shape (hours,) for the plant and (plants, hours) for
    the reference fleet, whose members are listed in ``fleet_ids``.
    """

    mean_f: np.ndarray
    mean_p: np.ndarray
    cov_fp: np.ndarray
    fleet_ids: tuple[str, ...]
    mean_w: np.ndarray
    mean_f_fleet: np.ndarray
    cov_fp_fleet: np.ndarray
    mean_wf_fleet: np.ndarray
    cov_w_fp_fleet: np.ndarray | None = None


@dataclass(frozen=True)
class _Samples:
    plant: PlantProfile
    f: np.ndarray        # (S, H) own capacity factors
    p: np.ndarray        # (S, H) zone prices
    fleet_ids: tuple[str, ...]
    fleet_f: np.ndarray  # (J, S, H); zero where a member is absent
    fleet_w: np.ndarray  # (J, S) capacity shares
    weights: np.ndarray


def _samples(plant_id: str, ensemble: ScenarioEnsemble, reference: Reference) -> _Samples:
    plants = [s.plant(plant_id) for s in ensemble]
    first = plants[0]
    if any(p.zone != first.zone for p in plants):
        raise InputError(f"plant {plant_id} changes zone between scenarios")
    if any(p.costs != first.costs for p in plants):
        raise InputError(f"plant {plant_id} has scenario-dependent cost parameters")
    fleets = [reference.fleet(s, plant_id) for s in ensemble]
    fleet_ids = tuple(sorted({m.id for fl in fleets for m in fl}))
    S, H, J = len(ensemble), ensemble[0].hours, len(fleet_ids)
    fleet_f = np.zeros((J, S, H))
    fleet_w = np.zeros((J, S))
    for s_idx, fleet in enumerate(fleets):
        for member, share in zip(fleet, fleet.weights):
            j = fleet_ids.index(member.id)
            fleet_f[j, s_idx] = member.capacity_factors
            fleet_w[j, s_idx] = share
    return _Samples(
        plant=first,
        f=np.stack([p.capacity_factors for p in plants]),
        p=np.stack([s.prices[first.zone] for s in ensemble]),
        fleet_ids=fleet_ids,
        fleet_f=fleet_f,
        fleet_w=fleet_w,
        weights=np.asarray(ensemble.weights),
    )


def estimator_stats(plant_id, ensemble, reference=ZONE_REFERENCE, drop_last_cov=True) -> EstimatorStats:
    smp = _samples(plant_id, ensemble, reference)
    wts = smp.weights
    w3 = smp.fleet_w[:, :, None]
    return EstimatorStats(
        mean_f=expect(smp.f, wts),
        mean_p=expect(smp.p, wts),
        cov_fp=cov(smp.f, smp.p, wts),
        fleet_ids=smp.fleet_ids,
        mean_w=expect(smp.fleet_w.T, wts),
        mean_f_fleet=np.stack([expect(f, wts) for f in smp.fleet_f]),
        cov_fp_fleet=np.stack([cov(f, smp.p, wts) for f in smp.fleet_f]),
        mean_wf_fleet=np.stack([expect_product2(np.broadcast_to(w, f.shape), f, wts) for w, f in zip(w3, smp.fleet_f)]),
        cov_w_fp_fleet=None
        if drop_last_cov
        else np.stack([cov(np.broadcast_to(w, f.shape), f * smp.p, wts) for w, f in zip(w3, smp.fleet_f)]),
    )


def _fleet_revenue_term(smp: _Samples, drop_last_cov: bool) -> float:
    """sum_j sum_t E[w_j f_j p]."""
    total = 0.0
    for w, f in zip(smp.fleet_w, smp.fleet_f):
        w_b = np.broadcast_to(w[:, None], f.shape)
        total += expect_product3(w_b, f, smp.p, smp.weights, drop_last_cov).sum()
    return float(total)


def _fleet_generation_term(smp: _Samples, drop_last_cov: bool) -> float:
    """sum_j sum_t E[w_j f_j].

    Dropping Cov[w, f p] in the numerator assumes w independent of the
    hourly series, so Cov[w, f] is dropped here too; otherwise flat prices
    would give a spurious markup.
    """
    total = 0.0
    for w, f in zip(smp.fleet_w, smp.fleet_f):
        if drop_last_cov:
            total += expect(w, smp.weights) * expect(f, smp.weights).sum()
        else:
            total += expect_product2(np.broadcast_to(w[:, None], f.shape), f, smp.weights).sum()
    return float(total)


def taylor_correction(x, y, weights=None) -> float:
    """Second-order correction E[X/Y] - E[X]/E[Y] ~ -Cov(X,Y)/E(Y)^2 + E(X)Var(Y)/E(Y)^3."""
    ex, ey = expect(x, weights), expect(y, weights)
    return float(-cov(x, y, weights) / ey**2 + ex * cov(y, y, weights) / ey**3)


def _check_taylor(plant_id, name, x, y, weights, diagnostics):
    ex, ey = float(expect(x, weights)), float(expect(y, weights))
    correction = taylor_correction(x, y, weights)
    ratio = ex / ey
    diagnostics[f"{name}_ratio"] = ratio
    diagnostics[f"{name}_correction"] = correction
    if abs(correction) > TAYLOR_TOLERANCE * abs(ratio):
        diagnostics["taylor_ok"] = False
        warnings.warn(
            f"2way strike of {plant_id}: neglected second-order term of the {name} market value "
            f"is {correction:.4g} EUR/MWh, above {TAYLOR_TOLERANCE:.0%} of {ratio:.4g}",
            TaylorApproximationWarning,
            stacklevel=3,
        )


def _check_generation(plant_id, expected_generation, what="expected capacity factors"):
    if not expected_generation > 0:
        raise UndefinedStrikeError(f"plant {plant_id}: sum of {what} is zero, strike undefined")


# -- deterministic --------------------------------------------------------

def strike_basic_det(plant: PlantProfile, s: Scenario) -> StrikeEstimate:
    _check_generation(plant.id, core.total_generation(plant, s), "generation")
    value = core.lcoe(plant, s)
    return StrikeEstimate(plant.id, plant.zone, CfdType.BASIC, value, value, 0.0)


def strike_2way_det(plant: PlantProfile, fleet: Fleet, s: Scenario) -> StrikeEstimate:
    _check_generation(plant.id, core.total_generation(plant, s), "generation")
    _check_generation(plant.id, sum(core.total_generation(p, s) for p in fleet), "reference generation")
    base = core.lcoe(plant, s)
    markup = core.market_value_zone(fleet, s) - core.market_value_plant(plant, s)
    return StrikeEstimate(plant.id, plant.zone, CfdType.TWO_WAY, base + markup, base, markup)


def strike_fin_det(plant: PlantProfile, fleet: Fleet, s: Scenario) -> StrikeEstimate:
    base = core.cost_per_capacity(plant, s)
    markup = core.revenue_per_capacity_zone(fleet, s) - core.revenue_per_capacity_plant(plant, s)
    return StrikeEstimate(plant.id, plant.zone, CfdType.FINANCIAL, base + markup, base, markup)


# -- under uncertainty ----------------------------------------------------

def strike_basic_unc(plant_id: str, ensemble: ScenarioEnsemble) -> StrikeEstimate:
    """c + A*M / sum_t E[f_t].

    Note this is not the mean of per-scenario LCOEs: the fixed cost is
    divided by the expected full-load hours.
    """
    plants = [s.plant(plant_id) for s in ensemble]
    f = np.stack([p.capacity_factors for p in plants])
    costs = plants[0].costs
    flh = float(expect(f, ensemble.weights).sum())
    _check_generation(plant_id, flh)
    value = costs.variable_cost + costs.fixed_cost_per_mw / flh
    return StrikeEstimate(plant_id, plants[0].zone, CfdType.BASIC, value, value, 0.0)


def strike_2way_unc(
    plant_id: str,
    ensemble: ScenarioEnsemble,
    reference: Reference = ZONE_REFERENCE,
    drop_last_cov: bool = True,
) -> StrikeEstimate:
    """Expected LCOE plus expected zonal minus own market value.

    Each market value expectation is approximated by the ratio of expected
    revenue to expected generation. The neglected second-order terms are
    reported in ``diagnostics`` and raise a TaylorApproximationWarning when
    they exceed TAYLOR_TOLERANCE of the ratio.
    """
    smp = _samples(plant_id, ensemble, reference)
    costs = smp.plant.costs
    wts = smp.weights
    own_gen = float(expect(smp.f, wts).sum())
    _check_generation(plant_id, own_gen)
    own_rev = float(expect_product2(smp.f, smp.p, wts).sum())
    fleet_gen = _fleet_generation_term(smp, drop_last_cov)
    _check_generation(plant_id, fleet_gen, "expected reference capacity factors")
    fleet_rev = _fleet_revenue_term(smp, drop_last_cov)

    base = costs.variable_cost + costs.fixed_cost_per_mw / own_gen
    markup = fleet_rev / fleet_gen - own_rev / own_gen

    diagnostics = {"taylor_ok": True}
    _check_taylor(plant_id, "own", (smp.f * smp.p).sum(axis=1), smp.f.sum(axis=1), wts, diagnostics)
    fleet_x = np.einsum("js,jsh,sh->s", smp.fleet_w, smp.fleet_f, smp.p)
    fleet_y = np.einsum("js,jsh->s", smp.fleet_w, smp.fleet_f)
    _check_taylor(plant_id, "zone", fleet_x, fleet_y, wts, diagnostics)
    return StrikeEstimate(plant_id, smp.plant.zone, CfdType.TWO_WAY, base + markup, base, markup, diagnostics)


def strike_fin_unc(
    plant_id: str,
    ensemble: ScenarioEnsemble,
    reference: Reference = ZONE_REFERENCE,
    drop_last_cov: bool = True,
) -> StrikeEstimate:
    """c * sum_t E[f] + A*M + sum_j sum_t E[w_j f_j p] - sum_t E[f p], in EUR/MW."""
    smp = _samples(plant_id, ensemble, reference)
    costs = smp.plant.costs
    wts = smp.weights
    base = costs.variable_cost * float(expect(smp.f, wts).sum()) + costs.fixed_cost_per_mw
    markup = _fleet_revenue_term(smp, drop_last_cov) - float(expect_product2(smp.f, smp.p, wts).sum())
    return StrikeEstimate(plant_id, smp.plant.zone, CfdType.FINANCIAL, base + markup, base, markup)


def strike_unc(cfd_type, plant_id, ensemble, reference=ZONE_REFERENCE, drop_last_cov=True) -> StrikeEstimate:
    cfd_type = CfdType(cfd_type)
    if cfd_type is CfdType.BASIC:
        return strike_basic_unc(plant_id, ensemble)
    if cfd_type is CfdType.TWO_WAY:
        return strike_2way_unc(plant_id, ensemble, reference, drop_last_cov)
    if cfd_type is CfdType.FINANCIAL:
        return strike_fin_unc(plant_id, ensemble, reference, drop_last_cov)
    raise InputError(f"no strike price for CfD type {cfd_type.value}")


def strike_det(cfd_type, plant: PlantProfile, fleet: Fleet, s: Scenario) -> StrikeEstimate:
    cfd_type = CfdType(cfd_type)
    if cfd_type is CfdType.BASIC:
        return strike_basic_det(plant, s)
    if cfd_type is CfdType.TWO_WAY:
        return strike_2way_det(plant, fleet, s)
    if cfd_type is CfdType.FINANCIAL:
        return strike_fin_det(plant, fleet, s)
    raise InputError(f"no strike price for CfD type {cfd_type.value}")


def strike_table(plant_ids, ensemble, types=core.CONTRACT_TYPES, reference=ZONE_REFERENCE, drop_last_cov=True):
    """Strikes for every plant and CfD type, in plant-then-type order."""
    return [
        strike_unc(t, pid, ensemble, reference, drop_last_cov)
        for pid in plant_ids
        for t in types
    ]
