"""Strike prices and ex-post risk analysis for two-way contracts for difference."""

from .cfd import CfDContract, PaymentRecord, payment, payment_2way, payment_basic, payment_financial
from .core import (
    CONTRACT_TYPES,
    BiddingZone,
    CfdType,
    CostParameters,
    Fleet,
    PlantLabel,
    PlantProfile,
    Reference,
    ReferenceMode,
    Scenario,
    ScenarioEnsemble,
    TimeGrid,
    annual_cost,
    annuity_factor,
    lcoe,
    market_value_plant,
    market_value_zone,
    revenue_per_capacity_plant,
    revenue_per_capacity_zone,
    total_generation,
)
from .config import StudyConfig, load_config
from .errors import (
    CfdRiskError,
    ConfigError,
    DataError,
    DimensionError,
    FormatError,
    InputError,
    PrerequisiteError,
    UndefinedRatioError,
    UndefinedStrikeError,
)
from .expost import (
    coefficient_of_variation,
    consumer_price,
    cost_recovery,
    cv_table,
    distribution_summary,
    evaluate,
    zone_payments,
)
from .market import DemandSegment, DispatchableUnit, MarketConfig, build_ensemble, clear_hour, clear_market, simulate_scenario
from .strike import (
    StrikeEstimate,
    TaylorApproximationWarning,
    strike_2way_det,
    strike_2way_unc,
    strike_basic_det,
    strike_basic_unc,
    strike_fin_det,
    strike_fin_unc,
    strike_det,
    strike_table,
    strike_unc,
)

__version__ = "0.1.0"
