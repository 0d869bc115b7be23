"""Leader/follower energy pricing for a shared facility and DER-owning households."""

__version__ = "0.1.0"

from .domain import (
    DomainError,
    GridTariff,
    ResidentialUnit,
    ScenarioError,
    SfcDemand,
    StorageConfig,
    SweepConfig,
    TouSchedule,
    validate_scenario,
)
from .game import (
    EquilibriumResult,
    best_response,
    closed_form_price,
    sfc_cost,
    solve_equilibrium,
    strategy_proof_check,
    utility,
    verify_equilibrium,
)
from .centralized import SocialCostResult, centralized_optimum, social_cost
from .storage import SlotMode, SlotPlan, apply_soc, charge_schedule, classify_slots, discharge_schedule
from .sim import DayReport, Scenario, baseline_cost, run_day, run_slot, sample_scenario

__all__ = [
    "DomainError", "GridTariff", "ResidentialUnit", "ScenarioError", "SfcDemand", "StorageConfig",
    "SweepConfig", "TouSchedule", "validate_scenario", "EquilibriumResult", "best_response",
    "closed_form_price", "sfc_cost", "solve_equilibrium", "strategy_proof_check", "utility",
    "verify_equilibrium", "SocialCostResult", "centralized_optimum", "social_cost", "SlotMode",
    "SlotPlan", "apply_soc", "charge_schedule", "classify_slots", "discharge_schedule", "DayReport",
    "Scenario", "baseline_cost", "run_day", "run_slot", "sample_scenario",
]
