"""Scenario model, seeded sampling, and the three-case daily study.

Case 1: no battery, no game (all energy bought from the grid).
Case 2: battery follows its ToU plan, energy still bought from the grid.
Case 3: same battery plan, and each slot's requirement is traded through
the pricing game before the grid covers the rest.
"""
from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .centralized import centralized_optimum, relative_gap, social_cost
from .domain import (
    GridTariff,
    ResidentialUnit,
    ScenarioError,
    SfcDemand,
    StorageConfig,
    SweepConfig,
    TouSchedule,
    validate_scenario,
)
from .game import EquilibriumResult, solve_equilibrium
from .storage import SlotPlan, apply_soc, plan_storage

# Hourly grid sale price over a day (c/kWh).  Nights sit under 40, the
# working day peaks in the mid 50s, the evening shoulder falls back.
DEFAULT_TOU = (
    32.0, 30.0, 28.0, 27.0, 28.0, 31.0, 36.0, 41.0, 44.0, 47.0, 50.0, 53.0,
    55.0, 56.0, 55.0, 52.0, 49.0, 51.0, 56.0, 58.0, 52.0, 46.0, 41.0, 36.0,
)


@dataclass(frozen=True)
class StudyConfig:
    """Ranges used when units and demand are drawn from a seed."""

    n_units: tuple[int, ...] = (5,)
    k_range: tuple[float, float] = (90.0, 150.0)
    e_gen: float = 10.0
    demand_range: tuple[float, float] = (300.0, 700.0)
    e_req_values: tuple[float, ...] = ()
    p_sell_values: tuple[float, ...] = ()
    capacities: tuple[float, ...] = ()

    def __post_init__(self):
        lo, hi = self.k_range
        if not 0 < lo <= hi:
            raise ScenarioError(f"k_range must satisfy 0 < lo <= hi, got {self.k_range}")
        lo, hi = self.demand_range
        if not 0 <= lo <= hi:
            raise ScenarioError(f"demand_range must satisfy 0 <= lo <= hi, got {self.demand_range}")
        if any(n < 0 for n in self.n_units):
            raise ScenarioError("n_units entries must be >= 0")
        if self.e_gen < 0:
            raise ScenarioError("e_gen must be >= 0")


@dataclass(frozen=True)
class Scenario:
    name: str
    units: tuple[ResidentialUnit, ...]
    tariff: GridTariff
    demand: SfcDemand
    tou: TouSchedule | None = None
    storage: StorageConfig | None = None
    sweep: SweepConfig = field(default_factory=SweepConfig)
    seed: int = 0
    study: StudyConfig | None = None
    generation: tuple[tuple[float, ...] | None, ...] = ()
    """Optional per-slot generation profile for each unit (None keeps ``e_gen``)."""
    excess_to_grid: bool = False

    def __post_init__(self):
        if self.generation and len(self.generation) != len(self.units):
            raise ScenarioError("generation profiles must match the unit list")
        n_slots = self.n_slots
        if self.demand.eqp_load and self.tou is not None and len(self.demand.eqp_load) != n_slots:
            raise ScenarioError(
                f"eqp_load has {len(self.demand.eqp_load)} slots but ToU has {n_slots}"
            )
        for prof in self.generation:
            if prof is not None and self.tou is not None and len(prof) != n_slots:
                raise ScenarioError("generation profile length differs from ToU length")

    @property
    def n_slots(self) -> int:
        return len(self.tou) if self.tou is not None else 1

    def units_at(self, t: int) -> list[ResidentialUnit]:
        if not self.generation:
            return list(self.units)
        return [
            u if prof is None else u.with_generation(prof[t])
            for u, prof in zip(self.units, self.generation)
        ]

    def replace(self, **changes) -> "Scenario":
        return dataclasses.replace(self, **changes)


# -- presets -----------------------------------------------------------------

def day_storage(capacity: float = 100.0) -> StorageConfig:
    return StorageConfig(
        capacity=capacity, efficiency=0.9, max_rate=24.0, q_ini=0.0, q_tar_ch=capacity,
        p_min_threshold=40.0, p_max_threshold=45.0, q_tar_dis=0.0,
    )


def draw_units(rng: np.random.Generator, n_units: int, study: StudyConfig) -> tuple[ResidentialUnit, ...]:
    k = rng.uniform(study.k_range[0], study.k_range[1], size=n_units)
    return tuple(ResidentialUnit(i + 1, float(k[i]), study.e_gen) for i in range(n_units))


def sample_scenario(
    seed: int,
    n_units: int = 5,
    ranges: StudyConfig | None = None,
    template: Scenario | None = None,
) -> Scenario:
    """Draw units (and per-slot demand when a ToU curve is present) from ``seed``.

    Everything not drawn is copied from ``template``, which defaults to the
    day preset.
    """
    base = template if template is not None else day_preset()
    ranges = ranges or base.study or StudyConfig()
    rng = np.random.default_rng(seed)
    units = draw_units(rng, n_units, ranges)
    demand = base.demand
    if base.tou is not None:
        lo, hi = ranges.demand_range
        load = rng.uniform(lo, hi, size=len(base.tou))
        demand = SfcDemand(e_req=base.demand.e_req, eqp_load=tuple(float(x) for x in load))
    return base.replace(units=units, demand=demand, seed=seed, study=ranges, generation=())


def single_slot_preset(seed: int = 0, n_units: int = 5) -> Scenario:
    study = StudyConfig(n_units=(n_units,))
    base = Scenario(
        name="single-slot",
        units=(),
        tariff=GridTariff(8.45, 60.0),
        demand=SfcDemand(e_req=50.0),
        seed=seed,
        study=study,
    )
    return sample_scenario(seed, n_units, study, template=base)


def day_preset(seed: int | None = None, n_units: int = 5) -> Scenario:
    study = StudyConfig(n_units=(n_units,))
    base = Scenario(
        name="day",
        units=(),
        tariff=GridTariff(8.45, max(DEFAULT_TOU)),
        demand=SfcDemand(eqp_load=(500.0,) * len(DEFAULT_TOU)),
        tou=TouSchedule(DEFAULT_TOU),
        storage=day_storage(),
        study=study,
    )
    if seed is None:
        return base
    return sample_scenario(seed, n_units, study, template=base)


# -- single slot -------------------------------------------------------------

def baseline_cost(e_req: float, p_sell: float) -> float:
    """All energy from the grid: ``p_sell * e_req`` cents."""
    if e_req < 0:
        raise ScenarioError(f"e_req must be >= 0, got {e_req}")
    return p_sell * e_req


class Mode(str, enum.Enum):
    GAME = "game"
    NO_GAME = "no-game"


@dataclass(frozen=True, eq=False)
class SlotOutcome:
    requirement: float
    cost: float
    equilibrium: EquilibriumResult | None = None


def slot_price(scenario: Scenario, t: int) -> float:
    if scenario.tou is None:
        return scenario.tariff.p_sell
    return scenario.tou.prices[t]


def slot_load(scenario: Scenario, t: int) -> float:
    if scenario.demand.eqp_load:
        return scenario.demand.eqp_load[t]
    if scenario.demand.e_req is None:
        raise ScenarioError("scenario has neither e_req nor eqp_load")
    return scenario.demand.e_req


def run_slot(scenario: Scenario, t: int, e_sd: float, mode: Mode | str) -> SlotOutcome:
    mode = Mode(mode)
    req = slot_load(scenario, t) + e_sd
    if req < 0:
        if req < -1e-9:
            raise AssertionError(f"slot {t}: negative requirement {req}; discharge cap violated")
        req = 0.0
    price = slot_price(scenario, t)
    if mode is Mode.NO_GAME:
        return SlotOutcome(req, price * req)
    tariff = scenario.tariff.with_sell_price(price)
    units = validate_scenario(scenario.units_at(t), tariff, scenario.demand)
    eq = solve_equilibrium(units, req, tariff, scenario.sweep)
    return SlotOutcome(req, eq.sfc_cost_star, eq)


# -- day ---------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DayReport:
    prices: np.ndarray
    eqp_load: np.ndarray
    plan: SlotPlan
    requirement: np.ndarray
    eq_price: np.ndarray
    cost_no_sd: np.ndarray
    cost_sd: np.ndarray
    cost_sd_game: np.ndarray

    @property
    def totals(self) -> tuple[float, float, float]:
        return (float(self.cost_no_sd.sum()), float(self.cost_sd.sum()), float(self.cost_sd_game.sum()))

    @property
    def game_reduction(self) -> float:
        """Fractional saving of case 3 over case 2."""
        _, c2, c3 = self.totals
        return (c2 - c3) / c2 if c2 else 0.0

    @property
    def total_reduction(self) -> float:
        """Fractional saving of case 3 over case 1."""
        c1, _, c3 = self.totals
        return (c1 - c3) / c1 if c1 else 0.0

    @property
    def savings(self) -> float:
        """Case 1 minus case 3 daily cost, in cents."""
        c1, _, c3 = self.totals
        return c1 - c3


def storage_plan(scenario: Scenario) -> SlotPlan:
    if scenario.tou is None:
        raise ScenarioError("day runs need a ToU schedule")
    load = [slot_load(scenario, t) for t in range(scenario.n_slots)]
    if scenario.storage is None:
        zeros = np.zeros(scenario.n_slots)
        cfg = StorageConfig(1.0, 1.0, 1.0, 0.0, 0.0, 1.0, 1.0)
        return apply_soc(zeros, cfg)
    return plan_storage(scenario.tou, scenario.storage, load)


def run_day(scenario: Scenario) -> DayReport:
    plan = storage_plan(scenario)
    n = scenario.n_slots
    prices = np.array(scenario.tou.prices, dtype=np.float64)
    load = np.array([slot_load(scenario, t) for t in range(n)])
    req = np.empty(n)
    eq_price = np.empty(n)
    c1 = np.empty(n)
    c2 = np.empty(n)
    c3 = np.empty(n)
    for t in range(n):
        c1[t] = run_slot(scenario, t, 0.0, Mode.NO_GAME).cost
        s2 = run_slot(scenario, t, float(plan.e_sd[t]), Mode.NO_GAME)
        s3 = run_slot(scenario, t, float(plan.e_sd[t]), Mode.GAME)
        req[t] = s2.requirement
        c2[t] = s2.cost
        c3[t] = s3.cost
        eq_price[t] = s3.equilibrium.price_star
    return DayReport(prices, load, plan, req, eq_price, c1, c2, c3)


# -- studies -----------------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    label: float
    baseline: float
    proposed: float

    @property
    def reduction(self) -> float:
        return (self.baseline - self.proposed) / self.baseline if self.baseline else 0.0


def _single_slot_cost(units, e_req, tariff, sweep) -> float:
    units = validate_scenario(units, tariff, SfcDemand(e_req=e_req))
    return solve_equilibrium(units, e_req, tariff, sweep).sfc_cost_star


def cost_vs_units(scenario: Scenario, n_values: Sequence[int], seeds: Sequence[int]) -> list[SweepRow]:
    """Mean equilibrium cost for each population size, averaged over ``seeds``."""
    study = scenario.study or StudyConfig()
    e_req = scenario.demand.e_req
    rows = []
    for n in n_values:
        costs = [
            _single_slot_cost(draw_units(np.random.default_rng(s), n, study), e_req, scenario.tariff, scenario.sweep)
            for s in seeds
        ]
        rows.append(SweepRow(n, baseline_cost(e_req, scenario.tariff.p_sell), float(np.mean(costs))))
    return rows


def cost_vs_requirement(scenario: Scenario, e_req_values: Sequence[float], seeds: Sequence[int], n_units: int) -> list[SweepRow]:
    study = scenario.study or StudyConfig()
    rows = []
    for e_req in e_req_values:
        costs = [
            _single_slot_cost(draw_units(np.random.default_rng(s), n_units, study), e_req, scenario.tariff, scenario.sweep)
            for s in seeds
        ]
        rows.append(SweepRow(e_req, baseline_cost(e_req, scenario.tariff.p_sell), float(np.mean(costs))))
    return rows


@dataclass(frozen=True)
class GapRow:
    n_units: int
    p_sell: float
    distributed: float
    centralized: float

    @property
    def gap(self) -> float:
        return relative_gap(self.distributed, self.centralized)


def social_costs(units: Sequence[ResidentialUnit], e_req: float, tariff: GridTariff, sweep: SweepConfig) -> tuple[float, float]:
    """(distributed equilibrium, centralized optimum) social cost in cents."""
    units = validate_scenario(units, tariff, SfcDemand(e_req=e_req))
    eq = solve_equilibrium(units, e_req, tariff, sweep)
    dist = social_cost(eq.consumption_star, units, e_req, tariff.p_sell, eq.price_star)
    cent = centralized_optimum(units, e_req, tariff.p_sell).social_cost
    return dist, cent


def centralized_gap(
    scenario: Scenario, n_values: Sequence[int], p_sell_values: Sequence[float], seeds: Sequence[int]
) -> list[GapRow]:
    study = scenario.study or StudyConfig()
    e_req = scenario.demand.e_req
    rows = []
    for p_sell in p_sell_values:
        tariff = scenario.tariff.with_sell_price(p_sell)
        for n in n_values:
            pairs = [
                social_costs(draw_units(np.random.default_rng(s), n, study), e_req, tariff, scenario.sweep)
                for s in seeds
            ]
            d, c = np.mean(pairs, axis=0)
            rows.append(GapRow(n, p_sell, float(d), float(c)))
    return rows


@dataclass(frozen=True)
class CapacityRow:
    capacity: float
    cost_no_sd: float
    cost_sd: float
    cost_sd_game: float

    @property
    def savings(self) -> float:
        return self.cost_no_sd - self.cost_sd_game


def capacity_study(scenario: Scenario, capacities: Sequence[float]) -> list[CapacityRow]:
    """Daily costs for the same day at each battery capacity (SOC levels scaled)."""
    if scenario.storage is None:
        raise ScenarioError("capacity study needs a storage section")
    rows = []
    for cap in capacities:
        rep = run_day(scenario.replace(storage=scenario.storage.scaled(cap)))
        rows.append(CapacityRow(cap, *rep.totals))
    return rows
