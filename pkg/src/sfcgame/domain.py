"""Shared value types and scenario validation.

Canonical units everywhere inside the package are kWh for energy and
cents/kWh for prices; costs and utilities are in cents. Conversion to
dollars happens only when reports are written.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

logger = logging.getLogger(__name__)


class ScenarioError(ValueError):
    """A scenario (or one of its parts) violates a domain invariant."""


class DomainError(ValueError):
    """A function was evaluated outside its mathematical domain."""


def _finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ScenarioError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class ResidentialUnit:
    """One follower: a household (or aggregator) owning a DER and no storage.

    ``k_pref`` is in cents so that ``k ln(1 + e)`` is commensurate with the
    revenue term ``price * (e_gen - e)``.
    """

    id: int
    k_pref: float
    e_gen: float
    e_min: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "k_pref", _finite("k_pref", self.k_pref))
        object.__setattr__(self, "e_gen", _finite("e_gen", self.e_gen))
        object.__setattr__(self, "e_min", _finite("e_min", self.e_min))
        if self.k_pref <= 0:
            raise ScenarioError(f"unit {self.id}: k_pref must be > 0, got {self.k_pref}")
        if self.e_gen < 0 or self.e_min < 0:
            raise ScenarioError(f"unit {self.id}: e_gen and e_min must be >= 0")

    def with_generation(self, e_gen: float) -> "ResidentialUnit":
        return ResidentialUnit(self.id, self.k_pref, e_gen, self.e_min)


@dataclass(frozen=True)
class GridTariff:
    p_buy: float
    p_sell: float

    def __post_init__(self):
        object.__setattr__(self, "p_buy", _finite("p_buy", self.p_buy))
        object.__setattr__(self, "p_sell", _finite("p_sell", self.p_sell))
        if not 0 < self.p_buy < self.p_sell:
            raise ScenarioError(
                f"tariff needs 0 < p_buy < p_sell, got p_buy={self.p_buy}, p_sell={self.p_sell}"
            )

    def with_sell_price(self, p_sell: float) -> "GridTariff":
        return GridTariff(self.p_buy, p_sell)


@dataclass(frozen=True)
class TouSchedule:
    """Per-slot grid sale price; every slot lasts one hour."""

    prices: tuple[float, ...]

    def __post_init__(self):
        prices = tuple(_finite("tou price", p) for p in self.prices)
        if not prices:
            raise ScenarioError("ToU schedule needs at least one slot")
        if any(p <= 0 for p in prices):
            raise ScenarioError("ToU prices must all be > 0")
        object.__setattr__(self, "prices", prices)

    def __len__(self) -> int:
        return len(self.prices)


@dataclass(frozen=True)
class SfcDemand:
    """Facility energy need: ``e_req`` for single-slot games, ``eqp_load`` per slot for day runs."""

    e_req: float | None = None
    eqp_load: tuple[float, ...] = ()

    def __post_init__(self):
        if self.e_req is not None:
            object.__setattr__(self, "e_req", _finite("e_req", self.e_req))
            if self.e_req < 0:
                raise ScenarioError(f"e_req must be >= 0, got {self.e_req}")
        load = tuple(_finite("eqp_load", v) for v in self.eqp_load)
        if any(v < 0 for v in load):
            raise ScenarioError("eqp_load entries must be >= 0")
        object.__setattr__(self, "eqp_load", load)


@dataclass(frozen=True)
class StorageConfig:
    """SFC battery parameters and the two ToU thresholds that drive it.

    ``q_tar_dis`` defaults to ``q_ini`` so a day ends where it started.
    """

    capacity: float
    efficiency: float
    max_rate: float
    q_ini: float
    q_tar_ch: float
    p_min_threshold: float
    p_max_threshold: float
    q_tar_dis: float | None = None

    def __post_init__(self):
        for name in ("capacity", "efficiency", "max_rate", "q_ini", "q_tar_ch",
                     "p_min_threshold", "p_max_threshold"):
            object.__setattr__(self, name, _finite(name, getattr(self, name)))
        if self.q_tar_dis is None:
            object.__setattr__(self, "q_tar_dis", self.q_ini)
        else:
            object.__setattr__(self, "q_tar_dis", _finite("q_tar_dis", self.q_tar_dis))
        if not 0 < self.efficiency <= 1:
            raise ScenarioError(f"efficiency must lie in (0, 1], got {self.efficiency}")
        if not 0 <= self.q_tar_dis <= self.q_ini <= self.q_tar_ch <= self.capacity:
            raise ScenarioError(
                "storage needs 0 <= q_tar_dis <= q_ini <= q_tar_ch <= capacity, got "
                f"{self.q_tar_dis}, {self.q_ini}, {self.q_tar_ch}, {self.capacity}"
            )
        if self.max_rate <= 0:
            raise ScenarioError("max_rate must be > 0")
        if not 0 < self.p_min_threshold <= self.p_max_threshold:
            raise ScenarioError("thresholds need 0 < p_min_threshold <= p_max_threshold")

    def scaled(self, capacity: float) -> "StorageConfig":
        """Same device at another capacity, SOC levels scaled proportionally."""
        r = capacity / self.capacity
        return StorageConfig(
            capacity=capacity,
            efficiency=self.efficiency,
            max_rate=self.max_rate,
            q_ini=self.q_ini * r,
            q_tar_ch=self.q_tar_ch * r,
            p_min_threshold=self.p_min_threshold,
            p_max_threshold=self.p_max_threshold,
            q_tar_dis=self.q_tar_dis * r,
        )


@dataclass(frozen=True)
class SweepConfig:
    price_step: float = 0.01
    alpha: float = 0.01

    def __post_init__(self):
        object.__setattr__(self, "price_step", _finite("price_step", self.price_step))
        object.__setattr__(self, "alpha", _finite("alpha", self.alpha))
        if self.price_step <= 0:
            raise ScenarioError("price_step must be > 0")
        if self.alpha <= 0:
            raise ScenarioError("alpha must be > 0")


@dataclass(frozen=True)
class Exclusion:
    unit: ResidentialUnit
    reason: str


@dataclass
class ValidationOutcome:
    eligible: list[ResidentialUnit] = field(default_factory=list)
    dropped: list[Exclusion] = field(default_factory=list)


def ineligibility(unit: ResidentialUnit, tariff: GridTariff) -> str | None:
    """Why ``unit`` cannot play against ``tariff``, or None if it can.

    The preference bound ``k >= p_sell (1 + e_min)`` keeps the unclamped
    best response ``k/p - 1`` at or above the essential load for every
    price in ``[p_buy, p_sell]``.
    """
    if unit.e_gen <= unit.e_min:
        return f"e_gen={unit.e_gen} <= e_min={unit.e_min}: nothing to sell"
    bound = tariff.p_sell * (1.0 + unit.e_min)
    if unit.k_pref < bound:
        return f"k_pref={unit.k_pref} < p_sell*(1+e_min)={bound}"
    return None


def screen_units(units: Iterable[ResidentialUnit], tariff: GridTariff) -> ValidationOutcome:
    out = ValidationOutcome()
    for u in units:
        reason = ineligibility(u, tariff)
        if reason is None:
            out.eligible.append(u)
        else:
            out.dropped.append(Exclusion(u, reason))
    return out


def validate_scenario(
    units: Sequence[ResidentialUnit],
    tariff: GridTariff | None,
    demand: SfcDemand | None,
) -> list[ResidentialUnit]:
    """Return the units allowed to play; dropped units are logged."""
    if tariff is None:
        raise ScenarioError("scenario has no grid tariff")
    if demand is None:
        raise ScenarioError("scenario has no facility demand")
    outcome = screen_units(units, tariff)
    for ex in outcome.dropped:
        logger.info("unit %s excluded: %s", ex.unit.id, ex.reason)
    return outcome.eligible
