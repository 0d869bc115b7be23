"""Open-loop battery plan driven by the announced ToU price curve.

Slots cheaper than the low threshold charge, slots dearer than the high
threshold discharge, and each active slot gets a share of the SOC swing
proportional to how far its price sits past the threshold.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .domain import ScenarioError, StorageConfig, TouSchedule

logger = logging.getLogger(__name__)


class InfeasiblePlanError(ScenarioError):
    pass


class SlotMode(str, enum.Enum):
    CHARGE = "charge"
    DISCHARGE = "discharge"
    IDLE = "idle"


def classify_slots(tou: TouSchedule, cfg: StorageConfig) -> tuple[SlotMode, ...]:
    out = []
    for p in tou.prices:
        if p < cfg.p_min_threshold:
            out.append(SlotMode.CHARGE)
        elif p > cfg.p_max_threshold:
            out.append(SlotMode.DISCHARGE)
        else:
            out.append(SlotMode.IDLE)
    return tuple(out)


def _mask(classification: Sequence[SlotMode], mode: SlotMode) -> np.ndarray:
    return np.array([c is mode for c in classification], dtype=bool)


def charge_schedule(
    tou: TouSchedule, cfg: StorageConfig, classification: Sequence[SlotMode]
) -> np.ndarray:
    """Energy bought for the battery in each slot (zero outside charge slots)."""
    prices = np.asarray(tou.prices, dtype=np.float64)
    out = np.zeros(len(prices))
    delta = cfg.q_tar_ch - cfg.q_ini
    mask = _mask(classification, SlotMode.CHARGE)
    if delta == 0:
        return out
    if not mask.any():
        raise InfeasiblePlanError(
            f"target SOC {cfg.q_tar_ch} above initial {cfg.q_ini} but no slot is below "
            f"{cfg.p_min_threshold} c/kWh"
        )
    gap = cfg.p_min_threshold - prices[mask]
    share = gap * delta * cfg.efficiency / gap.sum()
    out[mask] = np.minimum(share, cfg.max_rate)
    return out


def discharge_schedule(
    tou: TouSchedule,
    cfg: StorageConfig,
    classification: Sequence[SlotMode],
    eqp_load: Sequence[float],
) -> np.ndarray:
    """Signed (non-positive) battery energy per slot; never more than the equipment load."""
    prices = np.asarray(tou.prices, dtype=np.float64)
    load = np.asarray(eqp_load, dtype=np.float64)
    if load.shape != prices.shape:
        raise ValueError(f"eqp_load has {load.size} slots, ToU has {prices.size}")
    out = np.zeros(len(prices))
    delta = cfg.q_tar_ch - cfg.q_tar_dis
    mask = _mask(classification, SlotMode.DISCHARGE)
    if delta == 0 or not mask.any():
        return out
    gap = prices[mask] - cfg.p_max_threshold
    share = gap * delta * cfg.efficiency / gap.sum()
    out[mask] = -np.minimum(np.minimum(share, cfg.max_rate), load[mask])
    return out


@dataclass(frozen=True, eq=False)
class SlotPlan:
    modes: tuple[SlotMode, ...]
    e_sd: np.ndarray
    soc_after: np.ndarray
    clamped: np.ndarray
    """Energy removed from each slot's request by the SOC bounds (kWh, >= 0)."""

    def __len__(self) -> int:
        return len(self.e_sd)


def apply_soc(
    amounts: Sequence[float], cfg: StorageConfig, modes: Sequence[SlotMode] | None = None
) -> SlotPlan:
    """Integrate SOC from ``q_ini`` and trim steps that would leave [0, capacity]."""
    amounts = np.asarray(amounts, dtype=np.float64)
    if modes is None:
        modes = tuple(
            SlotMode.CHARGE if a > 0 else SlotMode.DISCHARGE if a < 0 else SlotMode.IDLE
            for a in amounts
        )
    e_sd = amounts.copy()
    soc = np.empty(len(amounts))
    clamped = np.zeros(len(amounts))
    level = cfg.q_ini
    for t, a in enumerate(amounts):
        nxt = level + a
        if nxt > cfg.capacity:
            e_sd[t] = cfg.capacity - level
        elif nxt < 0:
            e_sd[t] = -level
        if e_sd[t] != a:
            clamped[t] = abs(a - e_sd[t])
            logger.warning("slot %d: storage request %.6g kWh trimmed to %.6g kWh", t, a, e_sd[t])
        level = level + e_sd[t]
        soc[t] = level
    return SlotPlan(tuple(modes), e_sd, soc, clamped)


def plan_storage(tou: TouSchedule, cfg: StorageConfig, eqp_load: Sequence[float]) -> SlotPlan:
    """Classify, schedule and integrate a whole day.

    A day with no charge slot leaves the battery at its initial charge
    rather than failing; discharge slots can still draw that down.
    """
    modes = classify_slots(tou, cfg)
    if SlotMode.CHARGE in modes:
        charge = charge_schedule(tou, cfg, modes)
    else:
        charge = np.zeros(len(tou))
    discharge = discharge_schedule(tou, cfg, modes, eqp_load)
    return apply_soc(charge + discharge, cfg, modes)
