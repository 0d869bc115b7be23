"""Full-information benchmark: minimise social cost directly.

Social cost is the facility's bill minus the units' total utility.  Money
paid by the facility to the units appears on both sides and cancels, so
only grid purchases and consumption benefit remain.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .domain import DomainError, ResidentialUnit
from .game import purchase_allocation, sfc_cost, unit_arrays


@dataclass(frozen=True, eq=False)
class SocialCostResult:
    consumption: np.ndarray
    social_cost: float


def _check_bounds(consumption: np.ndarray, units: Sequence[ResidentialUnit]) -> None:
    if len(consumption) != len(units):
        raise DomainError("consumption vector and unit list differ in length")
    for u, e in zip(units, consumption):
        if not u.e_min <= e <= u.e_gen:
            raise DomainError(f"unit {u.id}: e={e} outside [{u.e_min}, {u.e_gen}]")


def social_cost(
    consumption: Sequence[float],
    units: Sequence[ResidentialUnit],
    e_req: float,
    p_sell: float,
    price: float,
) -> float:
    """Facility cost minus unit utilities, in cents.

    Unit revenue counts only energy the facility actually buys (pro rata when
    offers exceed ``e_req``), so the payment terms cancel for any price.
    """
    e = np.asarray(consumption, dtype=np.float64)
    _check_bounds(e, units)
    k, g, _ = unit_arrays(units)
    offers = g - e
    cost = sfc_cost(offers, price, e_req, p_sell)
    bought = purchase_allocation(offers, e_req)
    utility = float(np.sum(k * np.log1p(e))) + price * float(bought.sum())
    return cost - utility


def transfer_free_social_cost(
    consumption: Sequence[float], units: Sequence[ResidentialUnit], e_req: float, p_sell: float
) -> float:
    """Closed form with payments cancelled: grid bill minus consumption benefit."""
    e = np.asarray(consumption, dtype=np.float64)
    k, g, _ = unit_arrays(units)
    shortfall = max(e_req - float(np.sum(g - e)), 0.0)
    return p_sell * shortfall - float(np.sum(k * np.log1p(e)))


def _consumption_at(k, g, m, marginal):
    return np.clip(k / marginal - 1.0, m, g)


def centralized_optimum(units: Sequence[ResidentialUnit], e_req: float, p_sell: float) -> SocialCostResult:
    """Consumption vector minimising social cost with full information.

    Each unit consumes until its marginal benefit ``k/(1+e)`` falls to
    ``p_sell``.  If the resulting surplus exceeds ``e_req``, the extra is
    worth nothing to the facility, so units consume more: the common
    marginal benefit is lowered until the surplus exactly meets ``e_req``.
    """
    if not units:
        return SocialCostResult(np.zeros(0), p_sell * e_req)
    k, g, m = unit_arrays(units)
    e = _consumption_at(k, g, m, p_sell)
    surplus = float(np.sum(g - e))
    if surplus > e_req:
        lo = float(np.min(k / (1.0 + g)))  # at or below this everyone consumes e_gen
        lo = min(lo, p_sell) * 0.5
        if e_req <= 0:
            e = g.copy()
        else:
            f = lambda lam: float(np.sum(g - _consumption_at(k, g, m, lam))) - e_req
            lam = brentq(f, lo, p_sell, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=500)
            e = _consumption_at(k, g, m, lam)
    return SocialCostResult(e, transfer_free_social_cost(e, units, e_req, p_sell))


def relative_gap(distributed: float, centralized: float) -> float:
    """(distributed - centralized) / |centralized|."""
    if centralized == 0:
        return math.inf if distributed > 0 else 0.0
    return (distributed - centralized) / abs(centralized)
