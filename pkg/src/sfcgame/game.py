"""Single-slot leader/follower pricing game.

The facility controller (leader) posts a price per kWh; each residential
unit (follower) picks its own consumption, selling the rest of its
generation to the facility.  The leader's optimum is found by sweeping the
price from the grid buy-back price to the grid sale price.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .domain import DomainError, GridTariff, ResidentialUnit, SweepConfig


def utility(unit: ResidentialUnit, e: float, price: float) -> float:
    """Follower payoff in cents: consumption benefit plus sales revenue."""
    if price <= 0:
        raise DomainError(f"price must be > 0, got {price}")
    if not unit.e_min <= e <= unit.e_gen:
        raise DomainError(f"unit {unit.id}: e={e} outside [{unit.e_min}, {unit.e_gen}]")
    return unit.k_pref * math.log1p(e) + price * (unit.e_gen - e)


def best_response(unit: ResidentialUnit, price: float) -> float:
    """Utility-maximising consumption at ``price``.

    ``k/p - 1`` is the stationary point of the concave utility; clamping it
    to the feasible interval gives the exact constrained argmax.
    """
    if price <= 0:
        raise DomainError(f"price must be > 0, got {price}")
    e = unit.k_pref / price - 1.0
    if e < unit.e_min:
        e = unit.e_min
    if e > unit.e_gen:
        e = unit.e_gen
    return e


def sfc_cost(offers: Sequence[float], price: float, e_req: float, p_sell: float) -> float:
    """Facility cost in cents for buying ``e_req`` from the offers and the grid.

    Purchases from units are capped at ``e_req``; the remainder comes from
    the grid at ``p_sell``.  Written as ``p_sell*e_req - (p_sell-price)*bought``,
    which equals ``price*bought + p_sell*(e_req-bought)``.
    """
    s = 0.0
    for o in offers:
        s += o
    bought = min(s, e_req)
    return p_sell * e_req - (p_sell - price) * bought


def purchase_allocation(offers: np.ndarray, e_req: float) -> np.ndarray:
    """Split the capped purchase across units in proportion to their offers."""
    offers = np.asarray(offers, dtype=np.float64)
    total = offers.sum()
    if total <= e_req or total == 0:
        return offers.copy()
    return offers * (e_req / total)


def closed_form_price(units: Sequence[ResidentialUnit], tariff: GridTariff, alpha: float) -> float:
    """Stationary price of the uncapped, unclamped leader cost, floored above p_buy."""
    if not units:
        raise DomainError("closed-form price needs at least one unit")
    k_sum = sum(u.k_pref for u in units)
    g_sum = sum(u.e_gen for u in units)
    p = math.sqrt(tariff.p_sell * k_sum / (len(units) + g_sum))
    if p > tariff.p_buy:
        return p
    return tariff.p_buy + alpha


def price_grid(p_buy: float, p_sell: float, step: float) -> np.ndarray:
    """Prices ``p_buy + i*step`` up to ``p_sell``; ``p_sell`` itself is always included."""
    n = int(math.floor((p_sell - p_buy) / step + 1e-9))
    grid = p_buy + step * np.arange(n + 1, dtype=np.float64)
    if p_sell - grid[-1] > 1e-9 * max(1.0, abs(p_sell)):
        grid = np.append(grid, p_sell)
    else:
        grid[-1] = p_sell
    return grid


def unit_arrays(units: Sequence[ResidentialUnit]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    k = np.array([u.k_pref for u in units], dtype=np.float64)
    g = np.array([u.e_gen for u in units], dtype=np.float64)
    m = np.array([u.e_min for u in units], dtype=np.float64)
    return k, g, m


@dataclass(frozen=True, eq=False)
class EquilibriumResult:
    price_star: float
    consumption_star: np.ndarray
    offers_star: np.ndarray
    sfc_cost_star: float
    trace_prices: np.ndarray
    trace_costs: np.ndarray
    e_req: float
    p_sell: float
    p_buy: float
    purchases: np.ndarray = field(repr=False)

    @property
    def trace(self) -> list[tuple[float, float]]:
        return list(zip(self.trace_prices.tolist(), self.trace_costs.tolist()))

    @property
    def best_so_far(self) -> np.ndarray:
        """Running minimum of the trace, started at the all-grid cost."""
        init = self.p_sell * self.e_req
        return np.minimum.accumulate(np.minimum(self.trace_costs, init))

    @property
    def excess(self) -> np.ndarray:
        """Offered energy the facility did not buy (nonzero only when the cap binds)."""
        return self.offers_star - self.purchases

    def ru_revenue(self, excess_to_grid: bool = False) -> np.ndarray:
        """Cash each unit actually receives, in cents.

        Unbought excess is either lost or sold to the grid at the buy-back price.
        """
        rev = self.purchases * self.price_star
        if excess_to_grid:
            rev = rev + self.excess * self.p_buy
        return rev


def solve_equilibrium(
    units: Sequence[ResidentialUnit],
    e_req: float,
    tariff: GridTariff,
    sweep: SweepConfig | None = None,
) -> EquilibriumResult:
    """Sweep the leader price and keep the (last) cheapest one.

    The search starts from the all-grid cost ``p_sell * e_req`` and replaces
    the incumbent whenever a price costs no more than it.
    """
    sweep = sweep or SweepConfig()
    if e_req < 0:
        raise DomainError(f"e_req must be >= 0, got {e_req}")
    prices = price_grid(tariff.p_buy, tariff.p_sell, sweep.price_step)
    k, g, m = unit_arrays(units)
    c_init = tariff.p_sell * e_req
    costs, best_i = _kernels.sweep(prices, k, g, m, float(e_req), tariff.p_sell, c_init)
    if best_i < 0:
        # Unreachable in exact arithmetic: the p_sell endpoint always ties c_init.
        price_star, cost_star = tariff.p_sell, c_init
    else:
        price_star, cost_star = float(prices[best_i]), float(costs[best_i])
    consumption = np.array([best_response(u, price_star) for u in units], dtype=np.float64)
    offers = g - consumption
    return EquilibriumResult(
        price_star=price_star,
        consumption_star=consumption,
        offers_star=offers,
        sfc_cost_star=cost_star,
        trace_prices=prices,
        trace_costs=np.asarray(costs),
        e_req=float(e_req),
        p_sell=tariff.p_sell,
        p_buy=tariff.p_buy,
        purchases=purchase_allocation(offers, e_req),
    )


@dataclass(frozen=True)
class CheckOutcome:
    passed: bool
    worst: float
    detail: str = ""


@dataclass(frozen=True)
class VerificationReport:
    follower: CheckOutcome
    leader: CheckOutcome

    @property
    def passed(self) -> bool:
        return self.follower.passed and self.leader.passed


def leader_costs(prices: np.ndarray, units: Sequence[ResidentialUnit], e_req: float, p_sell: float) -> np.ndarray:
    """Leader cost at each price with every unit at its best response (plain numpy)."""
    prices = np.asarray(prices, dtype=np.float64)
    k, g, m = unit_arrays(units)
    if len(units) == 0:
        return np.full(prices.shape, p_sell * e_req)
    e = np.clip(k[None, :] / prices[:, None] - 1.0, m[None, :], g[None, :])
    bought = np.minimum((g[None, :] - e).sum(axis=1), e_req)
    return bought * prices + p_sell * (e_req - bought)


def verify_equilibrium(
    result: EquilibriumResult,
    units: Sequence[ResidentialUnit],
    e_req: float,
    tariff: GridTariff,
    n_points: int = 1000,
    tol: float = 1e-6,
    prices: np.ndarray | None = None,
) -> VerificationReport:
    """Check both equilibrium conditions numerically.

    Followers: no unit gains more than ``tol`` cents by any of ``n_points``
    consumptions on its feasible interval.  Leader: no swept price (or the
    supplied ``prices``) yields a cost more than ``tol`` below the result.
    """
    k, g, m = unit_arrays(units)
    if len(units):
        gains, where = _kernels.follower_gain(
            k, g, m, np.asarray(result.consumption_star, dtype=np.float64), result.price_star, n_points
        )
        j = int(np.argmax(gains))
        f_worst = float(gains[j])
        f_detail = f"unit {units[j].id} gains {f_worst:.3e} at e={where[j]:.6f}"
    else:
        f_worst, f_detail = 0.0, "no units"
    follower = CheckOutcome(f_worst <= tol, f_worst, f_detail)

    grid = result.trace_prices if prices is None else np.asarray(prices, dtype=np.float64)
    costs = leader_costs(grid, units, e_req, tariff.p_sell)
    i = int(np.argmin(costs))
    l_worst = float(result.sfc_cost_star - costs[i])
    leader = CheckOutcome(
        l_worst <= tol, l_worst, f"cheapest probe {costs[i]:.6f} at price {grid[i]:.6f}"
    )
    return VerificationReport(follower, leader)


def strategy_proof_check(result: EquilibriumResult, units: Sequence[ResidentialUnit]) -> bool:
    """True iff every reported consumption is exactly the best response at the posted price."""
    if len(units) != len(result.consumption_star):
        return False
    return all(
        best_response(u, result.price_star) == float(e)
        for u, e in zip(units, result.consumption_star)
    )
