import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sfcgame.domain import DomainError, GridTariff, ResidentialUnit, SweepConfig
from sfcgame.game import (
    best_response,
    closed_form_price,
    leader_costs,
    price_grid,
    purchase_allocation,
    sfc_cost,
    solve_equilibrium,
    strategy_proof_check,
    utility,
    verify_equilibrium,
)
from conftest import random_units

# 100 * ln(11), 30 digits via mpmath
U_FULL_CONSUMPTION = 239.789527279837054406194357797
# exact sfc cost at sqrt(600) for the two-unit instance (numpy, float64)
COST_AT_CLOSED_FORM = 2537.7754868340476


# -- utility -----------------------------------------------------------------

def test_utility_pure_revenue():
    assert utility(ResidentialUnit(1, 100, 10), 0.0, 20.0) == 200.0


def test_utility_full_consumption():
    assert utility(ResidentialUnit(1, 100, 10), 10.0, 20.0) == pytest.approx(U_FULL_CONSUMPTION, abs=1e-12)


def test_utility_grid_argmax_matches_best_response():
    # brute-force argmax on a 1e-3 grid found e = 3.000
    u = ResidentialUnit(1, 100, 10)
    grid = np.linspace(0, 10, 10001)
    vals = [utility(u, float(e), 25.0) for e in grid]
    assert grid[int(np.argmax(vals))] == pytest.approx(3.0, abs=1e-9)
    assert best_response(u, 25.0) == pytest.approx(3.0, abs=1e-12)


@pytest.mark.parametrize("e", [-0.1, 10.5])
def test_utility_domain(e):
    with pytest.raises(DomainError):
        utility(ResidentialUnit(1, 100, 10), e, 20.0)


def test_utility_rejects_nonpositive_price():
    with pytest.raises(DomainError):
        utility(ResidentialUnit(1, 100, 10), 1.0, 0.0)


def test_utility_strictly_concave_fd():
    u = ResidentialUnit(1, 120, 10)
    h = 1e-3
    for e in np.linspace(h, 10 - h, 200):
        d2 = (utility(u, e + h, 30) - 2 * utility(u, e, 30) + utility(u, e - h, 30)) / h**2
        assert d2 < 0


# -- best response -----------------------------------------------------------

def test_best_response_clamps():
    u = ResidentialUnit(1, 100, 10)
    assert best_response(u, 8.0) == 10.0
    assert best_response(u, 100.0) == 0.0
    with pytest.raises(DomainError):
        best_response(u, 0.0)


def test_best_response_respects_essential_load():
    u = ResidentialUnit(1, 100, 10, e_min=2.0)
    assert best_response(u, 50.0) == 2.0


@given(st.floats(1, 300), st.floats(0.5, 20), st.floats(1, 200), st.floats(1, 200))
def test_best_response_non_increasing(k, g, p1, p2):
    u = ResidentialUnit(1, k, g)
    lo, hi = sorted((p1, p2))
    assert best_response(u, hi) <= best_response(u, lo)


@given(st.floats(1, 300), st.floats(0.5, 20), st.floats(1, 200))
def test_best_response_is_constrained_argmax(k, g, p):
    u = ResidentialUnit(1, k, g)
    e_star = best_response(u, p)
    best = utility(u, e_star, p)
    for e in np.linspace(0, g, 101):
        assert utility(u, float(e), p) <= best + 1e-9 * max(1.0, abs(best))


# -- leader cost -------------------------------------------------------------

def test_cost_without_units():
    assert sfc_cost([], 30.0, 50.0, 60.0) == 3000.0


def test_cost_baseline_150kwh_at_70():
    assert sfc_cost([], 0.0, 150.0, 70.0) / 100 == 105.0


def test_cost_hand_evaluated():
    # 24.495 * 13.018 + 60 * 36.982
    assert sfc_cost([6.917, 6.101], 24.495, 50.0, 60.0) == pytest.approx(2537.79591, abs=1e-6)


def test_cost_cap_keeps_grid_term_nonnegative():
    # offers exceed requirement: only 10 kWh bought
    assert sfc_cost([8.0, 8.0], 20.0, 10.0, 60.0) == pytest.approx(200.0)


@given(st.lists(st.floats(0, 10), max_size=10), st.floats(1, 100))
def test_cost_at_grid_price_is_grid_cost(offers, p_sell):
    e_req = sum(offers) + 1.0
    assert sfc_cost(offers, p_sell, e_req, p_sell) == p_sell * e_req


def test_purchase_allocation_pro_rata():
    b = purchase_allocation(np.array([6.0, 2.0]), 4.0)
    assert b.tolist() == [3.0, 1.0]
    assert purchase_allocation(np.array([1.0, 2.0]), 10.0).tolist() == [1.0, 2.0]


# -- closed form -------------------------------------------------------------

def test_closed_form_two_units(two_units, tariff60):
    assert closed_form_price(two_units, tariff60, 0.01) == pytest.approx(math.sqrt(600), abs=1e-12)


def test_closed_form_is_grid_minimiser(two_units, tariff60):
    # 1e-3 grid over [p_buy, p_sell] with best responses substituted
    grid = np.arange(8.45, 60 + 1e-9, 1e-3)
    costs = leader_costs(grid, two_units, 50.0, 60.0)
    p_grid = grid[int(np.argmin(costs))]
    assert abs(p_grid - closed_form_price(two_units, tariff60, 0.01)) <= 1e-3


def test_closed_form_floor():
    units = [ResidentialUnit(1, 1.0, 10.0)]
    assert closed_form_price(units, GridTariff(8.45, 60.0), 0.25) == 8.45 + 0.25


def test_closed_form_above_sell_price_sweep_hits_boundary():
    units = [ResidentialUnit(1, 61.0, 0.0)]
    t = GridTariff(8.45, 60.0)
    assert closed_form_price(units, t, 0.01) == pytest.approx(math.sqrt(3660))
    res = solve_equilibrium(units, 50.0, t)
    assert res.price_star == 60.0
    assert res.sfc_cost_star == 3000.0


def test_closed_form_needs_units(tariff60):
    with pytest.raises(DomainError):
        closed_form_price([], tariff60, 0.01)


# -- sweep -------------------------------------------------------------------

def test_price_grid_endpoints():
    g = price_grid(8.45, 60.0, 0.01)
    assert g[0] == 8.45 and g[-1] == 60.0
    assert np.all(np.diff(g) > 0)
    g = price_grid(8.45, 60.0, 0.7)
    assert g[-1] == 60.0 and g[-2] < 60.0


def test_sweep_two_units(two_units, tariff60):
    res = solve_equilibrium(two_units, 50.0, tariff60, SweepConfig(0.01))
    assert abs(res.price_star - math.sqrt(600)) <= 0.01
    assert res.sfc_cost_star == pytest.approx(COST_AT_CLOSED_FORM, abs=1e-3)
    assert res.sfc_cost_star >= COST_AT_CLOSED_FORM - 1e-9


def test_sweep_without_units(tariff60):
    res = solve_equilibrium([], 50.0, tariff60)
    assert res.sfc_cost_star == 3000.0
    # every price ties the initial value; the <= rule keeps the last one
    assert res.price_star == 60.0


def test_sweep_result_invariants(two_units, tariff60):
    res = solve_equilibrium(two_units, 50.0, tariff60)
    np.testing.assert_array_equal(res.offers_star + res.consumption_star, [10.0, 10.0])
    assert res.sfc_cost_star == min(res.trace_costs.min(), 3000.0)
    assert 8.45 <= res.price_star <= 60.0
    assert np.all(np.diff(res.best_so_far) <= 0)
    assert res.trace[0][0] == 8.45


def test_ties_go_to_largest_price():
    # offers are zero at every price, so all costs tie at p_sell * e_req
    units = [ResidentialUnit(1, 1000.0, 5.0)]
    res = solve_equilibrium(units, 20.0, GridTariff(8.45, 60.0))
    assert np.all(res.trace_costs == 1200.0)
    assert res.price_star == 60.0


def test_sweep_matches_scalar_cost(two_units, tariff60):
    res = solve_equilibrium(two_units, 50.0, tariff60, SweepConfig(0.5))
    for p, c in res.trace:
        offers = [u.e_gen - best_response(u, p) for u in two_units]
        assert c == sfc_cost(offers, p, 50.0, 60.0)


def test_excess_revenue_when_cap_binds():
    units = [ResidentialUnit(i, 100.0, 10.0) for i in range(4)]
    res = solve_equilibrium(units, 5.0, GridTariff(8.45, 60.0))
    assert res.purchases.sum() == pytest.approx(5.0)
    lost = res.ru_revenue(False).sum()
    sold = res.ru_revenue(True).sum()
    assert sold - lost == pytest.approx(res.excess.sum() * 8.45)


def test_negative_requirement_rejected(two_units, tariff60):
    with pytest.raises(DomainError):
        solve_equilibrium(two_units, -1.0, tariff60)


# -- verification ------------------------------------------------------------

@pytest.mark.parametrize("seed", range(5))
def test_verify_random(seed):
    rng = np.random.default_rng(seed)
    units = random_units(rng, 5)
    t = GridTariff(8.45, 60.0)
    res = solve_equilibrium(units, 50.0, t)
    rep = verify_equilibrium(res, units, 50.0, t)
    assert rep.passed, rep
    assert strategy_proof_check(res, units)


def test_price_perturbation_raises_cost(two_units, tariff60):
    res = solve_equilibrium(two_units, 50.0, tariff60)
    bumped = leader_costs(np.array([res.price_star + 5 * 0.01]), two_units, 50.0, 60.0)[0]
    assert bumped > res.sfc_cost_star


@pytest.mark.parametrize("delta", [-0.5, 0.5])
def test_consumption_perturbation_lowers_utility(two_units, tariff60, delta):
    res = solve_equilibrium(two_units, 50.0, tariff60)
    for u, e in zip(two_units, res.consumption_star):
        assert utility(u, e + delta, res.price_star) < utility(u, e, res.price_star)


def test_tampered_result_not_strategy_proof(two_units, tariff60):
    res = solve_equilibrium(two_units, 50.0, tariff60)
    res.consumption_star[0] += 0.1
    assert not strategy_proof_check(res, two_units)


def test_single_unit_strategy_proof(tariff60):
    units = [ResidentialUnit(1, 100.0, 10.0)]
    assert strategy_proof_check(solve_equilibrium(units, 50.0, tariff60), units)


def test_verify_detects_bad_price(two_units, tariff60):
    res = solve_equilibrium(two_units, 50.0, tariff60)
    bad = type(res)(**{**res.__dict__, "sfc_cost_star": res.sfc_cost_star + 1.0})
    assert not verify_equilibrium(bad, two_units, 50.0, tariff60).leader.passed


def test_verify_detects_bad_consumption(two_units, tariff60):
    res = solve_equilibrium(two_units, 50.0, tariff60)
    res.consumption_star[1] = 9.0
    rep = verify_equilibrium(res, two_units, 50.0, tariff60)
    assert not rep.follower.passed
    assert rep.follower.worst > 1.0
