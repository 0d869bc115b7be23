"""Command line entry point: ``sfcgame <command> <scenario.scn> [flags]``.

Every command writes CSV files into ``--out``.  Each file starts with
``# seed=<n> version=<semver>`` followed by a comment stating the rounding
rule; numbers carry at most six decimals, rounded half-to-even.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from decimal import ROUND_HALF_EVEN, Decimal
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .domain import ScenarioError, SweepConfig, validate_scenario
from .game import closed_form_price, solve_equilibrium, strategy_proof_check, verify_equilibrium
from .scenario_file import parse_scenario
from .sim import (
    Scenario,
    StudyConfig,
    baseline_cost,
    capacity_study,
    centralized_gap,
    cost_vs_requirement,
    cost_vs_units,
    run_day,
    sample_scenario,
)

log = logging.getLogger("sfcgame")

COMMANDS = (
    "equilibrium", "verify", "day", "sweep-n", "sweep-req", "sweep-capacity", "centralized-gap",
)
_Q = Decimal("0.000001")


def fmt(x) -> str:
    """Six decimals, half-to-even; integers and strings pass through."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    d = Decimal(repr(float(x))).quantize(_Q, rounding=ROUND_HALF_EVEN)
    if d == 0:
        d = abs(d)
    return f"{d:f}"


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence], seed: int) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# seed={seed} version={__version__}\n")
        fh.write("# numbers: at most 6 decimals, round-half-even; money in USD unless column says _c\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def usd(cents: float) -> float:
    return cents / 100.0


def _materialise(scenario: Scenario, seed: int) -> Scenario:
    """Draw whatever the file leaves to the seed: units and, for day runs, the load."""
    need_units = not scenario.units
    need_load = scenario.tou is not None and not scenario.demand.eqp_load
    if not (need_units or need_load):
        return scenario.replace(seed=seed)
    study = scenario.study or StudyConfig()
    drawn = sample_scenario(seed, study.n_units[0], study, template=scenario)
    if not need_units:
        drawn = drawn.replace(units=scenario.units, generation=scenario.generation)
    if not need_load:
        drawn = drawn.replace(demand=scenario.demand)
    return drawn


def _seeds(args, scenario: Scenario) -> list[int]:
    base = args.seed if args.seed is not None else scenario.seed
    return list(range(base, base + args.seeds))


def _single_slot(scenario: Scenario):
    if scenario.demand.e_req is None:
        raise ScenarioError("this command needs [demand] e_req")
    units = validate_scenario(scenario.units, scenario.tariff, scenario.demand)
    return units, scenario.demand.e_req


def cmd_equilibrium(scenario: Scenario, out: Path, seed: int) -> int:
    units, e_req = _single_slot(scenario)
    res = solve_equilibrium(units, e_req, scenario.tariff, scenario.sweep)
    write_csv(out / "equilibrium_trace.csv", ["price_c_per_kWh", "sfc_cost_c"],
              zip(res.trace_prices, res.trace_costs), seed)
    revenue = res.ru_revenue(scenario.excess_to_grid)
    write_csv(
        out / "equilibrium_units.csv",
        ["unit_id", "k_pref_c", "e_gen_kWh", "consumption_kWh", "offer_kWh", "purchased_kWh", "revenue_c"],
        ((u.id, u.k_pref, u.e_gen, e, o, b, r) for u, e, o, b, r in
         zip(units, res.consumption_star, res.offers_star, res.purchases, revenue)),
        seed,
    )
    cf = closed_form_price(units, scenario.tariff, scenario.sweep.alpha) if units else "n/a"
    rows = [
        ("n_units", len(units)),
        ("price_star_c_per_kWh", res.price_star),
        ("closed_form_price_c_per_kWh", cf),
        ("sfc_cost_star_c", res.sfc_cost_star),
        ("sfc_cost_star_usd", usd(res.sfc_cost_star)),
        ("baseline_usd", usd(baseline_cost(e_req, scenario.tariff.p_sell))),
        ("sweep_points", len(res.trace_prices)),
        ("excess_to_grid", scenario.excess_to_grid),
    ]
    write_csv(out / "equilibrium_summary.csv", ["quantity", "value"], rows, seed)
    return 0


def cmd_verify(scenario: Scenario, out: Path, seed: int) -> int:
    units, e_req = _single_slot(scenario)
    res = solve_equilibrium(units, e_req, scenario.tariff, scenario.sweep)
    rep = verify_equilibrium(res, units, e_req, scenario.tariff)
    sp = strategy_proof_check(res, units)
    rows = [
        ("follower_no_profitable_deviation", rep.follower.passed, rep.follower.worst),
        ("leader_price_optimal", rep.leader.passed, rep.leader.worst),
        ("strategy_proof", sp, 0.0),
    ]
    write_csv(out / "verify.csv", ["check", "passed", "worst_violation_c"], rows, seed)
    ok = rep.passed and sp
    if not ok:
        log.error("equilibrium verification failed: %s / %s", rep.follower.detail, rep.leader.detail)
    return 0 if ok else 1


def cmd_day(scenario: Scenario, out: Path, seed: int) -> int:
    rep = run_day(scenario)
    plan = rep.plan
    rows = (
        (t, rep.prices[t], rep.eqp_load[t], plan.modes[t].value, plan.e_sd[t], plan.soc_after[t],
         rep.requirement[t], rep.eq_price[t], usd(rep.cost_no_sd[t]), usd(rep.cost_sd[t]),
         usd(rep.cost_sd_game[t]))
        for t in range(len(rep.prices))
    )
    write_csv(
        out / "day.csv",
        ["slot", "tou_price_c_per_kWh", "eqp_load_kWh", "sd_mode", "e_sd_kWh", "soc_after_kWh",
         "requirement_kWh", "eq_price_c_per_kWh", "cost_no_sd_no_game_usd", "cost_sd_no_game_usd",
         "cost_sd_game_usd"],
        rows, seed,
    )
    c1, c2, c3 = rep.totals
    write_csv(
        out / "day_totals.csv",
        ["case", "daily_cost_usd", "reduction_vs_case1_pct"],
        [
            ("no_sd_no_game", usd(c1), 0.0),
            ("sd_no_game", usd(c2), 100 * (c1 - c2) / c1 if c1 else 0.0),
            ("sd_game", usd(c3), 100 * rep.total_reduction),
        ],
        seed,
    )
    return 0


def cmd_sweep_n(scenario: Scenario, out: Path, seeds: list[int]) -> int:
    if scenario.demand.e_req is None:
        raise ScenarioError("sweep-n needs [demand] e_req")
    study = scenario.study or StudyConfig(n_units=(5, 10, 15, 20, 25))
    rows = cost_vs_units(scenario, study.n_units, seeds)
    write_csv(out / "sweep_n.csv", ["n_units", "baseline_usd", "proposed_usd", "reduction_pct"],
              ((int(r.label), usd(r.baseline), usd(r.proposed), 100 * r.reduction) for r in rows), seeds[0])
    return 0


def cmd_sweep_req(scenario: Scenario, out: Path, seeds: list[int]) -> int:
    study = scenario.study or StudyConfig(n_units=(10,))
    values = study.e_req_values or (60.0, 70.0, 80.0, 90.0, 100.0)
    rows = cost_vs_requirement(scenario, values, seeds, study.n_units[0])
    write_csv(out / "sweep_req.csv", ["e_req_kWh", "baseline_usd", "proposed_usd", "reduction_pct"],
              ((r.label, usd(r.baseline), usd(r.proposed), 100 * r.reduction) for r in rows), seeds[0])
    return 0


def cmd_sweep_capacity(scenario: Scenario, out: Path, seeds: list[int]) -> int:
    study = scenario.study or StudyConfig()
    caps = study.capacities or (25.0, 50.0, 75.0, 100.0)
    per_seed = [capacity_study(_materialise(scenario, s), caps) for s in seeds]
    rows = []
    for i, cap in enumerate(caps):
        r = [rs[i] for rs in per_seed]
        c1 = float(np.mean([x.cost_no_sd for x in r]))
        c2 = float(np.mean([x.cost_sd for x in r]))
        c3 = float(np.mean([x.cost_sd_game for x in r]))
        rows.append((cap, usd(c1), usd(c2), usd(c3), usd(c1 - c3), 100 * (c1 - c3) / c1 if c1 else 0.0))
    write_csv(out / "sweep_capacity.csv",
              ["capacity_kWh", "cost_no_sd_no_game_usd", "cost_sd_no_game_usd", "cost_sd_game_usd",
               "savings_usd", "savings_pct"], rows, seeds[0])
    return 0


def cmd_centralized_gap(scenario: Scenario, out: Path, seeds: list[int]) -> int:
    if scenario.demand.e_req is None:
        raise ScenarioError("centralized-gap needs [demand] e_req")
    study = scenario.study or StudyConfig(n_units=(5, 10, 15, 20, 25))
    prices = study.p_sell_values or (scenario.tariff.p_sell,)
    rows = centralized_gap(scenario, study.n_units, prices, seeds)
    write_csv(out / "centralized_gap.csv",
              ["n_units", "p_sell_c_per_kWh", "distributed_social_cost_usd", "centralized_social_cost_usd",
               "gap_pct"],
              ((r.n_units, r.p_sell, usd(r.distributed), usd(r.centralized), 100 * r.gap) for r in rows),
              seeds[0])
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sfcgame", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("scenario", type=Path, help="scenario file (.scn)")
    p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p.add_argument("--seeds", type=int, default=1, help="number of consecutive seeds to average over")
    p.add_argument("--step", type=float, default=None, help="price sweep step, c/kWh")
    p.add_argument("--excess-to-grid", action="store_true",
                   help="report unbought offers as sold to the grid at the buy-back price")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def run(command: str, scenario_path: Path, out_dir: Path, flags: argparse.Namespace) -> int:
    scenario = parse_scenario(scenario_path)
    if flags.step is not None:
        scenario = scenario.replace(sweep=SweepConfig(flags.step, scenario.sweep.alpha))
    if flags.excess_to_grid:
        scenario = scenario.replace(excess_to_grid=True)
    if flags.seeds < 1:
        raise ScenarioError("--seeds must be >= 1")
    seeds = _seeds(flags, scenario)
    if command in ("equilibrium", "verify", "day"):
        scenario = _materialise(scenario, seeds[0])
        handler = {"equilibrium": cmd_equilibrium, "verify": cmd_verify, "day": cmd_day}[command]
        return handler(scenario, out_dir, seeds[0])
    handler = {
        "sweep-n": cmd_sweep_n,
        "sweep-req": cmd_sweep_req,
        "sweep-capacity": cmd_sweep_capacity,
        "centralized-gap": cmd_centralized_gap,
    }[command]
    return handler(scenario, out_dir, seeds)


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return run(args.command, args.scenario, args.out, args)
    except (ScenarioError, FileNotFoundError) as exc:
        print(f"sfcgame: error: {exc}", file=sys.stderr)
        return 2
    except AssertionError as exc:
        print(f"sfcgame: invariant violated: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
