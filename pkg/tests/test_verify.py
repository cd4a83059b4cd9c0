import copy
import json
from dataclasses import replace

import numpy as np
import pytest

from restoplan.backends import BackendConfig
from restoplan.netdata import builtin_case33
from restoplan.planner import solve_restoration
from restoplan.verify import (
    brute_force_square_check,
    check_solution,
    clpu_equivalence_check,
    simulate_schedule,
)

from conftest import flat_clpu, island_scenario


def test_square_check_exhaustive_36():
    report = brute_force_square_check(36)
    assert len(report.checks) == 37
    assert report.overall


def test_square_check_zero_and_five():
    report = brute_force_square_check(5)
    by_name = {c.name: c for c in report.checks}
    assert by_name["square[0]"].passed and "beta=0" in by_name["square[0]"].detail
    # alpha = 5 = 101b: z = {5, 0, 5}; beta = 1*5 + 2*0 + 4*5 = 25
    assert by_name["square[5]"].passed and "beta=25" in by_name["square[5]"].detail


def test_square_check_rejects_zero():
    with pytest.raises(ValueError):
        brute_force_square_check(0)


@pytest.fixture(scope="module")
def island_plan():
    s = island_scenario(load_kw=500.0, gen_kw=800.0, with_mess=True)
    solution, plan, build = solve_restoration(
        s, BackendConfig(gap=1e-6, time_limit=120)
    )
    assert solution.feasible
    return s, plan, solution


def test_check_solution_passes_on_solver_output(island_plan):
    s, plan, solution = island_plan
    report = check_solution(s, plan, solution)
    assert report.overall, report.to_text()


def test_check_solution_names_every_family(island_plan):
    s, plan, solution = island_plan
    names = {c.name for c in check_solution(s, plan, solution).checks}
    expected = {
        "radiality-forest",
        "damaged-open",
        "power-balance",
        "voltage-bounds",
        "voltage-drop-closed",
        "open-branch-flow",
        "apparent-branch",
        "apparent-dg",
        "apparent-mess",
        "apparent-true-cap-info",
        "mess-dispatch-parked",
        "soc-replay",
        "mess-no-teleport",
        "charging-energized",
        "delta-monotone",
        "cid-counter",
        "cic-rate",
        "clpu-multiplier",
        "objective-decomposition",
        "objective-matches-solver",
        "cic-term-oracle",
    }
    assert expected <= names


def test_check_solution_catches_closed_damaged_branch(island_plan):
    s, plan, _ = island_plan
    bad = copy.deepcopy(plan)
    bad.switch["1-2", 1] = 1
    report = check_solution(s, bad)
    assert not report.overall
    assert any(c.name == "damaged-open" and not c.passed for c in report.checks)


def test_check_solution_catches_teleport(island_plan):
    s, plan, _ = island_plan
    # with a 2-span travel time, appearing at node 3 one span after
    # leaving node 2 is impossible
    slow = replace(s, fleet=replace(s.fleet, travel_spans=((2, 3, 2),)))
    bad = copy.deepcopy(plan)
    bad.mess["m1", 1] = dict(bad.mess["m1", 1], state="parked", node=3)
    report = check_solution(slow, bad)
    assert any(c.name == "mess-no-teleport" and not c.passed for c in report.checks)


def test_check_solution_catches_balance_violation(island_plan):
    s, plan, _ = island_plan
    bad = copy.deepcopy(plan)
    bad.load_p[2, 1] = bad.load_p[2, 1] + 50.0
    report = check_solution(s, bad)
    assert any(c.name == "power-balance" and not c.passed for c in report.checks)


def test_check_solution_catches_soc_drift(island_plan):
    s, plan, _ = island_plan
    bad = copy.deepcopy(plan)
    bad.mess["m1", 2] = dict(bad.mess["m1", 2], soc=bad.mess["m1", 2]["soc"] + 1e-6)
    report = check_solution(s, bad)
    assert any(c.name == "soc-replay" and not c.passed for c in report.checks)


def test_check_solution_deterministic(island_plan):
    s, plan, solution = island_plan
    a = check_solution(s, plan, solution).to_json()
    b = check_solution(s, plan, solution).to_json()
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_simulate_restore_all_immediately_is_free():
    s = island_scenario(load_kw=300.0, gen_kw=800.0, initial_cid=0)
    result = simulate_schedule(s, {2: 1})
    assert result.total_cic == pytest.approx(0.0)


def test_simulate_matches_cumulative_oracle_hand_case():
    from restoplan.cic import CicProfile
    from restoplan.netdata import LoadPoint

    s = island_scenario(load_kw=100.0, gen_kw=800.0, horizon=2, initial_cid=0)
    s = replace(
        s,
        cic_profiles={"cls": CicProfile("cls", -2.0, 8.0, 10.0, 1.0)},
    )
    result = simulate_schedule(s, {2: None})
    # hand arithmetic: spans at alpha=1, 2 -> rates 13.5, 16 -> $1475
    assert result.total_cic == pytest.approx(1475.0)


def test_simulate_flags_island_shortfall():
    s = island_scenario(load_kw=500.0, gen_kw=100.0)
    switch = {("1-2", t): 0 for t in range(1, 7)}
    switch.update({("1-3", t): 1 for t in range(1, 7)})
    result = simulate_schedule(s, {2: 1}, switch_schedule=switch, mess_plan={})
    assert any("exceeds supply" in v for v in result.violations)
    assert result.total_cic >= 0.0  # still costed despite violations


def test_simulate_flags_teleport():
    s = island_scenario(load_kw=300.0, gen_kw=800.0, with_mess=True)
    s = replace(s, fleet=replace(s.fleet, travel_spans=((2, 3, 2),)))
    plan = {"m1": {1: 2, 2: 3}}  # 2 -> 3 in one span against a 2-span trip
    result = simulate_schedule(s, {2: 1}, mess_plan=plan)
    assert any("travel spans" in v for v in result.violations)


def test_simulate_curves_match_curve_oracle():
    from restoplan.clpu import curve_oracle

    s = island_scenario(load_kw=300.0, gen_kw=800.0)
    result = simulate_schedule(s, {2: 3})
    want = curve_oracle(s.clpu_profiles["cls"], 2 + 1, 2, s.horizon_spans)
    assert np.allclose(result.curves[2], want.multipliers)
