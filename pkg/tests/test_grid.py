import math
from dataclasses import replace

import pytest

from restoplan.backends import BackendConfig, solve
from restoplan.cic import emit_cic_constraints
from restoplan.clpu import emit_clpu_constraints
from restoplan.fleet import emit_routing_constraints, emit_scheduling_constraints
from restoplan.grid import (
    emit_distflow_constraints,
    emit_objective,
    emit_radiality_constraints,
    extract_plan,
)
from restoplan.milp import MilpModel
from restoplan.netdata import Branch, Fleet, Node, Scenario, builtin_case33
from restoplan.planner import build_restoration_model, solve_restoration
from restoplan.verify import _UnionFind, islands_at

from conftest import flat_clpu, island_scenario


def _bare_scenario(nodes, branches, horizon=1, damage=()):
    return Scenario(
        name="bare",
        nodes=nodes,
        branches=branches,
        horizon_spans=horizon,
        span_hours=0.5,
        damage_timeline=damage,
        loads=(),
        fleet=Fleet(),
        generators=(),
        substation_node=1,
        alpha_max=horizon + 1,
        cic_profiles={},
        clpu_profiles={},
    )


def test_radiality_path_graph_unique_tree():
    s = _bare_scenario(
        (Node(1), Node(2), Node(3)),
        (Branch("1-2", 1, 2, 0.01, 0.01, 1.0), Branch("2-3", 2, 3, 0.01, 0.01, 1.0)),
    )
    m = MilpModel()
    reg = emit_radiality_constraints(m, s)
    sol = solve(m, BackendConfig(time_limit=30))
    assert sol.feasible
    assert sol.value(reg.mu["1-2", 1]) == pytest.approx(1.0, abs=1e-6)
    assert sol.value(reg.mu["2-3", 1]) == pytest.approx(1.0, abs=1e-6)


def test_radiality_case33_selects_spanning_tree():
    s = builtin_case33()
    s = replace(s, horizon_spans=1, damage_timeline=(),
                loads=tuple(replace(ld, base_p=(ld.base_p[0],),
                                    initially_interrupted=False, initial_cid=0)
                            for ld in s.loads))
    m = MilpModel()
    reg = emit_radiality_constraints(m, s)
    sol = solve(m, BackendConfig(time_limit=120))
    assert sol.feasible
    chosen = [b.id for b in s.branches if sol.value(reg.mu[b.id, 1]) > 0.5]
    assert len(chosen) == 32
    uf = _UnionFind(s.node_ids())
    for bid in chosen:
        b = s.branch_by_id(bid)
        assert uf.union(b.from_node, b.to_node), "tree must be acyclic"
    root = uf.find(1)
    assert all(uf.find(i) == root for i in s.node_ids()), "tree must span"


def test_damaged_branch_open_but_tree_may_use_it():
    s = _bare_scenario(
        (Node(1), Node(2)),
        (Branch("1-2", 1, 2, 0.01, 0.01, 1.0),),
        damage=((1, frozenset({"1-2"})),),
    )
    m = MilpModel()
    reg = emit_radiality_constraints(m, s)
    sol = solve(m, BackendConfig(time_limit=30))
    assert sol.feasible
    assert sol.value(reg.closed["1-2", 1]) == pytest.approx(0.0, abs=1e-6)
    assert sol.value(reg.mu["1-2", 1]) == pytest.approx(1.0, abs=1e-6)


def _solve_island(scenario, **kwargs):
    solution, plan, build = solve_restoration(
        scenario, BackendConfig(gap=1e-6, time_limit=120), **kwargs
    )
    assert solution.feasible
    return solution, plan, build


def test_island_restoration_blocked_by_clpu_surge():
    """800 kW generator, 500 kW load with a 2x pickup surge: restoring
    needs 1000 kW, so without storage the load stays down all horizon."""
    s = island_scenario(load_kw=500.0, gen_kw=800.0, with_mess=False)
    solution, plan, build = _solve_island(s)
    assert plan.restore_span[2] is None
    assert all(plan.load_p[2, t] == pytest.approx(0.0, abs=1e-6)
               for t in range(1, s.horizon_spans + 1))


def test_island_restoration_enabled_by_mess():
    s = island_scenario(load_kw=500.0, gen_kw=800.0, with_mess=True)
    solution, plan, build = _solve_island(s)
    assert plan.restore_span[2] == 1
    # the pickup span draws 1000 kW: generator at its cap, truck covers 200
    entry = plan.mess["m1", 1]
    assert plan.load_p[2, 1] == pytest.approx(1000.0, abs=1e-4)
    assert entry["p_discharge_kw"] >= 200.0 - 1e-6
    assert plan.dg[2, 1][0] <= 800.0 + 1e-6


def test_island_small_load_restores_without_mess():
    s = island_scenario(load_kw=300.0, gen_kw=800.0, with_mess=False)
    solution, plan, build = _solve_island(s)
    assert plan.restore_span[2] == 1


def test_open_branch_carries_no_flow_and_voltage_decoupled():
    s = island_scenario(load_kw=300.0, gen_kw=800.0, with_mess=False)
    solution, plan, build = _solve_island(s)
    for t in range(1, s.horizon_spans + 1):
        assert plan.switch["1-2", t] == 0
        assert plan.flows_p["1-2", t] == pytest.approx(0.0, abs=1e-6)
        assert plan.flows_q["1-2", t] == pytest.approx(0.0, abs=1e-6)


def test_objective_zero_when_nothing_to_do():
    s = island_scenario(load_kw=300.0, gen_kw=800.0, with_mess=False)
    s = replace(
        s,
        damage_timeline=(),
        branches=tuple(replace(b, initially_closed=True) for b in s.branches),
        loads=tuple(
            replace(ld, initially_interrupted=False, initial_cid=0) for ld in s.loads
        ),
        generators=(),
    )
    solution, plan, build = _solve_island(s)
    assert solution.objective == pytest.approx(0.0, abs=1e-9)
    assert plan.objective_breakdown["total"] == pytest.approx(0.0, abs=1e-9)


def test_switching_term_counts_changes():
    """The island generator is too small to carry the load, so once the
    branch is repaired (after span 2) the substation must pick it up:
    exactly one closing action is charged."""
    s = island_scenario(load_kw=300.0, gen_kw=100.0, horizon=4)
    s = replace(s, damage_timeline=((1, frozenset({"1-2"})), (2, frozenset({"1-2"}))))
    solution, plan, build = _solve_island(s)
    assert plan.restore_span[2] == 3
    closes = [t for t in range(1, 5) if plan.switch["1-2", t]]
    assert closes and closes[0] == 3
    assert plan.objective_breakdown["switching"] == pytest.approx(1.0, abs=1e-6)


def test_dg_penalty_monotone_in_sigma2():
    """Raising the generator penalty never increases optimal DG output."""
    s = island_scenario(load_kw=300.0, gen_kw=800.0, with_mess=False)
    outputs = []
    for sigma2 in (1.0, 2.0):
        solution, plan, build = _solve_island(replace(s, sigma2=sigma2))
        outputs.append(
            sum(plan.dg[2, t][0] for t in range(1, s.horizon_spans + 1))
        )
    assert outputs[1] <= outputs[0] + 1e-6


def test_objective_breakdown_sums_to_total():
    s = island_scenario(load_kw=500.0, gen_kw=800.0, with_mess=True)
    solution, plan, build = _solve_island(s)
    parts = plan.objective_breakdown
    total = sum(v for k, v in parts.items() if k != "total")
    assert parts["total"] == pytest.approx(total, rel=1e-12)
    assert solution.objective == pytest.approx(total, rel=1e-6)


def test_extract_plan_restore_spans_complete():
    s = island_scenario(load_kw=300.0, gen_kw=800.0)
    solution, plan, build = _solve_island(s)
    for ld in s.interrupted_loads():
        assert ld.node in plan.restore_span


def test_islands_partition():
    s = island_scenario(load_kw=300.0, gen_kw=800.0)
    switch = {("1-2", 1): 0, ("1-3", 1): 1}
    groups = islands_at(s, switch, 1)
    assert {frozenset(g) for g in groups} == {frozenset({1, 3}), frozenset({2})}
