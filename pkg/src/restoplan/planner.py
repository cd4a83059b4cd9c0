"""End-to-end model assembly and solving, including ablation variants."""

from __future__ import annotations

from dataclasses import dataclass, replace

from .backends import BackendConfig, Solution, solve
from .cic import CicVariables, emit_cic_constraints
from .clpu import ClpuVariables, emit_clpu_constraints
from .fleet import FleetVariables, emit_routing_constraints, emit_scheduling_constraints
from .grid import (
    GridVariables,
    ObjectiveHandle,
    RestorationPlan,
    emit_distflow_constraints,
    emit_objective,
    emit_radiality_constraints,
    extract_plan,
)
from .milp import MilpModel
from .netdata import Fleet, Scenario

ABLATIONS = ("none", "fixed-mess", "no-mess")


@dataclass
class BuildResult:
    model: MilpModel
    scenario: Scenario
    cic: CicVariables
    clpu: ClpuVariables
    fleet: FleetVariables
    grid: GridVariables
    objective: ObjectiveHandle
    ablation: str = "none"


def initially_supplied_nodes(scenario: Scenario) -> set[int]:
    """Nodes fed from the substation through the initial closed topology."""
    damaged = scenario.damaged_at(1)
    adjacency: dict[int, list[int]] = {i: [] for i in scenario.node_ids()}
    for b in scenario.branches:
        if b.initially_closed and b.id not in damaged:
            adjacency[b.from_node].append(b.to_node)
            adjacency[b.to_node].append(b.from_node)
    seen, stack = {scenario.substation_node}, [scenario.substation_node]
    while stack:
        for nb in adjacency[stack.pop()]:
            if nb not in seen:
                seen.add(nb)
                stack.append(nb)
    return seen


def default_mess_pinning(scenario: Scenario) -> dict[str, int]:
    """Fixed-location assignment for the no-mobility ablation: spread the
    units round-robin over the accessible nodes that start de-energized
    (those are the islands needing support)."""
    supplied = initially_supplied_nodes(scenario)
    island_nodes = sorted(set(scenario.mess_nodes()) - supplied)
    if not island_nodes:
        island_nodes = sorted(scenario.mess_nodes())
    return {
        unit.id: island_nodes[idx % len(island_nodes)]
        for idx, unit in enumerate(scenario.fleet.units)
    }


def build_restoration_model(
    scenario: Scenario,
    segments: int = 12,
    cuts: bool = True,
    ablation: str = "none",
    fixed_nodes: dict | None = None,
) -> BuildResult:
    """Assemble the full restoration MILP.

    ``ablation='fixed-mess'`` pins every unit to one node for the whole
    horizon (mobility removed); ``'no-mess'`` drops the fleet entirely.
    """
    if ablation not in ABLATIONS:
        raise ValueError(f"unknown ablation {ablation!r}; pick one of {ABLATIONS}")
    pinning = None
    if ablation == "no-mess":
        scenario = replace(scenario, fleet=Fleet())
    elif ablation == "fixed-mess" and scenario.fleet.units:
        # the units are stationed inside the islands for the whole horizon,
        # so their start position moves to the pinned node as well
        pinning = fixed_nodes or default_mess_pinning(scenario)
        mess_nodes = set(scenario.mess_nodes())
        for unit in scenario.fleet.units:
            if pinning[unit.id] not in mess_nodes:
                raise ValueError(
                    f"pinned node {pinning[unit.id]} is not MESS-accessible"
                )
        scenario = replace(
            scenario,
            fleet=replace(
                scenario.fleet,
                units=tuple(
                    replace(u, initial_node=pinning[u.id])
                    for u in scenario.fleet.units
                ),
            ),
        )
    model = MilpModel(f"{scenario.name}-{ablation}" if ablation != "none" else scenario.name)
    cic = emit_cic_constraints(model, scenario, cuts=cuts)
    clpu = emit_clpu_constraints(model, scenario, cic, cuts=cuts)
    fleet = emit_routing_constraints(model, scenario)
    fleet = emit_scheduling_constraints(model, scenario, fleet)
    if pinning is not None:
        for unit in fleet.units:
            for t in range(1, scenario.horizon_spans + 1):
                model.fix(fleet.parked[unit.id, pinning[unit.id], t], 1.0)
    grid = emit_radiality_constraints(model, scenario)
    grid = emit_distflow_constraints(model, scenario, cic, clpu, fleet, grid, segments)
    handle = emit_objective(model, scenario, cic, fleet, grid)
    return BuildResult(model, scenario, cic, clpu, fleet, grid, handle, ablation)


def solve_restoration(
    scenario: Scenario,
    backend: BackendConfig | None = None,
    segments: int = 12,
    cuts: bool = True,
    ablation: str = "none",
    fixed_nodes: dict | None = None,
) -> tuple[Solution, RestorationPlan | None, BuildResult]:
    """Build, solve and extract; the plan is None when no incumbent exists."""
    build = build_restoration_model(scenario, segments, cuts, ablation, fixed_nodes)
    solution = solve(build.model, backend)
    plan = None
    if solution.feasible:
        plan = extract_plan(
            solution,
            build.scenario,
            build.cic,
            build.clpu,
            build.fleet,
            build.grid,
            build.objective,
        )
    return solution, plan, build
