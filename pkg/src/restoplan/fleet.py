"""Mobile energy storage routing and scheduling.

Routing uses a time-expanded formulation on the accessible nodes: each
unit is parked at or traveling toward exactly one node per span, a move
between nodes i and i' keeps the unit in transit (traveling flags set)
for travel_spans(i, i') spans, enforced by pairwise exclusion between
parked flags closer than the travel time plus arrival continuity.
Scheduling couples charge/discharge binaries and powers to the parked
flag, caps apparent power with the tangent polygon, and tracks the
state of charge.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from .milp import MilpModel

if TYPE_CHECKING:
    from .netdata import Scenario


@dataclass
class FleetVariables:
    """VarId registry keyed by (unit id, node, span) / (unit id, span)."""

    units: list = field(default_factory=list)
    nodes: list = field(default_factory=list)
    parked: dict = field(default_factory=dict)  # x
    traveling: dict = field(default_factory=dict)  # v
    charging: dict = field(default_factory=dict)  # ch
    discharging: dict = field(default_factory=dict)  # dch
    p_charge: dict = field(default_factory=dict)  # kW
    p_discharge: dict = field(default_factory=dict)  # kW
    q: dict = field(default_factory=dict)  # kVar
    soc: dict = field(default_factory=dict)
    p_net: dict = field(default_factory=dict)  # aggregate discharge - charge
    q_net: dict = field(default_factory=dict)


def emit_routing_constraints(model: MilpModel, scenario: "Scenario") -> FleetVariables:
    """Position/transit variables and movement feasibility.

    Per unit and span exactly one parked-or-traveling flag is set; a
    unit parked at i may park at i' no sooner than travel_spans(i, i')+1
    spans later, and parking requires having been parked there or
    traveling there the span before, which forces the traveling flags
    (and the travel penalty) during the transit gap.
    """
    reg = FleetVariables(units=list(scenario.fleet.units), nodes=scenario.mess_nodes())
    spans = range(1, scenario.horizon_spans + 1)
    for unit in reg.units:
        j = unit.id
        if unit.initial_node not in reg.nodes:
            raise ValueError(f"unit {j} starts at inaccessible node {unit.initial_node}")
        for t in spans:
            for i in reg.nodes:
                reg.parked[j, i, t] = model.binary(f"x[{j},{i},{t}]")
                reg.traveling[j, i, t] = model.binary(f"v[{j},{i},{t}]")
            model.add_constraint(
                [(reg.parked[j, i, t], 1.0) for i in reg.nodes]
                + [(reg.traveling[j, i, t], 1.0) for i in reg.nodes],
                "=",
                1.0,
                "route-pos",
            )
        # arrival continuity; span 1 references the known initial position
        for t in spans:
            for i in reg.nodes:
                terms = [(reg.parked[j, i, t], 1.0)]
                rhs = 0.0
                if t == 1:
                    rhs = 1.0 if i == unit.initial_node else 0.0
                else:
                    terms += [
                        (reg.parked[j, i, t - 1], -1.0),
                        (reg.traveling[j, i, t - 1], -1.0),
                    ]
                model.add_constraint(terms, "<=", rhs, "route-arrive")
        # pairwise exclusion: parked flags separated by <= travel time clash
        for a in reg.nodes:
            for b in reg.nodes:
                if a == b:
                    continue
                tau = scenario.fleet.travel(a, b)
                for t in range(0, scenario.horizon_spans):
                    for gap in range(1, tau + 1):
                        if t + gap > scenario.horizon_spans:
                            break
                        if t == 0:
                            # initial position is data, not a variable
                            if a == unit.initial_node:
                                model.add_constraint(
                                    [(reg.parked[j, b, gap], 1.0)],
                                    "<=",
                                    0.0,
                                    "route-move",
                                )
                            continue
                        model.add_constraint(
                            [
                                (reg.parked[j, a, t], 1.0),
                                (reg.parked[j, b, t + gap], 1.0),
                            ],
                            "<=",
                            1.0,
                            "route-move",
                        )
    return reg


def emit_scheduling_constraints(
    model: MilpModel, scenario: "Scenario", reg: FleetVariables
) -> FleetVariables:
    """Charge/discharge powers, apparent-power polygon and SOC recursion."""
    spans = range(1, scenario.horizon_spans + 1)
    dt = scenario.span_hours
    for unit in reg.units:
        j = unit.id
        for t in spans:
            for i in reg.nodes:
                ch = model.binary(f"ch[{j},{i},{t}]")
                dch = model.binary(f"dch[{j},{i},{t}]")
                pc = model.continuous(f"Pc[{j},{i},{t}]", 0.0, unit.p_charge_max)
                pd = model.continuous(f"Pd[{j},{i},{t}]", 0.0, unit.p_discharge_max)
                q = model.continuous(f"Qm[{j},{i},{t}]", -unit.q_max, unit.q_max)
                reg.charging[j, i, t] = ch
                reg.discharging[j, i, t] = dch
                reg.p_charge[j, i, t] = pc
                reg.p_discharge[j, i, t] = pd
                reg.q[j, i, t] = q
                x = reg.parked[j, i, t]
                model.add_constraint(
                    [(ch, 1.0), (dch, 1.0), (x, -1.0)], "<=", 0.0, "eq18a"
                )
                model.add_constraint(
                    [(pc, 1.0), (ch, -unit.p_charge_max)], "<=", 0.0, "eq18b"
                )
                model.add_constraint(
                    [(pd, 1.0), (dch, -unit.p_discharge_max)], "<=", 0.0, "eq18c"
                )
                model.add_constraint(
                    [(q, 1.0), (x, -unit.q_max)], "<=", 0.0, "eq18d"
                )
                model.add_constraint(
                    [(q, 1.0), (x, unit.q_max)], ">=", 0.0, "eq18d"
                )
            # aggregate net injection feeding the apparent-power polygon
            p_net = model.continuous(
                f"Pnet[{j},{t}]", -unit.p_charge_max, unit.p_discharge_max
            )
            q_net = model.continuous(f"Qnet[{j},{t}]", -unit.q_max, unit.q_max)
            reg.p_net[j, t] = p_net
            reg.q_net[j, t] = q_net
            model.add_constraint(
                [(p_net, 1.0)]
                + [(reg.p_charge[j, i, t], 1.0) for i in reg.nodes]
                + [(reg.p_discharge[j, i, t], -1.0) for i in reg.nodes],
                "=",
                0.0,
                "eq18e",
            )
            model.add_constraint(
                [(q_net, 1.0)] + [(reg.q[j, i, t], -1.0) for i in reg.nodes],
                "=",
                0.0,
                "eq18e",
            )
            model.add_circle_cap(p_net, q_net, unit.s_cap, tag="eq18e")

            soc = model.continuous(f"soc[{j},{t}]", unit.soc_min, unit.soc_max)
            reg.soc[j, t] = soc
            scale = dt / unit.energy_kwh
            terms = [(soc, 1.0)]
            if t > 1:
                terms.append((reg.soc[j, t - 1], -1.0))
            for i in reg.nodes:
                terms.append((reg.p_charge[j, i, t], -unit.eff_charge * scale))
                terms.append((reg.p_discharge[j, i, t], scale / unit.eff_discharge))
            rhs = unit.initial_soc if t == 1 else 0.0
            model.add_constraint(terms, "=", rhs, "eq18f")
    return reg
