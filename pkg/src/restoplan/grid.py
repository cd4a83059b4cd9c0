"""Network reconfiguration, linearized power flow and the objective.

Radiality: per span, a fictitious spanning tree over all branches
(damaged or not) is selected by directed arc flags; one unit of
commodity per non-substation node flows from the substation through
selected arcs only, and the closed-branch flags are dominated by the
tree, so closed branches always form a forest reaching every island.

Operation: linearized DistFlow over squared voltage magnitudes with
big-M decoupling on open branches, polygonal apparent-power caps, and
injections from storage trucks and backup generators.  Power variables
are kW/kVar; voltages are per-unit squared.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from .milp import MilpModel

if TYPE_CHECKING:
    from .backends import Solution
    from .cic import CicVariables
    from .clpu import ClpuVariables
    from .fleet import FleetVariables
    from .netdata import Scenario


@dataclass
class GridVariables:
    """VarId registry for reconfiguration and power-flow variables."""

    arcs: list = field(default_factory=list)  # (branch id, tail, head)
    flow: dict = field(default_factory=dict)  # (sink, arc idx, span)
    lam: dict = field(default_factory=dict)  # (arc idx, span)
    mu: dict = field(default_factory=dict)  # (branch id, span)
    closed: dict = field(default_factory=dict)  # v: (branch id, span)
    switch_change: dict = field(default_factory=dict)  # (branch id, span)
    p_branch: dict = field(default_factory=dict)  # (branch id, span), kW
    q_branch: dict = field(default_factory=dict)
    v2: dict = field(default_factory=dict)  # (node, span), p.u.^2
    p_dg: dict = field(default_factory=dict)  # (gen idx, span), kW
    q_dg: dict = field(default_factory=dict)
    p_in: dict = field(default_factory=dict)  # (node, span), kW
    q_in: dict = field(default_factory=dict)


@dataclass
class ObjectiveHandle:
    """Objective coefficients split by term for later decomposition."""

    cic: dict = field(default_factory=dict)
    mess_travel: dict = field(default_factory=dict)
    dg: dict = field(default_factory=dict)
    switching: dict = field(default_factory=dict)

    def components(self):
        return {
            "cic": self.cic,
            "mess_travel": self.mess_travel,
            "dg": self.dg,
            "switching": self.switching,
        }

    def breakdown(self, solution: "Solution") -> dict:
        out = {}
        for name, terms in self.components().items():
            out[name] = sum(coef * solution.value(vid) for vid, coef in terms.items())
        out["total"] = sum(out.values())
        return out


def emit_radiality_constraints(model: MilpModel, scenario: "Scenario") -> GridVariables:
    """Fictitious-tree selection and commodity flows, per span."""
    reg = GridVariables()
    nodes = scenario.node_ids()
    root = scenario.substation_node
    n = len(nodes)
    for b in scenario.branches:
        reg.arcs.append((b.id, b.from_node, b.to_node))
        reg.arcs.append((b.id, b.to_node, b.from_node))
    in_arcs: dict[int, list[int]] = {i: [] for i in nodes}
    out_arcs: dict[int, list[int]] = {i: [] for i in nodes}
    for idx, (_, tail, head) in enumerate(reg.arcs):
        out_arcs[tail].append(idx)
        in_arcs[head].append(idx)

    for t in range(1, scenario.horizon_spans + 1):
        for idx, (bid, tail, head) in enumerate(reg.arcs):
            reg.lam[idx, t] = model.binary(f"lam[{bid},{tail}->{head},{t}]")
        damaged = scenario.damaged_at(t)
        for b_idx, b in enumerate(scenario.branches):
            mu = model.binary(f"mu[{b.id},{t}]")
            closed = model.binary(f"v[{b.id},{t}]")
            reg.mu[b.id, t] = mu
            reg.closed[b.id, t] = closed
            fwd = reg.lam[2 * b_idx, t]  # arcs appended pairwise per branch
            rev = reg.lam[2 * b_idx + 1, t]
            model.add_constraint(
                [(mu, 1.0), (fwd, -1.0), (rev, -1.0)], "=", 0.0, "eq19f"
            )
            model.add_constraint([(closed, 1.0), (mu, -1.0)], "<=", 0.0, "eq19g")
            if b.id in damaged:
                model.add_constraint([(closed, 1.0)], "=", 0.0, "eq19h")
        model.add_constraint(
            [(reg.lam[idx, t], 1.0) for idx in range(len(reg.arcs))],
            "=",
            float(n - 1),
            "eq19e",
        )
        # every non-root node takes exactly one incoming tree arc (implied
        # for integral points by the unit sinks + cardinality; added as an
        # equality to tighten the LP relaxation)
        for i in nodes:
            model.add_constraint(
                [(reg.lam[idx, t], 1.0) for idx in in_arcs[i]],
                "=",
                0.0 if i == root else 1.0,
                "eq19-indeg",
            )
        for sink in nodes:
            if sink == root:
                continue
            for idx, (bid, tail, head) in enumerate(reg.arcs):
                f = model.continuous(f"f[{sink},{bid},{tail}->{head},{t}]", 0.0, 1.0)
                reg.flow[sink, idx, t] = f
                model.add_constraint(
                    [(f, 1.0), (reg.lam[idx, t], -1.0)], "<=", 0.0, "eq19d"
                )
            for i in nodes:
                terms = [(reg.flow[sink, idx, t], 1.0) for idx in in_arcs[i]]
                terms += [(reg.flow[sink, idx, t], -1.0) for idx in out_arcs[i]]
                if i == sink:
                    model.add_constraint(terms, "=", 1.0, "eq19a")
                elif i == root:
                    model.add_constraint(terms, "=", -1.0, "eq19b")
                else:
                    model.add_constraint(terms, "=", 0.0, "eq19c")
    return reg


def emit_distflow_constraints(
    model: MilpModel,
    scenario: "Scenario",
    cic_vars: "CicVariables",
    clpu_vars: "ClpuVariables",
    fleet_vars: "FleetVariables",
    reg: GridVariables,
    segments: int = 12,
) -> GridVariables:
    """Injections, nodal balance, switched voltage drop and capacities."""
    base = scenario.base_power_kva
    root = scenario.substation_node
    nodes = {n.id: n for n in scenario.nodes}
    mess_nodes = set(fleet_vars.nodes) if fleet_vars.units else set()
    gens_at: dict[int, list[int]] = {}
    for g_idx, gen in enumerate(scenario.generators):
        gens_at.setdefault(gen.node, []).append(g_idx)
    clpu_nodes = {ld.node for ld in cic_vars.loads}

    in_br: dict[int, list] = {i: [] for i in nodes}
    out_br: dict[int, list] = {i: [] for i in nodes}
    for b in scenario.branches:
        out_br[b.from_node].append(b)
        in_br[b.to_node].append(b)

    for t in range(1, scenario.horizon_spans + 1):
        for i, node in nodes.items():
            lo, hi = (1.0, 1.0) if i == root else (node.v_min**2, node.v_max**2)
            reg.v2[i, t] = model.continuous(f"V2[{i},{t}]", lo, hi)
        for g_idx, gen in enumerate(scenario.generators):
            p = model.continuous(f"Pdg[{g_idx},{t}]", 0.0, gen.p_max)
            q = model.continuous(f"Qdg[{g_idx},{t}]", -gen.s_cap, gen.s_cap)
            reg.p_dg[g_idx, t] = p
            reg.q_dg[g_idx, t] = q
            model.add_circle_cap(p, q, gen.s_cap, segments, tag="eq20j")

        for b in scenario.branches:
            cap = b.s_cap * base
            p = model.continuous(f"P[{b.id},{t}]", -cap, cap)
            q = model.continuous(f"Q[{b.id},{t}]", -cap, cap)
            reg.p_branch[b.id, t] = p
            reg.q_branch[b.id, t] = q
            closed = reg.closed[b.id, t]
            model.add_circle_cap(p, q, cap, segments, gate=closed, tag="eq20h")
            # switched voltage drop, released by big-M when open
            nf, ntt = nodes[b.from_node], nodes[b.to_node]
            vmax2 = max(nf.v_max, ntt.v_max) ** 2
            vmin2 = min(nf.v_min, ntt.v_min) ** 2
            big_m = (vmax2 - vmin2) + 2.0 * (b.r + b.x) * cap / base
            cp, cq = 2.0 * b.r / base, 2.0 * b.x / base
            v2f, v2t = reg.v2[b.from_node, t], reg.v2[b.to_node, t]
            model.add_constraint(
                [(v2t, 1.0), (v2f, -1.0), (p, cp), (q, cq), (closed, big_m)],
                "<=",
                big_m,
                "eq20f",
            )
            model.add_constraint(
                [(v2t, 1.0), (v2f, -1.0), (p, cp), (q, cq), (closed, -big_m)],
                ">=",
                -big_m,
                "eq20f",
            )

        for i, node in nodes.items():
            mess_p_lo = mess_p_hi = mess_q = 0.0
            if i in mess_nodes:
                mess_p_lo = sum(u.p_charge_max for u in fleet_vars.units)
                mess_p_hi = sum(u.p_discharge_max for u in fleet_vars.units)
                mess_q = sum(u.q_max for u in fleet_vars.units)
            gen_p = sum(scenario.generators[g].p_max for g in gens_at.get(i, []))
            gen_q = sum(scenario.generators[g].s_cap for g in gens_at.get(i, []))
            if i == root:
                slack = sum(b.s_cap * base for b in in_br[i] + out_br[i])
                p_in = model.continuous(f"Pin[{i},{t}]", -slack, slack)
                q_in = model.continuous(f"Qin[{i},{t}]", -slack, slack)
            else:
                p_in = model.continuous(f"Pin[{i},{t}]", -mess_p_lo, mess_p_hi + gen_p)
                q_in = model.continuous(
                    f"Qin[{i},{t}]", -(mess_q + gen_q), mess_q + gen_q
                )
            reg.p_in[i, t] = p_in
            reg.q_in[i, t] = q_in
            if i != root:
                p_terms = [(p_in, 1.0)]
                q_terms = [(q_in, 1.0)]
                if i in mess_nodes:
                    for unit in fleet_vars.units:
                        p_terms.append((fleet_vars.p_discharge[unit.id, i, t], -1.0))
                        p_terms.append((fleet_vars.p_charge[unit.id, i, t], 1.0))
                        q_terms.append((fleet_vars.q[unit.id, i, t], -1.0))
                for g in gens_at.get(i, []):
                    p_terms.append((reg.p_dg[g, t], -1.0))
                    q_terms.append((reg.q_dg[g, t], -1.0))
                model.add_constraint(p_terms, "=", 0.0, "eq20a")
                model.add_constraint(q_terms, "=", 0.0, "eq20b")

            # nodal balance; static loads enter as constants
            load = scenario.load_by_node(i)
            p_terms = [(reg.p_branch[b.id, t], 1.0) for b in in_br[i]]
            p_terms += [(reg.p_branch[b.id, t], -1.0) for b in out_br[i]]
            p_terms.append((p_in, 1.0))
            q_terms = [(reg.q_branch[b.id, t], 1.0) for b in in_br[i]]
            q_terms += [(reg.q_branch[b.id, t], -1.0) for b in out_br[i]]
            q_terms.append((q_in, 1.0))
            p_rhs = q_rhs = 0.0
            if load is not None and i in clpu_nodes:
                p_terms.append((clpu_vars.p_load[i, t], -1.0))
                q_terms.append((clpu_vars.q_load[i, t], -1.0))
            elif load is not None:
                p_rhs = load.p(t)
                q_rhs = load.power_factor_coeff * load.p(t)
            model.add_constraint(p_terms, "=", p_rhs, "eq20c")
            model.add_constraint(q_terms, "=", q_rhs, "eq20d")

        # restoration is irreversible
        for i in clpu_nodes:
            if t >= 2:
                model.add_constraint(
                    [(cic_vars.delta[i, t], 1.0), (cic_vars.delta[i, t - 1], -1.0)],
                    ">=",
                    0.0,
                    "eq20i",
                )
    return reg


def emit_objective(
    model: MilpModel,
    scenario: "Scenario",
    cic_vars: "CicVariables",
    fleet_vars: "FleetVariables",
    reg: GridVariables,
) -> ObjectiveHandle:
    """Total CIC plus scheduling penalties; switch changes via eq22.

    The generator penalty weighs per-unit (MW-scale) output so the
    default unit penalties stay far below the CIC scale.
    """
    handle = ObjectiveHandle()
    dt = scenario.span_hours
    for load in cic_vars.loads:
        for t in range(1, scenario.horizon_spans + 1):
            vid = cic_vars.rate[load.node, t]
            handle.cic[vid] = handle.cic.get(vid, 0.0) + load.p(t) * dt
    for (j, i, t), vid in fleet_vars.traveling.items():
        handle.mess_travel[vid] = handle.mess_travel.get(vid, 0.0) + scenario.sigma1
    for (g, t), vid in reg.p_dg.items():
        handle.dg[vid] = handle.dg.get(vid, 0.0) + scenario.sigma2 / scenario.base_power_kva
    initial = {b.id: 1.0 if b.initially_closed else 0.0 for b in scenario.branches}
    for b in scenario.branches:
        for t in range(1, scenario.horizon_spans + 1):
            dv = model.continuous(f"dv[{b.id},{t}]", 0.0, 1.0)
            reg.switch_change[b.id, t] = dv
            vt = reg.closed[b.id, t]
            if t == 1:
                model.add_constraint([(dv, 1.0), (vt, -1.0)], ">=", -initial[b.id], "eq22")
                model.add_constraint([(dv, 1.0), (vt, 1.0)], ">=", initial[b.id], "eq22")
            else:
                vp = reg.closed[b.id, t - 1]
                model.add_constraint(
                    [(dv, 1.0), (vt, -1.0), (vp, 1.0)], ">=", 0.0, "eq22"
                )
                model.add_constraint(
                    [(dv, 1.0), (vt, 1.0), (vp, -1.0)], ">=", 0.0, "eq22"
                )
            handle.switching[dv] = handle.switching.get(dv, 0.0) + scenario.sigma3
    for terms in handle.components().values():
        for vid, coef in terms.items():
            model.objective_add(vid, coef)
    return handle


# -- plan extraction ----------------------------------------------------


class ExtractionError(ValueError):
    """A solution value violates integrality beyond tolerance."""


@dataclass
class RestorationPlan:
    status: str
    objective_total: float
    gap: float | None
    restore_span: dict  # node -> span or None
    delta: dict  # (node, span) -> 0/1
    alpha: dict  # (node, span) -> int
    rate: dict  # (node, span) -> $/kWh
    load_p: dict  # (node, span) -> kW
    load_q: dict
    switch: dict  # (branch id, span) -> 0/1
    flows_p: dict  # (branch id, span) -> kW
    flows_q: dict
    voltages: dict  # (node, span) -> p.u.
    dg: dict  # (node, span) -> [p_kw, q_kvar]
    mess: dict  # (unit, span) -> state dict
    objective_breakdown: dict


def _as_int(value: float, name: str, tol: float) -> int:
    nearest = round(value)
    if abs(value - nearest) > tol:
        raise ExtractionError(
            f"variable {name} = {value!r} is not integral within {tol}"
        )
    return int(nearest)


def extract_plan(
    solution: "Solution",
    scenario: "Scenario",
    cic_vars: "CicVariables",
    clpu_vars: "ClpuVariables",
    fleet_vars: "FleetVariables",
    grid_vars: GridVariables,
    handle: ObjectiveHandle,
    int_tol: float = 1e-6,
) -> RestorationPlan:
    """Read a solved model back into a schedule-level plan."""
    if not solution.feasible:
        raise ValueError(f"cannot extract a plan from status {solution.status!r}")
    spans = range(1, scenario.horizon_spans + 1)
    val = solution.value

    delta, alpha, rate, restore = {}, {}, {}, {}
    load_p, load_q = {}, {}
    for load in cic_vars.loads:
        i = load.node
        first = None
        for t in spans:
            d = _as_int(val(cic_vars.delta[i, t]), f"delta[{i},{t}]", int_tol)
            delta[i, t] = d
            alpha[i, t] = _as_int(val(cic_vars.alpha[i, t]), f"alpha[{i},{t}]", int_tol)
            rate[i, t] = val(cic_vars.rate[i, t])
            load_p[i, t] = val(clpu_vars.p_load[i, t])
            load_q[i, t] = val(clpu_vars.q_load[i, t])
            if d == 1 and first is None:
                first = t
        restore[i] = first

    switch, flows_p, flows_q = {}, {}, {}
    for b in scenario.branches:
        for t in spans:
            switch[b.id, t] = _as_int(
                val(grid_vars.closed[b.id, t]), f"v[{b.id},{t}]", int_tol
            )
            flows_p[b.id, t] = val(grid_vars.p_branch[b.id, t])
            flows_q[b.id, t] = val(grid_vars.q_branch[b.id, t])

    voltages = {
        (i, t): math.sqrt(max(val(grid_vars.v2[i, t]), 0.0))
        for i in scenario.node_ids()
        for t in spans
    }
    dg: dict = {}
    for g_idx, gen in enumerate(scenario.generators):
        for t in spans:
            entry = dg.setdefault((gen.node, t), [0.0, 0.0])
            entry[0] += val(grid_vars.p_dg[g_idx, t])
            entry[1] += val(grid_vars.q_dg[g_idx, t])

    mess = {}
    for unit in fleet_vars.units:
        j = unit.id
        for t in spans:
            state, node = "traveling", None
            for i in fleet_vars.nodes:
                if _as_int(val(fleet_vars.parked[j, i, t]), f"x[{j},{i},{t}]", int_tol):
                    state, node = "parked", i
                    break
            if node is None:
                for i in fleet_vars.nodes:
                    if _as_int(
                        val(fleet_vars.traveling[j, i, t]), f"v[{j},{i},{t}]", int_tol
                    ):
                        node = i
                        break
            p_c = p_d = q = 0.0
            if state == "parked":
                p_c = val(fleet_vars.p_charge[j, node, t])
                p_d = val(fleet_vars.p_discharge[j, node, t])
                q = val(fleet_vars.q[j, node, t])
            mess[j, t] = {
                "state": state,
                "node": node,
                "p_charge_kw": p_c,
                "p_discharge_kw": p_d,
                "q_kvar": q,
                "soc": val(fleet_vars.soc[j, t]),
            }

    breakdown = handle.breakdown(solution)
    return RestorationPlan(
        status=solution.status,
        objective_total=solution.objective if solution.objective is not None else breakdown["total"],
        gap=solution.gap,
        restore_span=restore,
        delta=delta,
        alpha=alpha,
        rate=rate,
        load_p=load_p,
        load_q=load_q,
        switch=switch,
        flows_p=flows_p,
        flows_q=flows_q,
        voltages=voltages,
        dg=dg,
        mess=mess,
        objective_breakdown=breakdown,
    )
