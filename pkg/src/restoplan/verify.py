"""Independent referees for every linearization and solution.

Expected values here come from closed-form oracles, enumeration and
replay arithmetic, never from the MILP emission paths; the only shared
inputs are the scenario and the surrogate profiles.  The one exception
is :func:`clpu_equivalence_check`, whose explicit job is to drive the
emitted CLPU subsystem against the curve oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import SimpleNamespace
from typing import TYPE_CHECKING

import numpy as np

from .cic import alpha_series, cumulative_cic_oracle, rate_oracle
from .clpu import ClpuProfile, characteristics_oracle, curve_oracle

if TYPE_CHECKING:
    from .backends import BackendConfig, Solution
    from .grid import RestorationPlan
    from .netdata import Scenario


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    residual: float | None = None


@dataclass
class ValidationReport:
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def overall(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def to_text(self) -> str:
        lines = []
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            extra = f" (residual {c.residual:.3e})" if c.residual is not None else ""
            detail = f": {c.detail}" if c.detail else ""
            lines.append(f"[{status}] {c.name}{detail}{extra}")
        lines.append(f"overall: {'PASS' if self.overall else 'FAIL'}")
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {
            "overall": self.overall,
            "checks": [
                {
                    "name": c.name,
                    "passed": c.passed,
                    "detail": c.detail,
                    "residual": c.residual,
                }
                for c in self.checks
            ],
        }

    def verdicts(self) -> dict:
        return {c.name: c.passed for c in self.checks}


class _UnionFind:
    def __init__(self, items):
        self.parent = {i: i for i in items}

    def find(self, i):
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, a, b) -> bool:
        """Merge; returns False when a and b were already connected."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[ra] = rb
        return True


def islands_at(scenario: "Scenario", switch: dict, span: int) -> list[set[int]]:
    """Connected components of the closed-branch graph during a span."""
    uf = _UnionFind(scenario.node_ids())
    for b in scenario.branches:
        if switch.get((b.id, span)):
            uf.union(b.from_node, b.to_node)
    groups: dict[int, set[int]] = {}
    for i in scenario.node_ids():
        groups.setdefault(uf.find(i), set()).add(i)
    return sorted(groups.values(), key=lambda g: min(g))


# -- exactness of the squared-counter decomposition ---------------------


def brute_force_square_check(alpha_max: int) -> ValidationReport:
    """Enumerate every counter value and replay the bit decomposition.

    For each value the bit vector is unique (binary representation);
    the products z_k = bit_k * alpha recombine to exactly alpha**2.
    """
    if alpha_max < 1:
        raise ValueError("alpha_max must be >= 1")
    report = ValidationReport()
    n_bits = max(1, alpha_max.bit_length())
    for alpha in range(alpha_max + 1):
        bits = [(alpha >> k) & 1 for k in range(n_bits)]
        assert sum(b << k for k, b in enumerate(bits)) == alpha
        z = [b * alpha for b in bits]
        beta = sum(zk << k for k, zk in enumerate(z))
        report.checks.append(
            CheckResult(
                f"square[{alpha}]",
                beta == alpha * alpha,
                f"beta={beta} expected={alpha * alpha}",
            )
        )
    return report


# -- CLPU subsystem equivalence sweep -----------------------------------


def clpu_equivalence_check(
    profile: ClpuProfile,
    horizon: int,
    backend: "BackendConfig | None" = None,
    d_values=None,
    t1_values=None,
    tol: float = 1e-6,
) -> ValidationReport:
    """Solve the CLPU block alone for each (final CID, restoration
    offset) pair with the restoration flags pinned, and compare the
    reconstructed multipliers with the curve oracle.

    Pairs with d < t1 are unrealizable (they would need a negative
    initial duration) and are skipped.  Also asserts the segment
    selectors, the decay flag, the phase partition and the per-span
    decay telescoping on every solved subsystem.
    """
    from .backends import BackendConfig, solve
    from .cic import CicVariables
    from .clpu import emit_clpu_constraints
    from .milp import MilpModel
    from .netdata import LoadPoint

    backend = backend or BackendConfig()
    d_values = range(0, 2 * horizon + 1) if d_values is None else d_values
    t1_values = range(0, horizon + 1) if t1_values is None else t1_values
    report = ValidationReport()
    for d in d_values:
        expected_f, expected_pk, expected_dc, expected_df = characteristics_oracle(
            profile, d
        )
        for t1 in t1_values:
            if d < t1:
                continue
            alpha0 = d - t1
            model = MilpModel(f"clpu-equiv-{d}-{t1}")
            load = LoadPoint(
                node=1,
                base_p=(1.0,) * horizon,
                power_factor_coeff=0.4843,
                customer_class=profile.key,
                initially_interrupted=True,
                initial_cid=alpha0,
            )
            cic_vars = CicVariables(loads=[load], alpha0={1: alpha0})
            for t in range(1, horizon + 1):
                vid = model.binary(f"delta[1,{t}]")
                model.fix(vid, 0.0 if t <= t1 else 1.0)
                cic_vars.delta[1, t] = vid
            stub = SimpleNamespace(
                horizon_spans=horizon, clpu_profiles={profile.key: profile}
            )
            reg = emit_clpu_constraints(model, stub, cic_vars)
            sol = solve(model, backend)
            name = f"clpu-equiv[d={d},t1={t1}]"
            if not sol.feasible:
                report.checks.append(
                    CheckResult(name, False, f"subsystem not solved: {sol.status}")
                )
                continue
            curve = curve_oracle(profile, d, t1, horizon)
            problems = []
            worst = 0.0
            for t in range(1, horizon + 1):
                got = sol.value(reg.p_load[1, t])
                want = curve.multiplier(t)
                worst = max(worst, abs(got - want))
                if abs(got - want) > tol:
                    problems.append(f"span {t}: {got!r} != {want!r}")
            knee = math.ceil(profile.peak_magnitude.knee - 1e-9)
            if round(sol.value(reg.kappa_f[1])) != (1 if d <= knee - 1 else 0):
                problems.append("peak-magnitude segment selector inconsistent")
            if round(sol.value(reg.d_pk[1])) != expected_pk:
                problems.append(
                    f"D_pk {sol.value(reg.d_pk[1])} != {expected_pk}"
                )
            if round(sol.value(reg.d_dc[1])) != expected_dc:
                problems.append(
                    f"D_dc {sol.value(reg.d_dc[1])} != {expected_dc}"
                )
            if round(sol.value(reg.xi[1])) != (1 if expected_dc >= 1 else 0):
                problems.append("xi flag inconsistent with decay duration")
            if expected_dc >= 1 and abs(sol.value(reg.delta_f[1]) - expected_df) > tol:
                problems.append(
                    f"decay rate {sol.value(reg.delta_f[1])} != {expected_df}"
                )
            for t in range(1, horizon + 1):
                u1 = round(sol.value(reg.u1[1, t]))
                u2 = round(sol.value(reg.u2[1, t]))
                u3 = round(sol.value(reg.u3[1, t]))
                phases = (1 - u1, u1 - u2, u2 - u3, u3)
                if any(p not in (0, 1) for p in phases) or sum(phases) != 1:
                    problems.append(f"phase partition broken at span {t}")
                    break
            # decay telescoping: constant drop per span, ends at 1 + df/2
            t2, t3 = curve.t2, curve.t3
            if expected_dc >= 1 and t3 <= horizon and t2 >= t1:
                for t in range(max(t2 + 2, 1), min(t3, horizon) + 1):
                    drop = sol.value(reg.p_load[1, t - 1]) - sol.value(
                        reg.p_load[1, t]
                    )
                    if t - 1 >= t2 + 1 and abs(drop - expected_df) > tol:
                        problems.append(f"decay step at span {t} is {drop}")
                        break
                last = sol.value(reg.p_load[1, t3])
                if t3 >= t1 + 1 and abs(last - (1.0 + 0.5 * expected_df)) > tol:
                    problems.append(f"last decay span multiplier {last}")
            report.checks.append(
                CheckResult(name, not problems, "; ".join(problems), worst)
            )
    return report


# -- post-hoc validation of a solved plan --------------------------------


def check_solution(
    scenario: "Scenario",
    plan: "RestorationPlan",
    solution: "Solution | None" = None,
    segments: int = 12,
) -> ValidationReport:
    """Referee a restoration plan against the scenario physics.

    Covers every constraint family: radiality/damage (19), nodal
    balance, voltage drop/bounds and apparent-power caps against the
    true circle (20), storage replay and trajectory feasibility (18),
    the interruption counter and clamped rate (1-5), CLPU load
    reconstruction (6-17), and the objective decomposition identity.
    """
    report = ValidationReport()
    check = report.checks.append
    spans = range(1, scenario.horizon_spans + 1)
    base = scenario.base_power_kva
    slack = 1.0 / math.cos(math.pi / segments) + 1e-9

    # (19) forest + damaged branches open
    cycle_spans, damaged_closed = [], []
    for t in spans:
        uf = _UnionFind(scenario.node_ids())
        for b in scenario.branches:
            if plan.switch.get((b.id, t)):
                if not uf.union(b.from_node, b.to_node):
                    cycle_spans.append(t)
            if b.id in scenario.damaged_at(t) and plan.switch.get((b.id, t)):
                damaged_closed.append((b.id, t))
    check(CheckResult("radiality-forest", not cycle_spans,
                      f"cycles during spans {sorted(set(cycle_spans))}"))
    check(CheckResult("damaged-open", not damaged_closed,
                      f"closed while damaged: {damaged_closed}"))

    # (20c)(20d) nodal balance in p.u.; substation is the slack node
    worst_balance = 0.0
    bad_balance = []
    clpu_nodes = {ld.node for ld in scenario.interrupted_loads()}
    for t in spans:
        inj_p = {i: 0.0 for i in scenario.node_ids()}
        inj_q = {i: 0.0 for i in scenario.node_ids()}
        for (i, tt), (p, q) in plan.dg.items():
            if tt == t:
                inj_p[i] += p
                inj_q[i] += q
        for (_, tt), entry in plan.mess.items():
            if tt == t and entry["state"] == "parked":
                inj_p[entry["node"]] += entry["p_discharge_kw"] - entry["p_charge_kw"]
                inj_q[entry["node"]] += entry["q_kvar"]
        for i in scenario.node_ids():
            if i == scenario.substation_node:
                continue
            net = inj_p[i]
            net_q = inj_q[i]
            load = scenario.load_by_node(i)
            if load is not None and i in clpu_nodes:
                net -= plan.load_p[i, t]
                net_q -= plan.load_q[i, t]
            elif load is not None:
                net -= load.p(t)
                net_q -= load.power_factor_coeff * load.p(t)
            for b in scenario.branches:
                if b.to_node == i:
                    net += plan.flows_p[b.id, t]
                    net_q += plan.flows_q[b.id, t]
                elif b.from_node == i:
                    net -= plan.flows_p[b.id, t]
                    net_q -= plan.flows_q[b.id, t]
            residual = max(abs(net), abs(net_q)) / base
            worst_balance = max(worst_balance, residual)
            if residual > 1e-6:
                bad_balance.append((i, t))
    check(CheckResult("power-balance", not bad_balance,
                      f"nodes/spans {bad_balance[:5]}", worst_balance))

    # (20g) voltage bounds and (20f) drop along closed branches
    bad_v = []
    for i in scenario.node_ids():
        node = scenario.node_by_id(i)
        for t in spans:
            v = plan.voltages[i, t]
            if not node.v_min - 1e-6 <= v <= node.v_max + 1e-6:
                bad_v.append((i, t, v))
    check(CheckResult("voltage-bounds", not bad_v, f"{bad_v[:5]}"))
    worst_drop = 0.0
    bad_drop = []
    for b in scenario.branches:
        coef_p, coef_q = 2.0 * b.r / base, 2.0 * b.x / base
        for t in spans:
            if not plan.switch.get((b.id, t)):
                continue
            lhs = (
                plan.voltages[b.to_node, t] ** 2
                - plan.voltages[b.from_node, t] ** 2
                + coef_p * plan.flows_p[b.id, t]
                + coef_q * plan.flows_q[b.id, t]
            )
            worst_drop = max(worst_drop, abs(lhs))
            if abs(lhs) > 1e-6:
                bad_drop.append((b.id, t))
    check(CheckResult("voltage-drop-closed", not bad_drop,
                      f"{bad_drop[:5]}", worst_drop))

    # (20h) open branches carry nothing; closed ones respect the polygon
    bad_open, bad_cap, over_true = [], [], []
    for b in scenario.branches:
        cap = b.s_cap * base
        for t in spans:
            p, q = plan.flows_p[b.id, t], plan.flows_q[b.id, t]
            s = math.hypot(p, q)
            if not plan.switch.get((b.id, t)):
                if s > 1e-6:
                    bad_open.append((b.id, t))
            else:
                if s > cap * slack + 1e-6:
                    bad_cap.append((b.id, t))
                elif s > cap + 1e-6:
                    over_true.append((b.id, t, s / cap))
    check(CheckResult("open-branch-flow", not bad_open, f"{bad_open[:5]}"))
    check(CheckResult("apparent-branch", not bad_cap, f"{bad_cap[:5]}"))

    bad_dg = []
    for (i, t), (p, q) in plan.dg.items():
        caps = [g.s_cap for g in scenario.generators if g.node == i]
        cap = sum(caps)
        if math.hypot(p, q) > cap * slack + 1e-6:
            bad_dg.append((i, t))
    check(CheckResult("apparent-dg", not bad_dg, f"{bad_dg[:5]}"))

    units = {u.id: u for u in scenario.fleet.units}
    bad_mess_cap, bad_parked = [], []
    for (j, t), entry in plan.mess.items():
        unit = units[j]
        s = math.hypot(
            entry["p_discharge_kw"] - entry["p_charge_kw"], entry["q_kvar"]
        )
        if s > unit.s_cap * slack + 1e-6:
            bad_mess_cap.append((j, t))
        if entry["state"] != "parked" and (
            entry["p_charge_kw"] > 1e-6
            or entry["p_discharge_kw"] > 1e-6
            or abs(entry["q_kvar"]) > 1e-6
        ):
            bad_parked.append((j, t))
        if over_true is not None and s > unit.s_cap + 1e-6:
            over_true.append((j, t, s / unit.s_cap))
    check(CheckResult("apparent-mess", not bad_mess_cap, f"{bad_mess_cap[:5]}"))
    check(CheckResult("mess-dispatch-parked", not bad_parked, f"{bad_parked[:5]}"))
    check(
        CheckResult(
            "apparent-true-cap-info",
            True,
            f"{len(over_true)} point(s) exceed the true circle (polygon "
            f"over-approximation permits up to {slack:.4f}x)",
        )
    )

    # (18f)(18g) SOC replay
    worst_soc = 0.0
    bad_soc = []
    for u in scenario.fleet.units:
        soc = u.initial_soc
        for t in spans:
            entry = plan.mess[u.id, t]
            soc += (
                u.eff_charge * entry["p_charge_kw"]
                - entry["p_discharge_kw"] / u.eff_discharge
            ) * scenario.span_hours / u.energy_kwh
            err = abs(soc - entry["soc"])
            worst_soc = max(worst_soc, err)
            if err > 1e-9:
                bad_soc.append((u.id, t))
            if not u.soc_min - 1e-9 <= entry["soc"] <= u.soc_max + 1e-9:
                bad_soc.append((u.id, t))
    check(CheckResult("soc-replay", not bad_soc, f"{bad_soc[:5]}", worst_soc))

    # routing: no teleportation between parking spots
    bad_move = []
    for u in scenario.fleet.units:
        prev_node, prev_span = u.initial_node, 0
        for t in spans:
            entry = plan.mess[u.id, t]
            if entry["state"] != "parked":
                continue
            node = entry["node"]
            if node != prev_node:
                needed = scenario.fleet.travel(prev_node, node)
                if t - prev_span < needed:
                    bad_move.append((u.id, prev_node, node, t))
            prev_node, prev_span = node, t
    check(CheckResult("mess-no-teleport", not bad_move, f"{bad_move[:5]}"))

    # charging draws from islands that actually have supply
    bad_charge = []
    for t in spans:
        islands = islands_at(scenario, plan.switch, t)
        by_node = {}
        for isl in islands:
            for i in isl:
                by_node[i] = isl
        discharging = {
            plan.mess[j, tt]["node"]
            for (j, tt) in plan.mess
            if tt == t
            and plan.mess[j, tt]["state"] == "parked"
            and plan.mess[j, tt]["p_discharge_kw"] > 1e-6
        }
        for (j, tt), entry in plan.mess.items():
            if tt != t or entry["state"] != "parked":
                continue
            if entry["p_charge_kw"] <= 1e-6:
                continue
            isl = by_node[entry["node"]]
            has_supply = (
                scenario.substation_node in isl
                or any(g.node in isl for g in scenario.generators)
                or any(dn in isl for dn in discharging)
            )
            if not has_supply:
                bad_charge.append((j, t))
    check(CheckResult("charging-energized", not bad_charge, f"{bad_charge[:5]}"))

    # (20i) + (1) restoration flags and counter replay
    bad_mono, bad_counter = [], []
    for load in scenario.interrupted_loads():
        i = load.node
        series = [plan.delta[i, t] for t in spans]
        if any(series[t] < series[t - 1] for t in range(1, len(series))):
            bad_mono.append(i)
        rs = plan.restore_span[i]
        expected = alpha_series(load.initial_cid, rs, scenario.horizon_spans)
        got = [plan.alpha[i, t] for t in spans]
        if got != expected:
            bad_counter.append(i)
    check(CheckResult("delta-monotone", not bad_mono, f"loads {bad_mono}"))
    check(CheckResult("cid-counter", not bad_counter, f"loads {bad_counter}"))

    # (2)-(5) clamped rate, (6)-(17) CLPU reconstruction
    bad_rate, bad_clpu = [], []
    worst_rate = worst_clpu = 0.0
    for load in scenario.interrupted_loads():
        i = load.node
        profile = scenario.cic_profiles[load.customer_class]
        for t in spans:
            if load.p(t) <= 0:
                continue
            a_fun = plan.rate[i, t]
            if plan.delta[i, t]:
                err = abs(a_fun)
            else:
                err = abs(
                    a_fun
                    - rate_oracle(
                        profile, plan.alpha[i, t], scenario.span_hours,
                        scenario.epsilon_rate,
                    )
                )
            worst_rate = max(worst_rate, err)
            if err > 1e-5:
                bad_rate.append((i, t))
        t1 = sum(1 for t in spans if not plan.delta[i, t])
        curve = curve_oracle(
            scenario.clpu_profiles[load.customer_class],
            t1 + load.initial_cid,
            t1,
            scenario.horizon_spans,
        )
        for t in spans:
            if load.p(t) <= 0:
                continue
            got = plan.load_p[i, t] / load.p(t)
            err = abs(got - curve.multiplier(t))
            worst_clpu = max(worst_clpu, err)
            if err > 1e-6:
                bad_clpu.append((i, t))
    check(CheckResult("cic-rate", not bad_rate, f"{bad_rate[:5]}", worst_rate))
    check(CheckResult("clpu-multiplier", not bad_clpu, f"{bad_clpu[:5]}", worst_clpu))

    # objective accounting
    parts = plan.objective_breakdown
    total = parts.get("total", 0.0)
    recomputed = sum(v for k, v in parts.items() if k != "total")
    err = abs(total - recomputed)
    check(CheckResult("objective-decomposition", err <= 1e-6 * max(1.0, abs(total)),
                      f"parts sum {recomputed} vs {total}", err))
    if solution is not None and solution.objective is not None:
        err = abs(solution.objective - total)
        check(CheckResult("objective-matches-solver",
                          err <= 1e-6 * max(1.0, abs(total)), "", err))
    oracle_cic = cumulative_cic_oracle(scenario, plan.restore_span)
    got_cic = parts.get("cic", 0.0)
    rel = abs(got_cic - oracle_cic) / max(1.0, abs(oracle_cic))
    check(CheckResult("cic-term-oracle", rel <= 1e-4,
                      f"model {got_cic:.2f} vs oracle {oracle_cic:.2f}", rel))
    return report


# -- fixed-schedule simulator --------------------------------------------


@dataclass
class SimulationResult:
    total_cic: float
    curves: dict  # node -> np.ndarray of multipliers
    violations: list[str] = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return not self.violations


def simulate_schedule(
    scenario: "Scenario",
    restore_span: dict,
    switch_schedule: dict | None = None,
    mess_plan: dict | None = None,
) -> SimulationResult:
    """Forward-simulate a fixed schedule without assuming feasibility.

    Costs the schedule (CIC accrual + CLPU curves) and lists physics
    violations: broken radiality, closed damaged branches, island
    supply shortfalls and impossible truck moves.  Infeasible schedules
    are still costed so ablations can be compared.
    """
    violations: list[str] = []
    spans = range(1, scenario.horizon_spans + 1)
    total = cumulative_cic_oracle(scenario, restore_span)
    curves = {}
    for load in scenario.interrupted_loads():
        rs = restore_span.get(load.node)
        t1 = scenario.horizon_spans if rs is None else rs - 1
        if not 0 <= t1 <= scenario.horizon_spans:
            violations.append(f"load {load.node}: restore span {rs} out of horizon")
            t1 = min(max(t1, 0), scenario.horizon_spans)
        curve = curve_oracle(
            scenario.clpu_profiles[load.customer_class],
            t1 + load.initial_cid,
            t1,
            scenario.horizon_spans,
        )
        curves[load.node] = curve.multipliers

    parked: dict[tuple[str, int], int | None] = {}
    if mess_plan is not None:
        for u in scenario.fleet.units:
            prev_node, prev_span = u.initial_node, 0
            for t in spans:
                node = mess_plan.get(u.id, {}).get(t)
                parked[u.id, t] = node
                if node is None:
                    continue
                if node != prev_node:
                    needed = scenario.fleet.travel(prev_node, node)
                    if t - prev_span < needed:
                        violations.append(
                            f"mess {u.id}: {prev_node}->{node} arriving span {t} "
                            f"needs {needed} travel spans"
                        )
                prev_node, prev_span = node, t

    if switch_schedule is not None:
        clpu_nodes = {ld.node for ld in scenario.interrupted_loads()}
        for t in spans:
            uf = _UnionFind(scenario.node_ids())
            for b in scenario.branches:
                if switch_schedule.get((b.id, t)):
                    if b.id in scenario.damaged_at(t):
                        violations.append(f"branch {b.id} closed while damaged, span {t}")
                    if not uf.union(b.from_node, b.to_node):
                        violations.append(f"cycle in closed branches, span {t}")
            islands = islands_at(scenario, switch_schedule, t)
            for isl in islands:
                if scenario.substation_node in isl:
                    continue
                served = 0.0
                for load in scenario.loads:
                    if load.node not in isl:
                        continue
                    if load.node in clpu_nodes:
                        served += load.p(t) * curves[load.node][t - 1]
                    else:
                        served += load.p(t)
                cap = sum(g.p_max for g in scenario.generators if g.node in isl)
                if mess_plan is not None:
                    cap += sum(
                        u.p_discharge_max
                        for u in scenario.fleet.units
                        if parked.get((u.id, t)) in isl
                    )
                if served > cap + 1e-6:
                    violations.append(
                        f"island {sorted(isl)[:4]}... span {t}: load {served:.1f} kW "
                        f"exceeds supply capability {cap:.1f} kW"
                    )
    return SimulationResult(total, curves, violations)
