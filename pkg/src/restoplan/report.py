"""Deterministic plan artifacts: plan JSON, study CSVs, breakdown JSON.

The CSVs are plot-ready tables of the quantities a restoration study
reads off: per-load states and multipliers, per-island supply/demand,
the switch schedule and the storage routes.
"""

from __future__ import annotations

import csv
import json
import os
from typing import TYPE_CHECKING

from .grid import RestorationPlan
from .verify import islands_at

if TYPE_CHECKING:
    from .netdata import Scenario


def plan_to_dict(scenario: "Scenario", plan: RestorationPlan) -> dict:
    spans = range(1, scenario.horizon_spans + 1)
    nodes = sorted({i for i, _ in plan.voltages})
    clpu_nodes = sorted({i for i, _ in plan.delta})
    branch_ids = [b.id for b in scenario.branches]
    units = sorted({j for j, _ in plan.mess})
    return {
        "scenario": scenario.name,
        "status": plan.status,
        "objective_total": plan.objective_total,
        "gap": plan.gap,
        "objective_breakdown": plan.objective_breakdown,
        "restore_span": {str(i): plan.restore_span[i] for i in clpu_nodes},
        "delta": {str(i): [plan.delta[i, t] for t in spans] for i in clpu_nodes},
        "alpha": {str(i): [plan.alpha[i, t] for t in spans] for i in clpu_nodes},
        "rate": {str(i): [plan.rate[i, t] for t in spans] for i in clpu_nodes},
        "load_p": {str(i): [plan.load_p[i, t] for t in spans] for i in clpu_nodes},
        "load_q": {str(i): [plan.load_q[i, t] for t in spans] for i in clpu_nodes},
        "switch": {b: [plan.switch[b, t] for t in spans] for b in branch_ids},
        "flows_p": {b: [plan.flows_p[b, t] for t in spans] for b in branch_ids},
        "flows_q": {b: [plan.flows_q[b, t] for t in spans] for b in branch_ids},
        "voltages": {str(i): [plan.voltages[i, t] for t in spans] for i in nodes},
        "dg": {
            str(i): {
                "p": [plan.dg.get((i, t), [0.0, 0.0])[0] for t in spans],
                "q": [plan.dg.get((i, t), [0.0, 0.0])[1] for t in spans],
            }
            for i in sorted({i for i, _ in plan.dg})
        },
        "mess": {j: [plan.mess[j, t] for t in spans] for j in units},
    }


def plan_from_dict(doc: dict) -> RestorationPlan:
    def tuple_keyed(block, cast=int):
        out = {}
        for key, series in block.items():
            for idx, value in enumerate(series, start=1):
                out[cast(key), idx] = value
        return out

    dg = {}
    for key, pq in doc.get("dg", {}).items():
        for idx in range(len(pq["p"])):
            dg[int(key), idx + 1] = [pq["p"][idx], pq["q"][idx]]
    mess = {}
    for j, entries in doc.get("mess", {}).items():
        for idx, entry in enumerate(entries, start=1):
            mess[j, idx] = entry
    return RestorationPlan(
        status=doc["status"],
        objective_total=doc["objective_total"],
        gap=doc.get("gap"),
        restore_span={int(k): v for k, v in doc["restore_span"].items()},
        delta=tuple_keyed(doc["delta"]),
        alpha=tuple_keyed(doc["alpha"]),
        rate=tuple_keyed(doc["rate"]),
        load_p=tuple_keyed(doc["load_p"]),
        load_q=tuple_keyed(doc["load_q"]),
        switch=tuple_keyed(doc["switch"], cast=str),
        flows_p=tuple_keyed(doc["flows_p"], cast=str),
        flows_q=tuple_keyed(doc["flows_q"], cast=str),
        voltages=tuple_keyed(doc["voltages"]),
        dg=dg,
        mess=mess,
        objective_breakdown=doc["objective_breakdown"],
    )


def save_plan(scenario: "Scenario", plan: RestorationPlan, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(plan_to_dict(scenario, plan), fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_plan(path: str) -> RestorationPlan:
    with open(path) as fh:
        return plan_from_dict(json.load(fh))


# -- study CSVs ----------------------------------------------------------


def island_rows(scenario: "Scenario", plan: RestorationPlan) -> list[dict]:
    """Per-island supply/demand per span (the dynamic-rating table)."""
    rows = []
    clpu_nodes = {i for i, _ in plan.delta}
    for t in range(1, scenario.horizon_spans + 1):
        for idx, isl in enumerate(islands_at(scenario, plan.switch, t)):
            served = 0.0
            for load in scenario.loads:
                if load.node not in isl:
                    continue
                if load.node in clpu_nodes:
                    served += plan.load_p[load.node, t]
                else:
                    served += load.p(t)
            dg_kw = sum(plan.dg.get((i, t), [0.0, 0.0])[0] for i in isl)
            dg_cap = sum(g.p_max for g in scenario.generators if g.node in isl)
            mess_d = mess_c = 0.0
            for (j, tt), entry in plan.mess.items():
                if tt == t and entry["state"] == "parked" and entry["node"] in isl:
                    mess_d += entry["p_discharge_kw"]
                    mess_c += entry["p_charge_kw"]
            rows.append(
                {
                    "span": t,
                    "island": idx,
                    "substation": int(scenario.substation_node in isl),
                    "nodes": " ".join(str(i) for i in sorted(isl)),
                    "load_served_kw": round(served, 6),
                    "dg_kw": round(dg_kw, 6),
                    "dg_cap_kw": round(dg_cap, 6),
                    "mess_discharge_kw": round(mess_d, 6),
                    "mess_charge_kw": round(mess_c, 6),
                }
            )
    return rows


def dynamic_rating_spans(scenario: "Scenario", plan: RestorationPlan) -> list[tuple]:
    """(island, span) entries where an island served more load than its
    local generator capacity, the excess riding on storage discharge."""
    hits = []
    for row in island_rows(scenario, plan):
        if (
            not row["substation"]
            and row["load_served_kw"] > row["dg_cap_kw"] + 1e-6
            and row["mess_discharge_kw"] > 1e-6
        ):
            hits.append((row["island"], row["span"]))
    return hits


def _write_csv(path: str, rows: list[dict], columns: list[str]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore")
        writer.writeheader()
        writer.writerows(rows)


def write_artifacts(scenario: "Scenario", plan: RestorationPlan, out_dir: str) -> dict:
    """Write every report artifact; returns {artifact name: path}."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {}

    load_rows = []
    clpu_nodes = sorted({i for i, _ in plan.delta})
    for i in clpu_nodes:
        load = scenario.load_by_node(i)
        for t in range(1, scenario.horizon_spans + 1):
            p = plan.load_p[i, t]
            base = load.p(t)
            load_rows.append(
                {
                    "node": i,
                    "span": t,
                    "delta": plan.delta[i, t],
                    "multiplier": round(p / base, 9) if base > 0 else 0.0,
                    "p_kw": round(p, 6),
                }
            )
    paths["load_states"] = os.path.join(out_dir, "load_states.csv")
    _write_csv(paths["load_states"], load_rows, ["node", "span", "delta", "multiplier", "p_kw"])

    paths["islands"] = os.path.join(out_dir, "islands.csv")
    _write_csv(
        paths["islands"],
        island_rows(scenario, plan),
        [
            "span", "island", "substation", "nodes", "load_served_kw",
            "dg_kw", "dg_cap_kw", "mess_discharge_kw", "mess_charge_kw",
        ],
    )

    switch_rows = []
    for b in scenario.branches:
        prev = 1 if b.initially_closed else 0
        for t in range(1, scenario.horizon_spans + 1):
            state = plan.switch[b.id, t]
            switch_rows.append(
                {
                    "branch": b.id,
                    "span": t,
                    "closed": state,
                    "changed": int(state != prev),
                }
            )
            prev = state
    paths["switches"] = os.path.join(out_dir, "switches.csv")
    _write_csv(paths["switches"], switch_rows, ["branch", "span", "closed", "changed"])

    mess_rows = []
    for j in sorted({j for j, _ in plan.mess}):
        for t in range(1, scenario.horizon_spans + 1):
            entry = plan.mess[j, t]
            mess_rows.append(
                {
                    "mess": j,
                    "span": t,
                    "state": entry["state"],
                    "node": entry["node"],
                    "p_kw": round(entry["p_discharge_kw"] - entry["p_charge_kw"], 6),
                    "soc": round(entry["soc"], 9),
                }
            )
    paths["mess_routes"] = os.path.join(out_dir, "mess_routes.csv")
    _write_csv(paths["mess_routes"], mess_rows, ["mess", "span", "state", "node", "p_kw", "soc"])

    paths["breakdown"] = os.path.join(out_dir, "objective_breakdown.json")
    with open(paths["breakdown"], "w") as fh:
        json.dump(plan.objective_breakdown, fh, indent=1, sort_keys=True)
        fh.write("\n")

    paths["plan"] = os.path.join(out_dir, "plan.json")
    save_plan(scenario, plan, paths["plan"])
    return paths
