"""Problem-instance data model, scenario file I/O and the bundled
33-node restoration case.

Scenario files are JSON with top-level keys ``horizon``, ``nodes``,
``branches``, ``loads``, ``fleet``, ``generators``, ``damage`` and
``profiles``.  Powers are kW/kVar/kVA, energies kWh, durations in spans
unless the key is suffixed ``_hours``; branch impedances and capacities
are per-unit on ``base.power_kva`` / ``base.voltage_kv``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from importlib import resources

from .cic import CicProfile
from .clpu import ClpuProfile, degenerate_rounding_cids


class ScenarioError(ValueError):
    """Malformed or invalid scenario data."""


@dataclass(frozen=True)
class Node:
    id: int
    v_min: float = 0.95
    v_max: float = 1.05
    mess_accessible: bool = False


@dataclass(frozen=True)
class Branch:
    id: str
    from_node: int
    to_node: int
    r: float  # p.u.
    x: float  # p.u.
    s_cap: float  # p.u. apparent-power capacity
    initially_closed: bool = True


@dataclass(frozen=True)
class LoadPoint:
    node: int
    base_p: tuple[float, ...]  # kW per span
    power_factor_coeff: float = 0.4843
    customer_class: str = "residential"
    initially_interrupted: bool = False
    initial_cid: int = 0

    def p(self, span: int) -> float:
        return self.base_p[span - 1]


@dataclass(frozen=True)
class MessUnit:
    id: str
    p_charge_max: float  # kW
    p_discharge_max: float  # kW
    q_max: float  # kVar
    s_cap: float  # kVA
    energy_kwh: float
    soc_min: float
    soc_max: float
    eff_charge: float
    eff_discharge: float
    initial_node: int
    initial_soc: float


@dataclass(frozen=True)
class Fleet:
    units: tuple[MessUnit, ...] = ()
    travel_spans: tuple[tuple[int, int, int], ...] = ()  # (i, j, spans), i < j

    def travel(self, i: int, j: int) -> int:
        key = (min(i, j), max(i, j))
        for a, b, spans in self.travel_spans:
            if (a, b) == key:
                return spans
        raise KeyError(f"no travel time defined for pair {key}")


@dataclass(frozen=True)
class Generator:
    node: int
    p_max: float  # kW
    s_cap: float  # kVA


@dataclass(frozen=True)
class Scenario:
    name: str
    nodes: tuple[Node, ...]
    branches: tuple[Branch, ...]
    horizon_spans: int
    span_hours: float
    damage_timeline: tuple[tuple[int, frozenset[str]], ...]  # (span, branch ids)
    loads: tuple[LoadPoint, ...]
    fleet: Fleet
    generators: tuple[Generator, ...]
    substation_node: int
    sigma1: float = 1.0
    sigma2: float = 1.0
    sigma3: float = 1.0
    epsilon_rate: float = 1e-3
    alpha_max: int = 20
    base_power_kva: float = 1000.0
    base_voltage_kv: float = 12.66
    cic_profiles: dict = field(default_factory=dict)
    clpu_profiles: dict = field(default_factory=dict)

    # -- convenience lookups ------------------------------------------

    def node_ids(self) -> list[int]:
        return [n.id for n in self.nodes]

    def node_by_id(self, nid: int) -> Node:
        for n in self.nodes:
            if n.id == nid:
                return n
        raise KeyError(f"unknown node {nid}")

    def branch_by_id(self, bid: str) -> Branch:
        for b in self.branches:
            if b.id == bid:
                return b
        raise KeyError(f"unknown branch {bid}")

    def damaged_at(self, span: int) -> frozenset[str]:
        for s, ids in self.damage_timeline:
            if s == span:
                return ids
        return frozenset()

    def interrupted_loads(self) -> list[LoadPoint]:
        return [ld for ld in self.loads if ld.initially_interrupted]

    def load_by_node(self, nid: int) -> LoadPoint | None:
        for ld in self.loads:
            if ld.node == nid:
                return ld
        return None

    def mess_nodes(self) -> list[int]:
        return [n.id for n in self.nodes if n.mess_accessible]


# -- serialization -----------------------------------------------------


def scenario_to_dict(s: Scenario) -> dict:
    return {
        "name": s.name,
        "horizon": {"spans": s.horizon_spans, "span_hours": s.span_hours},
        "base": {"power_kva": s.base_power_kva, "voltage_kv": s.base_voltage_kv},
        "substation_node": s.substation_node,
        "penalties": {"sigma1": s.sigma1, "sigma2": s.sigma2, "sigma3": s.sigma3},
        "epsilon_rate": s.epsilon_rate,
        "alpha_max": s.alpha_max,
        "nodes": [
            {
                "id": n.id,
                "v_min": n.v_min,
                "v_max": n.v_max,
                "mess_accessible": n.mess_accessible,
            }
            for n in s.nodes
        ],
        "branches": [
            {
                "id": b.id,
                "from": b.from_node,
                "to": b.to_node,
                "r_pu": b.r,
                "x_pu": b.x,
                "s_cap_pu": b.s_cap,
                "initially_closed": b.initially_closed,
            }
            for b in s.branches
        ],
        "loads": [
            {
                "node": ld.node,
                "base_p_kw": list(ld.base_p),
                "power_factor_coeff": ld.power_factor_coeff,
                "customer_class": ld.customer_class,
                "initially_interrupted": ld.initially_interrupted,
                "initial_cid": ld.initial_cid,
            }
            for ld in s.loads
        ],
        "generators": [
            {"node": g.node, "p_max_kw": g.p_max, "s_cap_kva": g.s_cap}
            for g in s.generators
        ],
        "fleet": {
            "units": [
                {
                    "id": u.id,
                    "p_charge_max_kw": u.p_charge_max,
                    "p_discharge_max_kw": u.p_discharge_max,
                    "q_max_kvar": u.q_max,
                    "s_cap_kva": u.s_cap,
                    "energy_kwh": u.energy_kwh,
                    "soc_min": u.soc_min,
                    "soc_max": u.soc_max,
                    "eff_charge": u.eff_charge,
                    "eff_discharge": u.eff_discharge,
                    "initial_node": u.initial_node,
                    "initial_soc": u.initial_soc,
                }
                for u in s.fleet.units
            ],
            "travel_spans": [list(t) for t in s.fleet.travel_spans],
        },
        "damage": {
            str(span): sorted(ids) for span, ids in s.damage_timeline if ids
        },
        "profiles": {
            "cic": {
                key: {"a": p.a, "b": p.b, "c": p.c, "fit_r2": p.fit_r2}
                for key, p in sorted(s.cic_profiles.items())
            },
            "clpu": {
                key: p.to_hours(s.span_hours)
                for key, p in sorted(s.clpu_profiles.items())
            },
        },
    }


def _require(mapping: dict, key: str, context: str):
    try:
        return mapping[key]
    except (KeyError, TypeError):
        raise ScenarioError(f"missing field {key!r} in {context}")


def scenario_from_dict(doc: dict) -> Scenario:
    horizon = _require(doc, "horizon", "scenario")
    spans = int(_require(horizon, "spans", "horizon"))
    span_hours = float(_require(horizon, "span_hours", "horizon"))
    base = doc.get("base", {})
    nodes = tuple(
        Node(
            id=int(_require(n, "id", "node")),
            v_min=float(n.get("v_min", 0.95)),
            v_max=float(n.get("v_max", 1.05)),
            mess_accessible=bool(n.get("mess_accessible", False)),
        )
        for n in _require(doc, "nodes", "scenario")
    )
    branches = tuple(
        Branch(
            id=str(_require(b, "id", "branch")),
            from_node=int(_require(b, "from", "branch")),
            to_node=int(_require(b, "to", "branch")),
            r=float(_require(b, "r_pu", "branch")),
            x=float(_require(b, "x_pu", "branch")),
            s_cap=float(_require(b, "s_cap_pu", "branch")),
            initially_closed=bool(b.get("initially_closed", True)),
        )
        for b in _require(doc, "branches", "scenario")
    )
    loads = []
    for ld in _require(doc, "loads", "scenario"):
        base_p = _require(ld, "base_p_kw", f"load at node {ld.get('node')}")
        if isinstance(base_p, (int, float)):
            base_p = [float(base_p)] * spans
        loads.append(
            LoadPoint(
                node=int(_require(ld, "node", "load")),
                base_p=tuple(float(p) for p in base_p),
                power_factor_coeff=float(ld.get("power_factor_coeff", 0.4843)),
                customer_class=str(ld.get("customer_class", "residential")),
                initially_interrupted=bool(ld.get("initially_interrupted", False)),
                initial_cid=int(ld.get("initial_cid", 0)),
            )
        )
    fleet_doc = doc.get("fleet", {"units": [], "travel_spans": []})
    units = tuple(
        MessUnit(
            id=str(_require(u, "id", "mess unit")),
            p_charge_max=float(_require(u, "p_charge_max_kw", "mess unit")),
            p_discharge_max=float(_require(u, "p_discharge_max_kw", "mess unit")),
            q_max=float(_require(u, "q_max_kvar", "mess unit")),
            s_cap=float(_require(u, "s_cap_kva", "mess unit")),
            energy_kwh=float(_require(u, "energy_kwh", "mess unit")),
            soc_min=float(u.get("soc_min", 0.1)),
            soc_max=float(u.get("soc_max", 1.0)),
            eff_charge=float(u.get("eff_charge", 0.95)),
            eff_discharge=float(u.get("eff_discharge", 0.95)),
            initial_node=int(_require(u, "initial_node", "mess unit")),
            initial_soc=float(_require(u, "initial_soc", "mess unit")),
        )
        for u in fleet_doc.get("units", [])
    )
    travel = tuple(
        (min(int(a), int(b)), max(int(a), int(b)), int(t))
        for a, b, t in fleet_doc.get("travel_spans", [])
    )
    generators = tuple(
        Generator(
            node=int(_require(g, "node", "generator")),
            p_max=float(_require(g, "p_max_kw", "generator")),
            s_cap=float(_require(g, "s_cap_kva", "generator")),
        )
        for g in doc.get("generators", [])
    )
    damage = tuple(
        sorted(
            (int(span), frozenset(str(b) for b in ids))
            for span, ids in doc.get("damage", {}).items()
        )
    )
    profiles = doc.get("profiles", {})
    cic_profiles = {
        key: CicProfile(key, float(p["a"]), float(p["b"]), float(p["c"]),
                        float(p.get("fit_r2", float("nan"))))
        for key, p in profiles.get("cic", {}).items()
    }
    clpu_profiles = {
        key: ClpuProfile.from_hours(key, p, span_hours)
        for key, p in profiles.get("clpu", {}).items()
    }
    penalties = doc.get("penalties", {})
    return Scenario(
        name=str(doc.get("name", "scenario")),
        nodes=nodes,
        branches=branches,
        horizon_spans=spans,
        span_hours=span_hours,
        damage_timeline=damage,
        loads=tuple(loads),
        fleet=Fleet(units=units, travel_spans=travel),
        generators=generators,
        substation_node=int(_require(doc, "substation_node", "scenario")),
        sigma1=float(penalties.get("sigma1", 1.0)),
        sigma2=float(penalties.get("sigma2", 1.0)),
        sigma3=float(penalties.get("sigma3", 1.0)),
        epsilon_rate=float(doc.get("epsilon_rate", 1e-3)),
        alpha_max=int(doc.get("alpha_max", 20)),
        base_power_kva=float(base.get("power_kva", 1000.0)),
        base_voltage_kv=float(base.get("voltage_kv", 12.66)),
        cic_profiles=cic_profiles,
        clpu_profiles=clpu_profiles,
    )


def load_scenario(path: str) -> Scenario:
    """Parse and validate a scenario file; ``"case33"`` loads the
    bundled 33-node case."""
    if path == "case33":
        text = resources.files("restoplan").joinpath("data/case33.json").read_text()
        source = "bundled case33"
    else:
        with open(path) as fh:
            text = fh.read()
        source = path
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(
            f"parse error in {source} at line {exc.lineno} column {exc.colno}: {exc.msg}"
        )
    scenario = scenario_from_dict(doc)
    report = validate_scenario(scenario)
    if not report.overall:
        first = next(c for c in report.checks if not c.passed)
        raise ScenarioError(
            f"invalid scenario {source}: {first.name}: {first.detail}"
        )
    return scenario


def save_scenario(s: Scenario, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(scenario_to_dict(s), fh, indent=1, sort_keys=True)
        fh.write("\n")


# -- validation ---------------------------------------------------------


def validate_scenario(s: Scenario):
    """Check every data invariant; failures are report entries, not
    exceptions."""
    from .verify import CheckResult, ValidationReport

    checks: list[CheckResult] = []

    def check(name: str, ok: bool, detail: str = ""):
        checks.append(CheckResult(name, bool(ok), detail))

    check("horizon", s.horizon_spans >= 1 and s.span_hours > 0,
          f"spans={s.horizon_spans} span_hours={s.span_hours}")
    node_ids = set(s.node_ids())
    check("node-ids-unique", len(node_ids) == len(s.nodes))
    check("substation", s.substation_node in node_ids,
          f"substation {s.substation_node}")
    bad_v = [n.id for n in s.nodes if not (0 < n.v_min < n.v_max)]
    check("node-voltage-bounds", not bad_v, f"nodes {bad_v}")

    branch_ids = set()
    bad_br = []
    for b in s.branches:
        branch_ids.add(b.id)
        if (
            b.from_node == b.to_node
            or b.from_node not in node_ids
            or b.to_node not in node_ids
            or b.r < 0
            or b.x < 0
            or b.s_cap <= 0
        ):
            bad_br.append(b.id)
    check("branch-data", not bad_br, f"branches {bad_br}")
    check("branch-ids-unique", len(branch_ids) == len(s.branches))

    bad_spans = [t for t, _ in s.damage_timeline if not 1 <= t <= s.horizon_spans]
    check("damage-keys", not bad_spans, f"spans {bad_spans}")
    unknown = sorted(
        {b for _, ids in s.damage_timeline for b in ids if b not in branch_ids}
    )
    check("damage-branches", not unknown, f"unknown branches {unknown}")

    bad_loads, bad_cid, bad_class = [], [], []
    for ld in s.loads:
        if (
            ld.node not in node_ids
            or len(ld.base_p) != s.horizon_spans
            or any(p < 0 for p in ld.base_p)
            or ld.power_factor_coeff < 0
        ):
            bad_loads.append(ld.node)
        if ld.initial_cid < 0 or (ld.initial_cid > 0 and not ld.initially_interrupted):
            bad_cid.append(ld.node)
        if ld.initially_interrupted and (
            ld.customer_class not in s.cic_profiles
            or ld.customer_class not in s.clpu_profiles
        ):
            bad_class.append(ld.node)
    check("load-data", not bad_loads, f"loads {bad_loads}")
    check("load-initial-cid", not bad_cid, f"loads {bad_cid}")
    check("load-profiles", not bad_class, f"loads missing profiles {bad_class}")

    max_cid = max((ld.initial_cid for ld in s.loads), default=0)
    check(
        "alpha_max too small",
        s.alpha_max >= s.horizon_spans + max_cid,
        f"alpha_max={s.alpha_max} < horizon+max_cid={s.horizon_spans + max_cid}",
    )

    bad_soc = [
        u.id
        for u in s.fleet.units
        if not (u.soc_min <= u.initial_soc <= u.soc_max)
    ]
    check("fleet soc bounds", not bad_soc, f"units {bad_soc}")
    bad_eff = [
        u.id
        for u in s.fleet.units
        if not (0 < u.eff_charge <= 1 and 0 < u.eff_discharge <= 1)
    ]
    check("fleet-efficiency", not bad_eff, f"units {bad_eff}")
    mess = sorted(s.mess_nodes())
    missing_pairs = []
    have = {(a, b) for a, b, _ in s.fleet.travel_spans}
    if s.fleet.units:
        for ii, a in enumerate(mess):
            for b in mess[ii + 1 :]:
                if (a, b) not in have:
                    missing_pairs.append((a, b))
    check("fleet-travel-pairs", not missing_pairs, f"missing pairs {missing_pairs}")
    bad_tt = [(a, b) for a, b, t in s.fleet.travel_spans if t < 1]
    check("fleet-travel-positive", not bad_tt, f"pairs {bad_tt}")
    bad_init = [
        u.id for u in s.fleet.units if u.initial_node not in set(mess)
    ]
    check("fleet-initial-node", not bad_init, f"units {bad_init}")

    bad_gen = [
        g.node
        for g in s.generators
        if g.node not in node_ids or not (0 < g.p_max <= g.s_cap)
    ]
    check("generator-data", not bad_gen, f"generators {bad_gen}")

    degenerate = {}
    for ld in s.interrupted_loads():
        prof = s.clpu_profiles.get(ld.customer_class)
        if prof is None:
            continue
        if ld.customer_class in degenerate:
            continue
        bad = degenerate_rounding_cids(prof, s.horizon_spans + max_cid)
        if bad:
            degenerate[ld.customer_class] = bad
    check(
        "clpu-rounding-degenerate",
        not degenerate,
        f"duration lands exactly on a rounding threshold: {degenerate}",
    )

    return ValidationReport(checks)


# -- bundled 33-node case ----------------------------------------------

# branch data: (from, to, r_ohm, x_ohm); loads: node -> (P kW, Q kVar)
_CASE33_BRANCHES = [
    (1, 2, 0.0922, 0.0470),
    (2, 3, 0.4930, 0.2511),
    (3, 4, 0.3660, 0.1864),
    (4, 5, 0.3811, 0.1941),
    (5, 6, 0.8190, 0.7070),
    (6, 7, 0.1872, 0.6188),
    (7, 8, 0.7114, 0.2351),
    (8, 9, 1.0300, 0.7400),
    (9, 10, 1.0440, 0.7400),
    (10, 11, 0.1966, 0.0650),
    (11, 12, 0.3744, 0.1238),
    (12, 13, 1.4680, 1.1550),
    (13, 14, 0.5416, 0.7129),
    (14, 15, 0.5910, 0.5260),
    (15, 16, 0.7463, 0.5450),
    (16, 17, 1.2890, 1.7210),
    (17, 18, 0.7320, 0.5740),
    (2, 19, 0.1640, 0.1565),
    (19, 20, 1.5042, 1.3554),
    (20, 21, 0.4095, 0.4784),
    (21, 22, 0.7089, 0.9373),
    (3, 23, 0.4512, 0.3083),
    (23, 24, 0.8980, 0.7091),
    (24, 25, 0.8960, 0.7011),
    (6, 26, 0.2030, 0.1034),
    (26, 27, 0.2842, 0.1447),
    (27, 28, 1.0590, 0.9337),
    (28, 29, 0.8042, 0.7006),
    (29, 30, 0.5075, 0.2585),
    (30, 31, 0.9744, 0.9630),
    (31, 32, 0.3105, 0.3619),
    (32, 33, 0.3410, 0.5302),
]
_CASE33_TIES = [
    (8, 21, 2.0, 2.0),
    (9, 15, 2.0, 2.0),
    (12, 22, 2.0, 2.0),
    (18, 33, 0.5, 0.5),
    (25, 29, 0.5, 0.5),
]
_CASE33_LOADS = {
    2: (100, 60), 3: (90, 40), 4: (120, 80), 5: (60, 30), 6: (60, 20),
    7: (200, 100), 8: (200, 100), 9: (60, 20), 10: (60, 20), 11: (45, 30),
    12: (60, 35), 13: (60, 35), 14: (120, 80), 15: (60, 10), 16: (60, 20),
    17: (60, 20), 18: (90, 40), 19: (90, 40), 20: (90, 40), 21: (90, 40),
    22: (90, 40), 23: (90, 50), 24: (420, 200), 25: (420, 200), 26: (60, 25),
    27: (60, 25), 28: (60, 20), 29: (120, 70), 30: (200, 600), 31: (150, 70),
    32: (210, 100), 33: (60, 40),
}
_CASE33_DAMAGE_STAGE1 = ("20-21", "8-9", "13-14", "3-23", "4-5", "7-8", "30-31")
_CASE33_DAMAGE_STAGE2 = ("3-23", "4-5", "7-8", "30-31")


def default_cic_profiles() -> dict:
    """Synthetic stand-ins for the survey-derived fits (the C&I quadratic
    crosses zero at a 16-hour interruption)."""
    return {
        "residential": CicProfile("residential", -0.05, 1.2, 4.0, 1.0),
        "ci": CicProfile("ci", -0.5, 7.0, 16.0, 1.0),
    }


def default_clpu_profiles(span_hours: float) -> dict:
    """Synthetic saturating characteristics (2.0x / 2.5x peak multiples,
    knees at 4 h / 5 h of interruption)."""
    residential = {
        "peak_magnitude": {"slope_per_hour": 0.25, "intercept": 1.0,
                           "knee_hours": 4.0, "saturation": 2.0},
        "peak_duration": {"slope": 0.35, "intercept_hours": 0.1,
                          "knee_hours": 4.0, "saturation_hours": 1.5},
        "decay_duration": {"slope": 0.45, "intercept_hours": 0.2,
                           "knee_hours": 4.0, "saturation_hours": 2.0},
        "round_eps_pk": 0.5,
        "round_eps_dc": 0.5,
    }
    ci = {
        "peak_magnitude": {"slope_per_hour": 0.3, "intercept": 1.0,
                           "knee_hours": 5.0, "saturation": 2.5},
        "peak_duration": {"slope": 0.27, "intercept_hours": 0.15,
                          "knee_hours": 5.0, "saturation_hours": 1.5},
        "decay_duration": {"slope": 0.36, "intercept_hours": 0.2,
                           "knee_hours": 5.0, "saturation_hours": 2.0},
        "round_eps_pk": 0.5,
        "round_eps_dc": 0.5,
    }
    return {
        "residential": ClpuProfile.from_hours("residential", residential, span_hours),
        "ci": ClpuProfile.from_hours("ci", ci, span_hours),
    }


def builtin_case33() -> Scenario:
    """The bundled restoration scenario on the 33-node feeder.

    Seven branches are damaged for spans 1-7, four remain out through
    span 11, everything is repaired afterwards (18 half-hour spans).
    Three 500 kW / 1000 kWh storage trucks start at node 3; 800 kW
    backup generators sit at nodes 11 and 24.
    """
    spans = 18
    span_hours = 0.5
    z_base = 12.66**2 * 1000.0 / 1000.0  # ohm, on 1 MVA / 12.66 kV
    mess_nodes = {3, 8, 29}
    nodes = tuple(
        Node(i, v_min=0.90, v_max=1.05, mess_accessible=i in mess_nodes)
        for i in range(1, 34)
    )
    stage1 = set(_CASE33_DAMAGE_STAGE1)
    branches = []
    for f, t, r, x in _CASE33_BRANCHES:
        bid = f"{f}-{t}"
        branches.append(
            Branch(bid, f, t, r / z_base, x / z_base, s_cap=10.0,
                   initially_closed=bid not in stage1)
        )
    for f, t, r, x in _CASE33_TIES:
        branches.append(
            Branch(f"{f}-{t}", f, t, r / z_base, x / z_base, s_cap=10.0,
                   initially_closed=False)
        )

    # nodes still fed from the substation through the intact closed branches
    adjacency: dict[int, list[int]] = {i: [] for i in range(1, 34)}
    for b in branches:
        if b.initially_closed:
            adjacency[b.from_node].append(b.to_node)
            adjacency[b.to_node].append(b.from_node)
    supplied, stack = {1}, [1]
    while stack:
        for nb in adjacency[stack.pop()]:
            if nb not in supplied:
                supplied.add(nb)
                stack.append(nb)

    loads = []
    for node in sorted(_CASE33_LOADS):
        p, q = _CASE33_LOADS[node]
        interrupted = node not in supplied
        loads.append(
            LoadPoint(
                node=node,
                base_p=(float(p),) * spans,
                power_factor_coeff=q / p,
                customer_class="ci" if node % 2 == 0 else "residential",
                initially_interrupted=interrupted,
                initial_cid=1 if interrupted else 0,
            )
        )

    units = tuple(
        MessUnit(
            id=f"mess{j}",
            p_charge_max=500.0,
            p_discharge_max=500.0,
            q_max=500.0,
            s_cap=500.0,
            energy_kwh=1000.0,
            soc_min=0.1,
            soc_max=1.0,
            eff_charge=0.95,
            eff_discharge=0.95,
            initial_node=3,
            initial_soc=0.9,
        )
        for j in (1, 2, 3)
    )
    damage = tuple(
        (t, frozenset(_CASE33_DAMAGE_STAGE1 if t <= 7 else _CASE33_DAMAGE_STAGE2))
        for t in range(1, 12)
    )
    return Scenario(
        name="case33",
        nodes=nodes,
        branches=tuple(branches),
        horizon_spans=spans,
        span_hours=span_hours,
        damage_timeline=damage,
        loads=tuple(loads),
        fleet=Fleet(
            units=units,
            travel_spans=((3, 8, 1), (3, 29, 2), (8, 29, 1)),
        ),
        generators=(Generator(11, 800.0, 1000.0), Generator(24, 800.0, 1000.0)),
        substation_node=1,
        sigma1=1.0,
        sigma2=1.0,
        sigma3=1.0,
        epsilon_rate=1e-3,
        alpha_max=20,
        cic_profiles=default_cic_profiles(),
        clpu_profiles=default_clpu_profiles(span_hours),
    )
