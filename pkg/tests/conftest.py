"""Shared miniature scenarios for fast solver-backed tests."""

import pytest

from restoplan.cic import CicProfile
from restoplan.clpu import Characteristic, ClpuProfile
from restoplan.netdata import (
    Branch,
    Fleet,
    Generator,
    LoadPoint,
    MessUnit,
    Node,
    Scenario,
    default_clpu_profiles,
)


def make_mess(uid="m1", node=2, p=500.0, soc=0.9, energy=1000.0):
    return MessUnit(
        id=uid,
        p_charge_max=p,
        p_discharge_max=p,
        q_max=p,
        s_cap=p,
        energy_kwh=energy,
        soc_min=0.1,
        soc_max=1.0,
        eff_charge=0.95,
        eff_discharge=0.95,
        initial_node=node,
        initial_soc=soc,
    )


def flat_clpu(f=2.0, d_pk=2.0, d_dc=2.0, key="cls"):
    """CID-independent characteristics: saturated from zero."""
    return ClpuProfile(
        key=key,
        peak_magnitude=Characteristic(0.0, f, 0.0, f),
        peak_duration=Characteristic(0.0, d_pk, 0.0, d_pk),
        decay_duration=Characteristic(0.0, d_dc, 0.0, d_dc),
    )


def two_node_mess_scenario(horizon=6, travel=(2,), units=1):
    """Two MESS-accessible nodes joined to a substation; used for the
    routing-pattern enumeration tests."""
    nodes = (
        Node(1),
        Node(2, mess_accessible=True),
        Node(3, mess_accessible=True),
    )
    branches = (
        Branch("1-2", 1, 2, 1e-4, 1e-4, 10.0),
        Branch("2-3", 2, 3, 1e-4, 1e-4, 10.0),
    )
    return Scenario(
        name="two-node",
        nodes=nodes,
        branches=branches,
        horizon_spans=horizon,
        span_hours=0.5,
        damage_timeline=(),
        loads=(),
        fleet=Fleet(
            units=tuple(make_mess(f"m{k}", node=2) for k in range(1, units + 1)),
            travel_spans=((2, 3, travel[0]),),
        ),
        generators=(),
        substation_node=1,
        alpha_max=horizon + 1,
        cic_profiles={},
        clpu_profiles={},
    )


def island_scenario(
    horizon=6,
    load_kw=500.0,
    gen_kw=800.0,
    with_mess=False,
    clpu=None,
    initial_cid=1,
    alpha_max=None,
):
    """A substation feeding node 2 over a branch that stays damaged all
    horizon, so node 2 (load + generator [+ MESS]) is an island."""
    clpu = clpu or flat_clpu()
    nodes = (Node(1), Node(2, mess_accessible=True), Node(3, mess_accessible=True))
    branches = (
        Branch("1-2", 1, 2, 1e-4, 1e-4, 10.0, initially_closed=False),
        Branch("1-3", 1, 3, 1e-4, 1e-4, 10.0),
    )
    units = (make_mess("m1", node=2),) if with_mess else ()
    return Scenario(
        name="island",
        nodes=nodes,
        branches=branches,
        horizon_spans=horizon,
        span_hours=0.5,
        damage_timeline=tuple(
            (t, frozenset({"1-2"})) for t in range(1, horizon + 1)
        ),
        loads=(
            LoadPoint(
                node=2,
                base_p=(load_kw,) * horizon,
                power_factor_coeff=0.4843,
                customer_class="cls",
                initially_interrupted=True,
                initial_cid=initial_cid,
            ),
        ),
        fleet=Fleet(units=units, travel_spans=((2, 3, 1),)),
        generators=(Generator(2, gen_kw, gen_kw * 1.25),),
        substation_node=1,
        alpha_max=alpha_max or (horizon + initial_cid + 1),
        cic_profiles={"cls": CicProfile("cls", -0.05, 1.2, 4.0, 1.0)},
        clpu_profiles={"cls": clpu},
    )
