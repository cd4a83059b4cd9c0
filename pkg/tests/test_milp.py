import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from restoplan.milp import (
    BINARY,
    INTEGER,
    MilpModel,
    ModelError,
    VarSpec,
    emit_lp,
)


def test_add_variable_binary_bounds():
    m = MilpModel()
    vid = m.add_variable(VarSpec("b", BINARY))
    assert m.variables[vid].lower == 0.0
    assert m.variables[vid].upper == 1.0


def test_add_variable_integer_counter_bounds():
    m = MilpModel()
    vid = m.integer("alpha", 0, 8)
    spec = m.variables[vid]
    assert spec.kind == INTEGER and spec.upper == 8


def test_add_variable_invalid_bounds():
    m = MilpModel()
    with pytest.raises(ModelError):
        m.continuous("bad", lower=2.0, upper=1.0)


def test_add_constraint_merges_duplicates_and_counts_terms():
    m = MilpModel()
    x, y = m.binary("x"), m.binary("y")
    cid = m.add_constraint([(x, 1.0), (y, 1.0)], "<=", 1.0)
    assert len(m.constraints[cid].terms) == 2
    cid = m.add_constraint([(x, 1.0), (x, 2.0)], "<=", 4.0)
    assert m.constraints[cid].terms == ((x, 3.0),)


def test_add_constraint_foreign_var():
    m = MilpModel()
    m.binary("x")
    with pytest.raises(ModelError):
        m.add_constraint([(99, 1.0)], "<=", 1.0)


def test_tag_cross_reference():
    m = MilpModel()
    x = m.binary("x")
    m.add_constraint([(x, 1.0)], "<=", 1.0, tag="eq2b")
    m.add_constraint([(x, 1.0)], ">=", 0.0, tag="eq2b")
    assert m.tag_counts()["eq2b"] == 2
    assert len(m.constraints_tagged("eq2b")) == 2


def test_empty_constraint_flagged_trivially_infeasible():
    m = MilpModel()
    m.binary("x")
    m.add_constraint([], "<=", -1.0)
    findings = m.validate()
    assert any("trivially infeasible" in f for f in findings)
    # a satisfiable empty row is fine
    m2 = MilpModel()
    m2.binary("x")
    m2.add_constraint([], "<=", 0.0)
    assert not m2.validate()


def _polygon_rows(m):
    return [(dict(c.terms), c.rhs) for c in m.constraints]


def test_circle_cap_four_segments_is_box():
    m = MilpModel()
    x = m.continuous("x", -10, 10)
    y = m.continuous("y", -10, 10)
    m.add_circle_cap(x, y, 1.0, segments=4)
    rows = _polygon_rows(m)
    # axis-aligned square: x <= 1, -x <= 1, y <= 1, -y <= 1
    assert ({x: 1.0}, 1.0) in rows
    assert ({x: -1.0}, 1.0) in rows
    assert ({y: 1.0}, 1.0) in rows
    assert ({y: -1.0}, 1.0) in rows


def _accepts(m, px, py, x, y):
    for con in m.constraints:
        terms = dict(con.terms)
        lhs = terms.get(x, 0.0) * px + terms.get(y, 0.0) * py
        if lhs > con.rhs + 1e-12:
            return False
    return True


def test_circle_cap_twelve_segments_points():
    m = MilpModel()
    x = m.continuous("x", -10, 10)
    y = m.continuous("y", -10, 10)
    m.add_circle_cap(x, y, 1.0, segments=12)
    assert not _accepts(m, 1.02, 0.0, x, y)
    ang = math.radians(15.0)
    assert _accepts(m, 0.99 * math.cos(ang), 0.99 * math.sin(ang), x, y)


def test_circle_cap_rejects_bad_segments():
    m = MilpModel()
    x, y = m.continuous("x"), m.continuous("y")
    with pytest.raises(ModelError):
        m.add_circle_cap(x, y, 1.0, segments=3)
    with pytest.raises(ModelError):
        m.add_circle_cap(x, y, 1.0, segments=7)
    with pytest.raises(ModelError):
        m.add_circle_cap(x, y, -1.0, segments=8)


@settings(max_examples=200, deadline=None)
@given(
    st.floats(-2, 2),
    st.floats(-2, 2),
    st.sampled_from([4, 6, 8, 12, 16]),
    st.floats(0.1, 5.0),
)
def test_circle_cap_over_approximation_bound(px, py, segments, cap):
    """Any point accepted by the polygon lies within cap / cos(pi/s)."""
    m = MilpModel()
    x = m.continuous("x", -10, 10)
    y = m.continuous("y", -10, 10)
    m.add_circle_cap(x, y, cap, segments=segments)
    if _accepts(m, px, py, x, y):
        assert math.hypot(px, py) <= cap / math.cos(math.pi / segments) + 1e-9


def test_emit_lp_sections_and_determinism():
    m = MilpModel("demo")
    b = m.binary("flag")
    m.add_constraint([(b, 1.0)], "<=", 1.0, tag="eq1b")
    text = emit_lp(m)
    assert "Binaries" in text
    assert "c0_eq1b" in text
    assert emit_lp(m) == text  # byte-identical on re-emission


def test_emit_lp_fixed_binary_gets_bounds_line():
    m = MilpModel()
    b = m.binary("flag")
    m.fix(b, 1.0)
    assert " 1.0 <= v0 <= 1.0" in emit_lp(m)


def test_fix_and_validate_empty_domain():
    m = MilpModel()
    x = m.continuous("x", 0, 5)
    m.fix(x, 3.0)
    assert m.variables[x].lower == m.variables[x].upper == 3.0
