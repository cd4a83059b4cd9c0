import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from restoplan.backends import (
    OPTIMAL,
    BackendConfig,
    BackendUnavailable,
    available_backends,
    model_matrices,
    parse_lp,
    solve,
)
from restoplan.milp import MilpModel, emit_lp

BACKENDS = available_backends()


def _tiny_model():
    m = MilpModel("tiny")
    x = m.integer("x", 0, 10)
    m.add_constraint([(x, 1.0)], ">=", 3.0, "floor")
    m.objective_add(x, 1.0)
    return m, x


@pytest.mark.parametrize("backend", BACKENDS)
def test_min_integer_above_three(backend):
    m, x = _tiny_model()
    sol = solve(m, BackendConfig(backend=backend, time_limit=60))
    assert sol.status == OPTIMAL
    assert sol.objective == pytest.approx(3.0, abs=1e-9)
    assert sol.value(x) == pytest.approx(3.0, abs=1e-6)


@pytest.mark.parametrize("backend", BACKENDS)
def test_infeasible_model_status(backend):
    m = MilpModel()
    x = m.continuous("x", 0, 10)
    m.add_constraint([(x, 1.0)], "<=", 0.0)
    m.add_constraint([(x, 1.0)], ">=", 1.0)
    sol = solve(m, BackendConfig(backend=backend, time_limit=60))
    assert sol.status == "infeasible"


@pytest.mark.parametrize("backend", BACKENDS)
def test_residual_check_on_accepted_solutions(backend):
    m = MilpModel()
    x = m.continuous("x", 0.0, 5.0)
    y = m.binary("y")
    m.add_constraint([(x, 1.0), (y, -5.0)], "<=", 0.0)
    m.add_constraint([(x, 1.0)], ">=", 2.0)
    m.objective_add(x, 1.0)
    m.objective_add(y, 0.5)
    sol = solve(m, BackendConfig(backend=backend, time_limit=60))
    assert sol.feasible
    assert sol.max_residual <= 1e-6


def test_unknown_backend_raises():
    m, _ = _tiny_model()
    with pytest.raises(BackendUnavailable):
        solve(m, BackendConfig(backend="gurobi"))


def test_process_backend_missing_exe():
    m, _ = _tiny_model()
    cfg = BackendConfig(backend="process", solver_exe="/nonexistent/solver")
    with pytest.raises(BackendUnavailable, match="backend unavailable"):
        solve(m, cfg)


def test_scipy_respects_fixed_binaries():
    m = MilpModel()
    b = m.binary("b")
    m.fix(b, 1.0)
    m.objective_add(b, 1.0)
    sol = solve(m, BackendConfig())
    assert sol.value(b) == pytest.approx(1.0)


def test_lp_roundtrip_tiny():
    m, _ = _tiny_model()
    parsed = parse_lp(emit_lp(m))
    a, b = model_matrices(m), model_matrices(parsed)
    assert np.allclose(a.c, b.c)
    assert (a.a != b.a).nnz == 0
    assert np.allclose(a.row_lb, b.row_lb) and np.allclose(a.row_ub, b.row_ub)
    assert np.allclose(a.lb, b.lb) and np.allclose(a.ub, b.ub)
    assert np.array_equal(a.integrality, b.integrality)


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_lp_roundtrip_random_models(data):
    """Write-then-parse preserves the exact matrices for random models."""
    rng_n = data.draw(st.integers(1, 8))
    m = MilpModel("rand")
    for i in range(rng_n):
        kind = data.draw(st.sampled_from(["binary", "integer", "continuous"]))
        if kind == "binary":
            m.binary(f"b{i}")
        elif kind == "integer":
            m.integer(f"i{i}", 0, data.draw(st.integers(1, 50)))
        else:
            lo = data.draw(st.floats(-100, 0))
            hi = lo + data.draw(st.floats(0.5, 100))
            m.continuous(f"c{i}", lo, hi)
        if data.draw(st.booleans()):
            m.objective_add(i, data.draw(st.floats(-10, 10)))
    n_rows = data.draw(st.integers(0, 6))
    for _ in range(n_rows):
        terms = [
            (v, data.draw(st.floats(-5, 5)))
            for v in data.draw(
                st.lists(st.integers(0, rng_n - 1), min_size=1, max_size=4, unique=True)
            )
        ]
        sense = data.draw(st.sampled_from(["<=", ">=", "="]))
        m.add_constraint(terms, sense, data.draw(st.floats(-20, 20)), tag="tag")
    parsed = parse_lp(emit_lp(m))
    a, b = model_matrices(m), model_matrices(parsed)
    assert np.allclose(a.c, b.c)
    assert (a.a != b.a).nnz == 0
    assert np.allclose(a.row_lb, b.row_lb) and np.allclose(a.row_ub, b.row_ub)
    assert np.allclose(a.lb, b.lb) and np.allclose(a.ub, b.ub)
    assert np.array_equal(a.integrality, b.integrality)


@pytest.mark.parametrize("backend", BACKENDS)
def test_backends_agree_on_small_mip(backend):
    m = MilpModel()
    xs = [m.binary(f"x{i}") for i in range(6)]
    weights = [3, 5, 7, 2, 4, 6]
    values = [4, 6, 9, 2, 5, 7]
    m.add_constraint([(x, float(w)) for x, w in zip(xs, weights)], "<=", 12.0)
    for x, v in zip(xs, values):
        m.objective_add(x, -float(v))
    sol = solve(m, BackendConfig(backend=backend, time_limit=60))
    assert sol.status == OPTIMAL
    # exhaustive enumeration of the 2^6 assignments gives optimum 15
    assert sol.objective == pytest.approx(-15.0, abs=1e-6)
