import math
from dataclasses import replace

import numpy as np
import pytest

from restoplan.backends import BackendConfig, solve
from restoplan.cic import (
    CicProfile,
    alpha_series,
    cumulative_cic_oracle,
    emit_cic_constraints,
    fit_quadratic_rate,
    nbits,
    rate_oracle,
    synthetic_rate_samples,
    cumulative_cubic_from_rate,
)
from restoplan.milp import MilpModel
from restoplan.netdata import builtin_case33, Fleet, LoadPoint, Node, Branch, Scenario


def normal_equations_fit(samples):
    """Independent 3x3 normal-equations solve (Cramer's rule)."""
    s = [0.0] * 5
    t = [0.0] * 3
    for d, r in samples:
        for k in range(5):
            s[k] += d**k
        for k in range(3):
            t[k] += r * d**k
    # rows ordered for coefficients (a, b, c) of a*d^2 + b*d + c
    mat = [
        [s[4], s[3], s[2]],
        [s[3], s[2], s[1]],
        [s[2], s[1], s[0]],
    ]
    rhs = [t[2], t[1], t[0]]

    def det3(m):
        return (
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        )

    d0 = det3(mat)
    out = []
    for col in range(3):
        m2 = [row[:] for row in mat]
        for r in range(3):
            m2[r][col] = rhs[r]
        out.append(det3(m2) / d0)
    return tuple(out)


def test_fit_exact_quadratic():
    samples = [(d, -2.0 * d * d + 8.0 * d + 10.0) for d in (0, 1, 2, 4, 8, 12)]
    p = fit_quadratic_rate(samples)
    assert p.a == pytest.approx(-2.0, abs=1e-9)
    assert p.b == pytest.approx(8.0, abs=1e-9)
    assert p.c == pytest.approx(10.0, abs=1e-9)
    assert p.fit_r2 == pytest.approx(1.0, abs=1e-12)


def test_fit_noisy_matches_normal_equations_oracle():
    rng = np.random.default_rng(7)
    cubic = cumulative_cubic_from_rate(-2.0, 8.0, 10.0)
    samples = synthetic_rate_samples(cubic, np.linspace(0.0, 12.0, 25), 0.5, rng)
    p = fit_quadratic_rate(samples)
    a, b, c = normal_equations_fit(samples)
    assert p.a == pytest.approx(a, abs=1e-8)
    assert p.b == pytest.approx(b, abs=1e-8)
    assert p.c == pytest.approx(c, abs=1e-8)
    assert p.fit_r2 < 1.0


def test_fit_rank_deficient():
    with pytest.raises(ValueError):
        fit_quadratic_rate([(1.0, 2.0), (1.0, 2.1), (2.0, 3.0)])


def test_profile_invariants():
    with pytest.raises(ValueError):
        CicProfile("bad", a=0.1, b=1.0, c=1.0)
    with pytest.raises(ValueError):
        CicProfile("bad", a=-0.1, b=1.0, c=-1.0)


def test_rate_oracle_zero_duration_returns_intercept():
    p = CicProfile("p", -2.0, 8.0, 10.0)
    assert rate_oracle(p, 0, 0.5, 1e-3) == pytest.approx(10.0)


def test_rate_oracle_direct_arithmetic():
    p = CicProfile("p", -2.0, 8.0, 10.0)
    # alpha=4 spans at 0.5 h/span: -2*4 + 8*2 + 10 = 18
    assert rate_oracle(p, 4, 0.5, 1e-3) == pytest.approx(18.0)


def test_rate_oracle_clamps_past_positive_root():
    # quadratic crosses zero exactly at a 16-hour interruption
    p = CicProfile("ci", -0.5, 7.0, 16.0)
    root = (-7.0 - math.sqrt(49.0 + 4.0 * 0.5 * 16.0)) / (2.0 * -0.5)
    assert root == pytest.approx(16.0)
    assert rate_oracle(p, 34, 0.5, 1e-3) == pytest.approx(1e-3)  # 17 h
    assert rate_oracle(p, 30, 0.5, 1e-3) > 1e-3  # 15 h still on the curve


def _single_load_scenario(horizon, alpha0=0, p_kw=100.0, profile=None):
    profile = profile or CicProfile("cls", -2.0, 8.0, 10.0)
    from restoplan.netdata import default_clpu_profiles

    return Scenario(
        name="single",
        nodes=(Node(1), Node(2)),
        branches=(Branch("1-2", 1, 2, 0.001, 0.001, 10.0),),
        horizon_spans=horizon,
        span_hours=0.5,
        damage_timeline=(),
        loads=(
            LoadPoint(
                node=2,
                base_p=(p_kw,) * horizon,
                customer_class="cls",
                initially_interrupted=True,
                initial_cid=alpha0,
            ),
        ),
        fleet=Fleet(),
        generators=(),
        substation_node=1,
        alpha_max=horizon + max(alpha0, 1) + 1,
        cic_profiles={"cls": profile},
        clpu_profiles={"cls": default_clpu_profiles(0.5)["residential"]},
    )


def test_alpha_series_recurrence():
    assert alpha_series(1, None, 4) == [2, 3, 4, 5]
    assert alpha_series(1, 3, 5) == [2, 3, 0, 0, 0]
    assert alpha_series(0, 1, 3) == [0, 0, 0]


def test_cumulative_oracle_restored_immediately_is_zero():
    s = _single_load_scenario(3, alpha0=0)
    assert cumulative_cic_oracle(s, {2: 1}) == pytest.approx(0.0)


def test_cumulative_oracle_hand_arithmetic():
    # 100 kW, never restored, T=2, dt=0.5, alpha0=0, profile (-2, 8, 10):
    # span 1: alpha=1, rate q(0.5) = 13.5; span 2: alpha=2, rate q(1.0) = 16
    # total = 100 * (13.5 + 16) * 0.5 = 1475
    s = _single_load_scenario(2, alpha0=0)
    got = cumulative_cic_oracle(s, {2: None})
    assert got == pytest.approx(100.0 * (13.5 + 16.0) * 0.5)
    assert got == pytest.approx(1475.0)


def test_emission_counts_single_load():
    s = _single_load_scenario(4, alpha0=0)
    s = replace(s, alpha_max=8)
    m = MilpModel()
    emit_cic_constraints(m, s)
    counts = m.tag_counts()
    assert nbits(8) == 4
    assert counts["eq1a"] == 2 * 4  # recurrence pair per span
    assert counts["eq1b"] == 4
    assert counts["eq2a"] == 4
    assert counts["eq2c"] == 4
    assert counts["eq4"] == 4
    assert counts["eq3b"] == 2 * 4 * 4  # pair per bit per span
    assert counts["eq3c"] == 4 * 4
    assert counts["eq3a"] == 4
    assert counts["eq3d"] == 4
    assert counts["eq5"] == 4


def test_emission_rejects_small_alpha_max():
    s = _single_load_scenario(4, alpha0=3)
    s = replace(s, alpha_max=5)
    with pytest.raises(ValueError):
        emit_cic_constraints(MilpModel(), s)


def _solve_cic_subsystem(scenario, delta_schedule):
    """Fix the restoration flags and minimize the rate variables."""
    m = MilpModel()
    reg = emit_cic_constraints(m, scenario)
    load = scenario.loads[0]
    for t, val in enumerate(delta_schedule, start=1):
        m.fix(reg.delta[load.node, t], float(val))
        m.objective_add(reg.rate[load.node, t], 1.0)
    sol = solve(m, BackendConfig(time_limit=60))
    assert sol.status == "optimal"
    return reg, sol


def test_counter_and_square_track_interruption():
    s = _single_load_scenario(4, alpha0=1)
    reg, sol = _solve_cic_subsystem(s, [0, 0, 0, 0])
    for t in range(1, 5):
        assert sol.value(reg.alpha[2, t]) == pytest.approx(1 + t, abs=1e-6)
        assert sol.value(reg.beta[2, t]) == pytest.approx((1 + t) ** 2, abs=1e-5)


def test_restored_load_accrues_nothing():
    s = _single_load_scenario(3, alpha0=1)
    reg, sol = _solve_cic_subsystem(s, [1, 1, 1])
    for t in range(1, 4):
        assert sol.value(reg.alpha[2, t]) == pytest.approx(0.0, abs=1e-6)
        assert sol.value(reg.rate[2, t]) == pytest.approx(0.0, abs=1e-8)


def test_solved_rates_match_oracle_with_clamp():
    # 36 spans at 0.5h pushes the CID to 18h, past the 16h root
    profile = CicProfile("ci", -0.5, 7.0, 16.0)
    s = _single_load_scenario(36, alpha0=0, profile=profile)
    reg, sol = _solve_cic_subsystem(s, [0] * 36)
    for t in range(1, 37):
        expected = rate_oracle(profile, t, 0.5, s.epsilon_rate)
        assert sol.value(reg.rate[2, t]) == pytest.approx(expected, abs=1e-5)
    # explicitly: the clamp is active for CID > 16 h
    assert sol.value(reg.rate[2, 36]) == pytest.approx(s.epsilon_rate, abs=1e-7)


def test_case33_objective_cic_term_matches_oracle_for_fixed_schedule():
    s = builtin_case33()
    restore = {ld.node: min(3 + (ld.node % 5), s.horizon_spans) for ld in s.interrupted_loads()}
    total = cumulative_cic_oracle(s, restore)
    # replay: the oracle is additive over loads and spans
    manual = 0.0
    for ld in s.interrupted_loads():
        prof = s.cic_profiles[ld.customer_class]
        alpha = ld.initial_cid
        for t in range(1, s.horizon_spans + 1):
            if t >= restore[ld.node]:
                break
            alpha += 1
            manual += ld.p(t) * rate_oracle(prof, alpha, 0.5, s.epsilon_rate) * 0.5
    assert total == pytest.approx(manual, rel=1e-12)
