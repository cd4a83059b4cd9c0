"""Decision-dependent customer interruption cost (CIC) surrogate.

The increasing rate of CIC ($/kWh) is modeled as a concave quadratic in
the elapsed interruption duration.  This module fits that quadratic from
survey-style samples, evaluates it closed-form (the oracle the MILP must
reproduce), and emits the MILP constraint block: the duration counter,
the clamped rate surrogate, the exact binary-decomposition of the
squared counter and the McCormick tightening cut.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from .milp import MilpModel

if TYPE_CHECKING:
    from .netdata import Scenario


@dataclass(frozen=True)
class CicProfile:
    """Quadratic rate coefficients for one customer class.

    ``rate(d) = a*d**2 + b*d + c`` with ``d`` the interruption duration
    in hours; ``a`` is negative (the marginal cost of one more hour
    eventually flattens) and ``c`` is the rate at zero duration.
    """

    key: str
    a: float
    b: float
    c: float
    fit_r2: float = float("nan")

    def __post_init__(self):
        if not self.a < 0:
            raise ValueError(f"profile {self.key!r}: quadratic term must be negative")
        if self.c < 0:
            raise ValueError(f"profile {self.key!r}: rate at zero duration must be >= 0")

    def quad(self, hours: float) -> float:
        return self.a * hours * hours + self.b * hours + self.c


def fit_quadratic_rate(samples, key: str = "fitted") -> CicProfile:
    """Ordinary least squares quadratic through (cid_hours, rate) samples.

    Raises ``ValueError`` for a rank-deficient design (fewer than three
    distinct duration values).
    """
    pts = [(float(d), float(r)) for d, r in samples]
    if len({d for d, _ in pts}) < 3:
        raise ValueError("need samples at >= 3 distinct duration values")
    d = np.array([p[0] for p in pts])
    r = np.array([p[1] for p in pts])
    design = np.column_stack([d * d, d, np.ones_like(d)])
    coef, *_ = np.linalg.lstsq(design, r, rcond=None)
    fitted = design @ coef
    ss_res = float(np.sum((r - fitted) ** 2))
    ss_tot = float(np.sum((r - r.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return CicProfile(key, float(coef[0]), float(coef[1]), float(coef[2]), r2)


def synthetic_rate_samples(
    cumulative_cubic: tuple[float, float, float],
    cids_hours,
    noise_std: float = 0.0,
    rng: np.random.Generator | None = None,
):
    """Rate samples derived from a monotone cumulative-cost cubic.

    ``cumulative_cubic = (k3, k2, k1)`` models total cost k3*d^3 + k2*d^2
    + k1*d; the sampled rate is its analytic derivative, optionally with
    zero-mean Gaussian noise.  Stands in for survey data, which is out
    of scope here.
    """
    k3, k2, k1 = cumulative_cubic
    rng = rng or np.random.default_rng(0)
    out = []
    for d in cids_hours:
        rate = 3.0 * k3 * d * d + 2.0 * k2 * d + k1
        if noise_std:
            rate += rng.normal(0.0, noise_std)
        out.append((float(d), float(rate)))
    return out


def cumulative_cubic_from_rate(a: float, b: float, c: float):
    """Inverse of :func:`synthetic_rate_samples`: cubic whose derivative
    is the rate quadratic (a, b, c)."""
    return (a / 3.0, b / 2.0, c)


def rate_oracle(profile: CicProfile, alpha: int, dt: float, eps: float) -> float:
    """Clamped rate the MILP must reproduce while a load is interrupted.

    ``alpha`` counts elapsed spans, ``dt`` is the span length in hours.
    Past the quadratic's positive root the rate would go negative; it is
    held at ``eps`` instead (small but nonzero, so restoring remains
    worthwhile).
    """
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    if eps <= 0:
        raise ValueError("eps must be positive")
    return max(eps, profile.quad(alpha * dt))


def alpha_series(initial_cid: int, restore_span: int | None, horizon: int) -> list[int]:
    """CID counter per span: +1 while interrupted, 0 from restoration on."""
    out = []
    alpha = initial_cid
    for t in range(1, horizon + 1):
        if restore_span is not None and t >= restore_span:
            alpha = 0
        else:
            alpha += 1
        out.append(alpha)
    return out


def cumulative_cic_oracle(scenario: "Scenario", restore_span: dict) -> float:
    """Total CIC ($) of a fixed restoration schedule.

    ``restore_span`` maps load node -> first restored span (None =
    never restored within the horizon).  Independent evaluation of the
    objective's CIC term: sum over spans of p_L * rate * dt while each
    load stays interrupted.
    """
    dt = scenario.span_hours
    total = 0.0
    for load in scenario.loads:
        if not load.initially_interrupted:
            continue
        profile = scenario.cic_profiles[load.customer_class]
        rs = restore_span.get(load.node)
        for t, alpha in enumerate(alpha_series(load.initial_cid, rs, scenario.horizon_spans), start=1):
            if rs is not None and t >= rs:
                continue
            rate = rate_oracle(profile, alpha, dt, scenario.epsilon_rate)
            total += load.p(t) * rate * dt
    return total


# -- MILP emission (duration counter, rate surrogate, exact square) ----


def nbits(bound: int) -> int:
    """Bits needed to represent every integer in [0, bound]."""
    return max(1, int(bound).bit_length())


@dataclass
class CicVariables:
    """VarId registry for the CIC block, keyed by (load node, span)."""

    loads: list = field(default_factory=list)
    alpha0: dict = field(default_factory=dict)
    delta: dict = field(default_factory=dict)
    alpha: dict = field(default_factory=dict)
    rate: dict = field(default_factory=dict)
    beta: dict = field(default_factory=dict)
    bits: dict = field(default_factory=dict)  # (k, node, span) -> VarId
    z: dict = field(default_factory=dict)  # (k, node, span) -> VarId
    n_bits: int = 0
    rate_bound: dict = field(default_factory=dict)  # class -> big-M on the rate


def rate_upper_bound(profile: CicProfile, alpha_max: int, dt: float, eps: float) -> float:
    """Tight big-M for the rate: max clamped rate over feasible counters."""
    return max(rate_oracle(profile, a, dt, eps) for a in range(alpha_max + 1))


def emit_cic_constraints(
    model: MilpModel, scenario: "Scenario", cuts: bool = True
) -> CicVariables:
    """Emit the CIC block for every initially interrupted load.

    Per load and span: the interruption counter pair (tags eq1a/eq1b),
    the restored-rate cap and epsilon floor (eq2a/eq2c), the linearized
    quadratic lower bound (eq4), the bit decomposition of the counter
    with its exact square (eq3a-eq3d) and the McCormick cut (eq5).

    The quadratic bound is emitted one-sided: together with the
    objective's minimization pressure it pins the rate to
    max(quadratic, eps), which a two-sided form could not represent
    once the quadratic dips below eps.
    """
    spans = range(1, scenario.horizon_spans + 1)
    amax = scenario.alpha_max
    dt = scenario.span_hours
    eps = scenario.epsilon_rate
    reg = CicVariables(n_bits=nbits(amax))
    for load in scenario.loads:
        if not load.initially_interrupted:
            continue
        need = load.initial_cid + scenario.horizon_spans
        if amax < need:
            raise ValueError(
                f"alpha_max={amax} cannot bound initial CID + horizon ({need}) "
                f"for load {load.node}"
            )
        reg.loads.append(load)
        profile = scenario.cic_profiles[load.customer_class]
        if load.customer_class not in reg.rate_bound:
            reg.rate_bound[load.customer_class] = rate_upper_bound(profile, amax, dt, eps)
        m_rate = reg.rate_bound[load.customer_class]
        i = load.node
        reg.alpha0[i] = load.initial_cid
        m_counter = amax + 1
        for t in spans:
            d = model.binary(f"delta[{i},{t}]")
            a = model.integer(f"alpha[{i},{t}]", 0, amax)
            rate = model.continuous(f"Afun[{i},{t}]", 0.0, m_rate)
            beta = model.continuous(f"beta[{i},{t}]", 0.0, amax * amax)
            reg.delta[i, t] = d
            reg.alpha[i, t] = a
            reg.rate[i, t] = rate
            reg.beta[i, t] = beta

            # counter recurrence: alpha_t = alpha_{t-1} + 1 while interrupted
            prev = [] if t == 1 else [(reg.alpha[i, t - 1], -1.0)]
            prev_const = load.initial_cid if t == 1 else 0
            model.add_constraint([(a, 1.0), *prev], "<=", 1 + prev_const, "eq1a")
            model.add_constraint(
                [(a, 1.0), *prev, (d, float(m_counter))], ">=", 1 + prev_const, "eq1a"
            )
            model.add_constraint([(a, 1.0), (d, amax)], "<=", amax, "eq1b")

            # rate vanishes once restored, floors at eps while interrupted
            model.add_constraint([(rate, 1.0), (d, m_rate)], "<=", m_rate, "eq2a")
            model.add_constraint([(rate, 1.0), (d, eps)], ">=", eps, "eq2c")
            # linearized quadratic lower bound (minimization makes it tight)
            model.add_constraint(
                [
                    (rate, 1.0),
                    (beta, -profile.a * dt * dt),
                    (a, -profile.b * dt),
                    (d, m_rate),
                ],
                ">=",
                profile.c,
                "eq4",
            )

            # exact square via bit decomposition of the counter
            bit_terms, z_terms = [], []
            for k in range(reg.n_bits):
                lam = model.binary(f"lam_a[{k},{i},{t}]")
                z = model.continuous(f"z_a[{k},{i},{t}]", 0.0, float(amax))
                reg.bits[k, i, t] = lam
                reg.z[k, i, t] = z
                model.add_constraint(
                    [(z, 1.0), (a, -1.0), (lam, -amax)], ">=", -amax, "eq3b"
                )
                model.add_constraint([(z, 1.0), (a, -1.0)], "<=", 0.0, "eq3b")
                model.add_constraint([(z, 1.0), (lam, -amax)], "<=", 0.0, "eq3c")
                bit_terms.append((lam, float(2**k)))
                z_terms.append((z, float(2**k)))
            model.add_constraint([(a, -1.0), *bit_terms], "=", 0.0, "eq3a")
            model.add_constraint([(beta, -1.0), *z_terms], "=", 0.0, "eq3d")

            if cuts:
                model.add_constraint(
                    [(beta, 1.0), (a, -2.0 * amax)], ">=", -float(amax * amax), "eq5"
                )
    return reg
