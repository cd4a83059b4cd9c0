"""Decision-dependent cold load pickup (CLPU) surrogate.

After restoration a load draws a multiple of its normal power: a flat
peak, then a linear decay back to 1.  Peak magnitude, peak duration and
decay duration each follow a saturating linear function of the final
interruption duration.  This module holds those characteristic
functions, the closed-form curve oracle, and the MILP emission that
reconstructs the restored load exactly (segment selectors, duration
rounding windows, decay-rate products, phase flags and the linearized
load expression).

All quantities here are in span units; scenario files carry hours and
are converted on load (see :meth:`ClpuProfile.from_hours`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from .cic import nbits
from .milp import MilpModel

if TYPE_CHECKING:
    from .cic import CicVariables
    from .netdata import Scenario


@dataclass(frozen=True)
class Characteristic:
    """One saturating linear curve: slope * d + intercept, capped."""

    slope: float
    intercept: float
    knee: float  # saturation abscissa (spans)
    saturation: float

    def raw(self, d: float) -> float:
        return min(self.slope * d + self.intercept, self.saturation)


@dataclass(frozen=True)
class ClpuProfile:
    key: str
    peak_magnitude: Characteristic  # dimensionless multiple of normal load
    peak_duration: Characteristic  # spans (pre-rounding)
    decay_duration: Characteristic  # spans (pre-rounding)
    eps_pk: float = 0.5
    eps_dc: float = 0.5

    def __post_init__(self):
        for name, ch in (
            ("peak_magnitude", self.peak_magnitude),
            ("peak_duration", self.peak_duration),
            ("decay_duration", self.decay_duration),
        ):
            if ch.slope < 0 or ch.knee < 0:
                raise ValueError(f"{self.key}/{name}: slope and knee must be >= 0")
            cont = ch.slope * ch.knee + ch.intercept
            if abs(cont - ch.saturation) > 1e-6 * max(1.0, abs(ch.saturation)):
                raise ValueError(
                    f"{self.key}/{name}: saturation {ch.saturation} breaks "
                    f"continuity at the knee (expected {cont})"
                )
        if self.peak_magnitude.saturation < 1.0:
            raise ValueError(f"{self.key}: peak magnitude saturation must be >= 1")
        if not (0.0 < self.eps_pk < 1.0 and 0.0 < self.eps_dc < 1.0):
            raise ValueError(f"{self.key}: rounding thresholds must lie in (0, 1)")

    @classmethod
    def from_hours(cls, key: str, spec: dict, span_hours: float) -> "ClpuProfile":
        """Build from the scenario-file block (hour units).

        Magnitude slope is per hour of interruption; duration curves map
        hours to hours, so their slope is dimensionless while intercept,
        knee and saturation divide by the span length.
        """

        def char(block: dict, per_hour_value: bool) -> Characteristic:
            if per_hour_value:
                return Characteristic(
                    slope=block["slope_per_hour"] * span_hours,
                    intercept=block["intercept"],
                    knee=block["knee_hours"] / span_hours,
                    saturation=block["saturation"],
                )
            return Characteristic(
                slope=block["slope"],
                intercept=block["intercept_hours"] / span_hours,
                knee=block["knee_hours"] / span_hours,
                saturation=block["saturation_hours"] / span_hours,
            )

        return cls(
            key=key,
            peak_magnitude=char(spec["peak_magnitude"], True),
            peak_duration=char(spec["peak_duration"], False),
            decay_duration=char(spec["decay_duration"], False),
            eps_pk=spec.get("round_eps_pk", 0.5),
            eps_dc=spec.get("round_eps_dc", 0.5),
        )

    def to_hours(self, span_hours: float) -> dict:
        f, pk, dc = self.peak_magnitude, self.peak_duration, self.decay_duration
        return {
            "peak_magnitude": {
                "slope_per_hour": f.slope / span_hours,
                "intercept": f.intercept,
                "knee_hours": f.knee * span_hours,
                "saturation": f.saturation,
            },
            "peak_duration": {
                "slope": pk.slope,
                "intercept_hours": pk.intercept * span_hours,
                "knee_hours": pk.knee * span_hours,
                "saturation_hours": pk.saturation * span_hours,
            },
            "decay_duration": {
                "slope": dc.slope,
                "intercept_hours": dc.intercept * span_hours,
                "knee_hours": dc.knee * span_hours,
                "saturation_hours": dc.saturation * span_hours,
            },
            "round_eps_pk": self.eps_pk,
            "round_eps_dc": self.eps_dc,
        }


def threshold_round(value: float, eps: float) -> int:
    """Round down when the fractional part is below ``eps``, else up."""
    floor = math.floor(value)
    return floor if value - floor < eps else floor + 1


def degenerate_rounding_cids(profile: ClpuProfile, d_max: int) -> list[int]:
    """Integer durations whose raw duration lands exactly on a rounding
    threshold, where the MILP window admits two integers.  Scenario
    validation rejects profiles with such durations in range."""
    bad = []
    for d in range(d_max + 1):
        for ch, eps in (
            (profile.peak_duration, profile.eps_pk),
            (profile.decay_duration, profile.eps_dc),
        ):
            raw = ch.raw(d)
            frac = raw - math.floor(raw)
            if abs(frac - eps) < 1e-9:
                bad.append(d)
                break
    return bad


def characteristics_oracle(profile: ClpuProfile, d: int):
    """(F, D_pk, D_dc, delta_f) for a final interruption of ``d`` spans."""
    if d < 0:
        raise ValueError("interruption duration must be >= 0")
    f = profile.peak_magnitude.raw(d)
    d_pk = threshold_round(profile.peak_duration.raw(d), profile.eps_pk)
    d_dc = threshold_round(profile.decay_duration.raw(d), profile.eps_dc)
    delta_f = (f - 1.0) / d_dc if d_dc > 0 else 0.0
    return f, d_pk, d_dc, delta_f


@dataclass(frozen=True)
class ClpuCurve:
    """Load multiplier per span (index 0 = span 1)."""

    multipliers: np.ndarray
    f: float
    d_pk: int
    d_dc: int
    delta_f: float
    t1: int
    t2: int
    t3: int

    def multiplier(self, span: int) -> float:
        return float(self.multipliers[span - 1])


def curve_oracle(profile: ClpuProfile, d: int, t1: int, horizon: int) -> ClpuCurve:
    """Restored-load multiplier over the horizon.

    The load is off through span ``t1``, draws F times normal through
    ``t2 = t1 + D_pk``, decays linearly (evaluated mid-span) through
    ``t3 = t2 + D_dc`` and sits at 1 afterwards.
    """
    if not 0 <= t1 <= horizon:
        raise ValueError("restoration offset must lie within [0, horizon]")
    f, d_pk, d_dc, delta_f = characteristics_oracle(profile, d)
    t2, t3 = t1 + d_pk, t1 + d_pk + d_dc
    m = np.empty(horizon)
    for t in range(1, horizon + 1):
        if t <= t1:
            m[t - 1] = 0.0
        elif t <= t2:
            m[t - 1] = f
        elif t <= t3:
            m[t - 1] = f - (t - t2 - 0.5) * delta_f
        else:
            m[t - 1] = 1.0
    return ClpuCurve(m, f, d_pk, d_dc, delta_f, t1, t2, t3)


# -- MILP emission -----------------------------------------------------


@dataclass
class ClpuVariables:
    """VarId registry for the CLPU block (per load node / load-span)."""

    d_intr: dict = field(default_factory=dict)
    f: dict = field(default_factory=dict)
    d_pk: dict = field(default_factory=dict)
    d_dc: dict = field(default_factory=dict)
    kappa_f: dict = field(default_factory=dict)
    kappa_pk: dict = field(default_factory=dict)
    kappa_dc: dict = field(default_factory=dict)
    delta_f: dict = field(default_factory=dict)
    xi: dict = field(default_factory=dict)
    bits_dc: dict = field(default_factory=dict)  # (k, node)
    z_df: dict = field(default_factory=dict)  # (k, node)
    t1: dict = field(default_factory=dict)
    t2: dict = field(default_factory=dict)
    t3: dict = field(default_factory=dict)
    bits_t2: dict = field(default_factory=dict)  # (k, node)
    u1: dict = field(default_factory=dict)  # (node, span)
    u2: dict = field(default_factory=dict)
    u3: dict = field(default_factory=dict)
    w1: dict = field(default_factory=dict)
    w2: dict = field(default_factory=dict)
    w3: dict = field(default_factory=dict)
    w4: dict = field(default_factory=dict)
    z_w: dict = field(default_factory=dict)  # (k, node, span)
    p_load: dict = field(default_factory=dict)  # (node, span), kW
    q_load: dict = field(default_factory=dict)


def _emit_segment_selector(model, d_intr, kappa, knee, d_max, tag):
    """kappa = 1 iff d_intr < ceil(knee) (the pre-saturation branch)."""
    knee_ceil = math.ceil(knee - 1e-9)
    big_m = float(max(knee_ceil, d_max - knee_ceil + 1))
    model.add_constraint([(d_intr, 1.0), (kappa, big_m)], ">=", knee_ceil, tag)
    model.add_constraint(
        [(d_intr, 1.0), (kappa, big_m)], "<=", knee_ceil + big_m - 1, tag
    )


def emit_clpu_constraints(
    model: MilpModel,
    scenario: "Scenario",
    cic_vars: "CicVariables",
    cuts: bool = True,
) -> ClpuVariables:
    """Emit the CLPU block for every initially interrupted load.

    Consumes the restoration flags and initial durations registered by
    the CIC block; produces the reconstructed active/reactive load
    variables that the network balance equations consume.
    """
    horizon = scenario.horizon_spans
    spans = range(1, horizon + 1)
    reg = ClpuVariables()
    for load in cic_vars.loads:
        i = load.node
        profile = scenario.clpu_profiles.get(load.customer_class)
        if profile is None:
            raise ValueError(f"no CLPU profile for class {load.customer_class!r}")
        alpha0 = cic_vars.alpha0[i]
        d_max = horizon + alpha0
        f_hat = profile.peak_magnitude.saturation
        dpk_max = threshold_round(profile.peak_duration.saturation, profile.eps_pk)
        ddc_max = threshold_round(profile.decay_duration.saturation, profile.eps_dc)
        t2_bar = horizon + dpk_max
        t3_max = t2_bar + ddc_max
        w3_bar = max(f_hat - 1.0, 1e-9)  # worst-case decay rate (D_dc = 1)
        kd = nbits(ddc_max)
        kt = nbits(t2_bar)

        d_intr = model.integer(f"d_intr[{i}]", alpha0, d_max)
        f = model.continuous(f"F[{i}]", 0.0, f_hat)
        d_pk = model.integer(f"Dpk[{i}]", 0, dpk_max)
        d_dc = model.integer(f"Ddc[{i}]", 0, ddc_max)
        kap_f = model.binary(f"kapF[{i}]")
        kap_pk = model.binary(f"kapPk[{i}]")
        kap_dc = model.binary(f"kapDc[{i}]")
        dlt_f = model.continuous(f"dltF[{i}]", 0.0, w3_bar)
        xi = model.binary(f"xi[{i}]")
        t1 = model.integer(f"t1[{i}]", 0, horizon)
        t2 = model.integer(f"t2[{i}]", 0, t2_bar)
        t3 = model.integer(f"t3[{i}]", 0, t3_max)
        reg.d_intr[i], reg.f[i] = d_intr, f
        reg.d_pk[i], reg.d_dc[i] = d_pk, d_dc
        reg.kappa_f[i], reg.kappa_pk[i], reg.kappa_dc[i] = kap_f, kap_pk, kap_dc
        reg.delta_f[i], reg.xi[i] = dlt_f, xi
        reg.t1[i], reg.t2[i], reg.t3[i] = t1, t2, t3

        # final CID and restoration offset from the delta flags
        delta_terms = [(cic_vars.delta[i, t], 1.0) for t in spans]
        model.add_constraint(
            [(d_intr, 1.0), *delta_terms], "=", horizon + alpha0, "eq6"
        )
        model.add_constraint([(t1, 1.0), *delta_terms], "=", horizon, "eq12a")

        # peak magnitude: linear below the knee, saturated above
        ch_f = profile.peak_magnitude
        _emit_segment_selector(model, d_intr, kap_f, ch_f.knee, d_max, "eq7a")
        m7 = ch_f.slope * d_max + abs(ch_f.intercept) + f_hat
        model.add_constraint(
            [(f, 1.0), (d_intr, -ch_f.slope), (kap_f, m7)],
            "<=",
            ch_f.intercept + m7,
            "eq7b",
        )
        model.add_constraint(
            [(f, 1.0), (d_intr, -ch_f.slope), (kap_f, -m7)],
            ">=",
            ch_f.intercept - m7,
            "eq7b",
        )
        model.add_constraint([(f, 1.0)], "<=", f_hat, "eq7c")
        model.add_constraint([(f, 1.0), (kap_f, f_hat)], ">=", f_hat, "eq7c")

        # integer durations with the threshold-rounding windows
        for ch, eps, dvar, kap, dmax_i in (
            (profile.peak_duration, profile.eps_pk, d_pk, kap_pk, dpk_max),
            (profile.decay_duration, profile.eps_dc, d_dc, kap_dc, ddc_max),
        ):
            _emit_segment_selector(model, d_intr, kap, ch.knee, d_max, "eq8a")
            m8 = ch.slope * d_max + abs(ch.intercept) + dmax_i + 2.0
            model.add_constraint(
                [(dvar, 1.0), (d_intr, -ch.slope), (kap, m8)],
                "<=",
                ch.intercept + 1.0 - eps + m8,
                "eq8b",
            )
            model.add_constraint(
                [(dvar, 1.0), (d_intr, -ch.slope), (kap, -m8)],
                ">=",
                ch.intercept - eps - m8,
                "eq8c",
            )
            sat_round = threshold_round(ch.saturation, eps)
            model.add_constraint([(dvar, 1.0)], "<=", sat_round, "eq8d")
            model.add_constraint(
                [(dvar, 1.0), (kap, float(sat_round))], ">=", sat_round, "eq8d"
            )

        # decay-rate product: delta_f * D_dc = F - 1 whenever D_dc > 0
        bit_terms = []
        for k in range(kd):
            lam = model.binary(f"lamD[{k},{i}]")
            z = model.continuous(f"zDf[{k},{i}]", 0.0, w3_bar)
            reg.bits_dc[k, i] = lam
            reg.z_df[k, i] = z
            bit_terms.append((lam, float(2**k)))
            model.add_constraint([(xi, 1.0), (lam, -1.0)], ">=", 0.0, "eq10a")
            model.add_constraint(
                [(z, 1.0), (dlt_f, -1.0), (lam, -w3_bar)], ">=", -w3_bar, "eq11a"
            )
            model.add_constraint([(z, 1.0), (dlt_f, -1.0)], "<=", 0.0, "eq11a")
            model.add_constraint([(z, 1.0), (lam, -w3_bar)], "<=", 0.0, "eq11b")
        model.add_constraint([(d_dc, -1.0), *bit_terms], "=", 0.0, "eq9")
        model.add_constraint(
            [(xi, 1.0), *[(lam, -1.0) for lam, _ in bit_terms]], "<=", 0.0, "eq10b"
        )
        m11 = f_hat + (2.0**kd - 1.0) * w3_bar
        zsum = [(reg.z_df[k, i], float(2**k)) for k in range(kd)]
        model.add_constraint(
            [(f, 1.0), *[(z, -c) for z, c in zsum], (xi, m11)], "<=", 1.0 + m11, "eq11c"
        )
        model.add_constraint(
            [(f, 1.0), *[(z, -c) for z, c in zsum], (xi, -m11)], ">=", 1.0 - m11, "eq11c"
        )

        # phase timestamps and flags (u = 1 iff t >= timestamp + 1)
        model.add_constraint([(t2, 1.0), (t1, -1.0), (d_pk, -1.0)], "=", 0.0, "eq12b")
        model.add_constraint([(t3, 1.0), (t2, -1.0), (d_dc, -1.0)], "=", 0.0, "eq12c")
        m12 = float(max(horizon, t3_max + 1))
        t2_bits = []
        for k in range(kt):
            lam = model.binary(f"lamT[{k},{i}]")
            reg.bits_t2[k, i] = lam
            t2_bits.append((lam, float(2**k)))
        model.add_constraint([(t2, -1.0), *t2_bits], "=", 0.0, "eq15a")

        for t in spans:
            u1 = model.binary(f"u1[{i},{t}]")
            u2 = model.binary(f"u2[{i},{t}]")
            u3 = model.binary(f"u3[{i},{t}]")
            reg.u1[i, t], reg.u2[i, t], reg.u3[i, t] = u1, u2, u3
            for ts, u, tag in ((t1, u1, "eq12d"), (t2, u2, "eq12e"), (t3, u3, "eq12f")):
                model.add_constraint([(ts, 1.0), (u, m12)], ">=", float(t), tag)
                model.add_constraint(
                    [(ts, 1.0), (u, m12)], "<=", m12 + t - 1.0, tag
                )
            # valid tightenings: phases are ordered, and with monotone
            # restoration the first phase flag coincides with delta
            model.add_constraint([(u1, 1.0), (u2, -1.0)], ">=", 0.0, "link-uorder")
            model.add_constraint([(u2, 1.0), (u3, -1.0)], ">=", 0.0, "link-uorder")
            model.add_constraint(
                [(u1, 1.0), (cic_vars.delta[i, t], -1.0)], "=", 0.0, "link-u1"
            )

            w1 = model.continuous(f"W1[{i},{t}]", 0.0, f_hat)
            w2 = model.continuous(f"W2[{i},{t}]", 0.0, f_hat)
            w3 = model.continuous(f"W3[{i},{t}]", 0.0, w3_bar)
            w4 = model.continuous(f"W4[{i},{t}]", 0.0, t2_bar * w3_bar)
            reg.w1[i, t], reg.w2[i, t] = w1, w2
            reg.w3[i, t], reg.w4[i, t] = w3, w4
            # W1 = (u1-u2)*F, W2 = (u2-u3)*F, W3 = (u2-u3)*delta_f
            model.add_constraint([(w1, 1.0), (f, -1.0)], "<=", 0.0, "eq14a")
            model.add_constraint(
                [(w1, 1.0), (f, -1.0), (u1, -f_hat), (u2, f_hat)], ">=", -f_hat, "eq14a"
            )
            model.add_constraint(
                [(w1, 1.0), (u1, -f_hat), (u2, f_hat)], "<=", 0.0, "eq14b"
            )
            model.add_constraint([(w2, 1.0), (f, -1.0)], "<=", 0.0, "eq14c")
            model.add_constraint(
                [(w2, 1.0), (f, -1.0), (u2, -f_hat), (u3, f_hat)], ">=", -f_hat, "eq14c"
            )
            model.add_constraint(
                [(w2, 1.0), (u2, -f_hat), (u3, f_hat)], "<=", 0.0, "eq14d"
            )
            model.add_constraint([(w3, 1.0), (dlt_f, -1.0)], "<=", 0.0, "eq14e")
            model.add_constraint(
                [(w3, 1.0), (dlt_f, -1.0), (u2, -w3_bar), (u3, w3_bar)],
                ">=",
                -w3_bar,
                "eq14e",
            )
            model.add_constraint(
                [(w3, 1.0), (u2, -w3_bar), (u3, w3_bar)], "<=", 0.0, "eq14f"
            )

            # W4 = t2 * W3 through the t2 bits
            zw_terms = []
            for k in range(kt):
                zw = model.continuous(f"zW[{k},{i},{t}]", 0.0, w3_bar)
                reg.z_w[k, i, t] = zw
                lam = reg.bits_t2[k, i]
                zw_terms.append((zw, float(2**k)))
                model.add_constraint(
                    [(zw, 1.0), (w3, -1.0), (lam, -w3_bar)], ">=", -w3_bar, "eq15b"
                )
                model.add_constraint([(zw, 1.0), (w3, -1.0)], "<=", 0.0, "eq15b")
                model.add_constraint([(zw, 1.0), (lam, -w3_bar)], "<=", 0.0, "eq15c")
            model.add_constraint([(w4, -1.0), *zw_terms], "=", 0.0, "eq15d")
            if cuts:
                model.add_constraint(
                    [(w4, 1.0), (t2, -w3_bar), (w3, -float(t2_bar))],
                    ">=",
                    -t2_bar * w3_bar,
                    "eq16",
                )

            # reconstructed load (kW) and its reactive coupling
            pl = load.p(t)
            p_var = model.continuous(f"PL[{i},{t}]", 0.0, pl * f_hat)
            q_var = model.continuous(
                f"QL[{i},{t}]", 0.0, load.power_factor_coeff * pl * f_hat
            )
            reg.p_load[i, t] = p_var
            reg.q_load[i, t] = q_var
            model.add_constraint(
                [
                    (p_var, 1.0),
                    (w1, -pl),
                    (w2, -pl),
                    (w3, pl * (t - 0.5)),
                    (w4, -pl),
                    (u3, -pl),
                ],
                "=",
                0.0,
                "eq17",
            )
            model.add_constraint(
                [(q_var, 1.0), (p_var, -load.power_factor_coeff)], "=", 0.0, "eq20e"
            )
    return reg
