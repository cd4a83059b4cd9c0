"""Solver-agnostic construction of mixed-integer linear programs.

A :class:`MilpModel` is a plain registry of typed variables, linear
constraints and a minimization objective.  It knows nothing about any
solver; backends (see :mod:`restoplan.backends`) consume either the
in-memory matrices or the LP-format text produced by :func:`emit_lp`.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

CONTINUOUS = "continuous"
BINARY = "binary"
INTEGER = "integer"

_KINDS = (CONTINUOUS, BINARY, INTEGER)
_SENSES = ("<=", ">=", "=")

#: magnitude treated as infinity in LP text
LP_INF = 1e30


class ModelError(ValueError):
    """Raised on malformed variables or constraints."""


@dataclass(frozen=True)
class VarSpec:
    """Declaration of a single decision variable."""

    name: str
    kind: str = CONTINUOUS
    lower: float = 0.0
    upper: float = math.inf


@dataclass(frozen=True)
class Constraint:
    """A linear constraint ``sum(coef * var) sense rhs``.

    ``terms`` holds (VarId, coefficient) pairs with no duplicate ids;
    ``tag`` carries the equation label used for cross-referencing.
    """

    terms: tuple[tuple[int, float], ...]
    sense: str
    rhs: float
    tag: str = ""


@dataclass
class MilpModel:
    name: str = "model"
    variables: list[VarSpec] = field(default_factory=list)
    constraints: list[Constraint] = field(default_factory=list)
    objective: dict[int, float] = field(default_factory=dict)

    # -- variables ---------------------------------------------------

    def add_variable(self, spec: VarSpec) -> int:
        """Register ``spec`` and return its fresh VarId."""
        if spec.kind not in _KINDS:
            raise ModelError(f"unknown variable kind {spec.kind!r}")
        lower, upper = spec.lower, spec.upper
        if spec.kind == BINARY:
            lower = 0.0 if spec.lower == 0.0 else spec.lower
            upper = 1.0 if spec.upper == math.inf else spec.upper
            if lower < 0 or upper > 1:
                raise ModelError(f"binary {spec.name!r} must stay within [0, 1]")
            spec = VarSpec(spec.name, BINARY, lower, upper)
        if math.isnan(lower) or math.isnan(upper) or lower > upper:
            raise ModelError(
                f"invalid bounds [{spec.lower}, {spec.upper}] for {spec.name!r}"
            )
        self.variables.append(spec)
        return len(self.variables) - 1

    def binary(self, name: str) -> int:
        return self.add_variable(VarSpec(name, BINARY, 0.0, 1.0))

    def integer(self, name: str, lower: float, upper: float) -> int:
        return self.add_variable(VarSpec(name, INTEGER, lower, upper))

    def continuous(
        self, name: str, lower: float = 0.0, upper: float = math.inf
    ) -> int:
        return self.add_variable(VarSpec(name, CONTINUOUS, lower, upper))

    def fix(self, vid: int, value: float) -> None:
        """Pin a variable by collapsing its bounds."""
        spec = self.variables[vid]
        self.variables[vid] = VarSpec(spec.name, spec.kind, value, value)

    @property
    def num_variables(self) -> int:
        return len(self.variables)

    # -- constraints -------------------------------------------------

    def add_constraint(self, terms, sense: str, rhs: float, tag: str = "") -> int:
        """Store a constraint; returns its ConId (index).

        Duplicate VarIds in ``terms`` are merged; zero coefficients are
        dropped.  Foreign VarIds and non-finite data are rejected.
        """
        if sense not in _SENSES:
            raise ModelError(f"unknown sense {sense!r}")
        if not math.isfinite(rhs):
            raise ModelError(f"non-finite rhs {rhs!r}")
        merged: dict[int, float] = {}
        for vid, coef in terms:
            if not isinstance(vid, int) or vid < 0 or vid >= len(self.variables):
                raise ModelError(f"constraint references foreign VarId {vid!r}")
            if not math.isfinite(coef):
                raise ModelError(
                    f"non-finite coefficient {coef!r} on {self.variables[vid].name}"
                )
            merged[vid] = merged.get(vid, 0.0) + coef
        folded = tuple((vid, c) for vid, c in merged.items() if c != 0.0)
        self.constraints.append(Constraint(folded, sense, float(rhs), tag))
        return len(self.constraints) - 1

    def add_range(self, terms, lower_rhs: float, upper_rhs: float, tag: str = ""):
        """Emit the pair ``lower_rhs <= expr <= upper_rhs`` as two rows."""
        terms = list(terms)
        lo = self.add_constraint(terms, ">=", lower_rhs, tag)
        hi = self.add_constraint(terms, "<=", upper_rhs, tag)
        return lo, hi

    def add_circle_cap(
        self,
        x: int,
        y: int,
        cap: float,
        segments: int = 12,
        gate: int | None = None,
        tag: str = "cone",
    ) -> list[int]:
        """Outer polygonal approximation of ``x**2 + y**2 <= cap**2``.

        Adds one tangent half-plane per segment angle: cos(theta)*x +
        sin(theta)*y <= cap.  Points accepted by all half-planes lie
        within radius cap / cos(pi/segments).  When ``gate`` is given
        (a binary VarId), the right-hand side becomes cap * gate so the
        disc collapses to the origin when the gate is 0.
        """
        if segments < 4 or segments % 2:
            raise ModelError("segments must be an even integer >= 4")
        if cap <= 0:
            raise ModelError("cap must be positive")
        ids = []
        for k in range(segments):
            theta = 2.0 * math.pi * k / segments
            cx, sy = math.cos(theta), math.sin(theta)
            # snap values like cos(pi/2) ~ 6e-17 so axis cuts are exact
            if abs(cx) < 1e-15:
                cx = 0.0
            if abs(sy) < 1e-15:
                sy = 0.0
            terms = [(x, cx), (y, sy)]
            if gate is None:
                ids.append(self.add_constraint(terms, "<=", cap, tag))
            else:
                terms.append((gate, -cap))
                ids.append(self.add_constraint(terms, "<=", 0.0, tag))
        return ids

    # -- objective ---------------------------------------------------

    def objective_add(self, vid: int, coef: float) -> None:
        """Accumulate ``coef * var`` into the minimization objective."""
        if vid < 0 or vid >= len(self.variables):
            raise ModelError(f"objective references foreign VarId {vid!r}")
        if not math.isfinite(coef):
            raise ModelError(f"non-finite objective coefficient {coef!r}")
        self.objective[vid] = self.objective.get(vid, 0.0) + coef

    # -- inspection --------------------------------------------------

    def tag_counts(self) -> Counter:
        """Constraint count per equation tag (cross-reference listing)."""
        return Counter(c.tag for c in self.constraints if c.tag)

    def constraints_tagged(self, tag: str) -> list[Constraint]:
        return [c for c in self.constraints if c.tag == tag]

    def validate(self) -> list[str]:
        """Static sanity findings (empty model stays legal to build)."""
        findings = []
        for idx, con in enumerate(self.constraints):
            if not con.terms:
                ok = (
                    (con.sense == "<=" and 0.0 <= con.rhs)
                    or (con.sense == ">=" and 0.0 >= con.rhs)
                    or (con.sense == "=" and con.rhs == 0.0)
                )
                if not ok:
                    findings.append(
                        f"constraint {idx} ({con.tag or 'untagged'}) is "
                        f"trivially infeasible: 0 {con.sense} {con.rhs}"
                    )
        for vid, spec in enumerate(self.variables):
            if spec.lower > spec.upper:
                findings.append(f"variable {vid} ({spec.name}) has empty domain")
        return findings


# -- LP format emission ----------------------------------------------


def _num(x: float) -> str:
    """Deterministic shortest-roundtrip literal; infinities become 1e30."""
    if x == math.inf:
        return "1e+30"
    if x == -math.inf:
        return "-1e+30"
    if x == 0.0:
        return "0"
    return repr(float(x))


def _terms_text(terms) -> str:
    parts = []
    for vid, coef in terms:
        sign = "-" if coef < 0 else "+"
        parts.append(f"{sign} {_num(abs(coef))} v{vid}")
    return " ".join(parts) if parts else "+ 0 v0"


def _wrap(prefix: str, body: str, width: int = 200) -> str:
    tokens = body.split(" ")
    lines, cur = [], prefix
    for tok in tokens:
        if len(cur) + 1 + len(tok) > width and cur != prefix:
            lines.append(cur)
            cur = " " + tok
        else:
            cur += " " + tok
    lines.append(cur)
    return "\n".join(lines)


def emit_lp(model: MilpModel) -> str:
    """Render the model as deterministic LP-format text.

    Variables are named ``v<id>`` in id order; constraint labels carry
    the equation tag.  Emitting the same model twice yields identical
    bytes.
    """
    if not model.variables:
        raise ModelError("cannot emit an empty model")
    out = [f"\\ restoplan model: {model.name}", "Minimize"]
    obj = sorted(model.objective.items())
    out.append(_wrap(" obj:", _terms_text(obj)))
    out.append("Subject To")
    for idx, con in enumerate(model.constraints):
        label = f"c{idx}_{con.tag}" if con.tag else f"c{idx}"
        sense = {"<=": "<=", ">=": ">=", "=": "="}[con.sense]
        body = f"{_terms_text(sorted(con.terms))} {sense} {_num(con.rhs)}"
        out.append(_wrap(f" {label}:", body))
    out.append("Bounds")
    for vid, spec in enumerate(model.variables):
        if spec.kind == BINARY:
            if (spec.lower, spec.upper) != (0.0, 1.0):
                out.append(f" {_num(spec.lower)} <= v{vid} <= {_num(spec.upper)}")
            continue
        out.append(f" {_num(spec.lower)} <= v{vid} <= {_num(spec.upper)}")
    generals = [vid for vid, s in enumerate(model.variables) if s.kind == INTEGER]
    if generals:
        out.append("Generals")
        out.append(_wrap(" ", " ".join(f"v{vid}" for vid in generals)))
    binaries = [vid for vid, s in enumerate(model.variables) if s.kind == BINARY]
    if binaries:
        out.append("Binaries")
        out.append(_wrap(" ", " ".join(f"v{vid}" for vid in binaries)))
    out.append("End")
    return "\n".join(out) + "\n"
