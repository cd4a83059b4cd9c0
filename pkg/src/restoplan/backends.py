"""Solver backends behind a single contract.

Three interchangeable backends solve a :class:`~restoplan.milp.MilpModel`:

``scipy``
    In-process HiGHS through :func:`scipy.optimize.milp`.
``glpk``
    In-process GLPK through ``cvxopt.glpk.ilp`` (optional dependency).
``process``
    The LP-file contract: emit LP text, invoke an external solver
    executable as ``<exe> <model.lp> <solution.json> --gap G
    --time-limit S`` and parse the JSON solution file it writes.  The
    bundled ``restoplan-solve`` console script implements the contract,
    so the process path works out of the box; any executable honoring
    the same file formats can be substituted (``--solver-exe`` /
    ``RESTOPLAN_SOLVER``).

Every accepted solution is re-checked against the stored constraints
(1e-6 absolute residual); a backend claiming optimality for a violating
point is downgraded to an error instead of being trusted.
"""

from __future__ import annotations

import json
import math
import os
import shutil
import subprocess
import sys
import tempfile
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.optimize import Bounds, LinearConstraint, milp

from .milp import BINARY, INTEGER, LP_INF, MilpModel, emit_lp

OPTIMAL = "optimal"
FEASIBLE = "feasible-with-gap"
INFEASIBLE = "infeasible"
ERROR = "error"

#: absolute residual accepted on any constraint of a returned solution
RESIDUAL_TOL = 1e-6

SOLVER_ENV_VAR = "RESTOPLAN_SOLVER"


class BackendUnavailable(RuntimeError):
    """The requested backend cannot run in this environment."""


@dataclass
class BackendConfig:
    backend: str = "scipy"
    gap: float = 1e-4
    time_limit: float = 1800.0
    solver_exe: str | None = None
    quiet: bool = True

    def resolve_exe(self) -> str:
        exe = self.solver_exe or os.environ.get(SOLVER_ENV_VAR)
        if exe is None:
            exe = shutil.which("restoplan-solve")
        if exe is None or (not os.path.exists(exe) and shutil.which(exe) is None):
            raise BackendUnavailable(
                "backend unavailable: no solver executable found "
                f"(set --solver-exe or ${SOLVER_ENV_VAR})"
            )
        return exe


@dataclass
class Solution:
    status: str
    objective: float | None = None
    gap: float | None = None
    values: np.ndarray | None = None
    detail: str = ""
    max_residual: float = 0.0

    @property
    def feasible(self) -> bool:
        return self.status in (OPTIMAL, FEASIBLE)

    def value(self, vid: int) -> float:
        if self.values is None:
            raise ValueError("solution carries no variable values")
        return float(self.values[vid])

    def __getitem__(self, vid: int) -> float:
        return self.value(vid)


@dataclass
class _Matrices:
    c: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    integrality: np.ndarray
    a: sparse.csr_matrix
    row_lb: np.ndarray
    row_ub: np.ndarray


def model_matrices(model: MilpModel) -> _Matrices:
    n = model.num_variables
    c = np.zeros(n)
    for vid, coef in model.objective.items():
        c[vid] = coef
    lb = np.array([s.lower for s in model.variables])
    ub = np.array([s.upper for s in model.variables])
    integrality = np.array(
        [0 if s.kind == "continuous" else 1 for s in model.variables]
    )
    rows, cols, vals = [], [], []
    m = len(model.constraints)
    row_lb = np.full(m, -np.inf)
    row_ub = np.full(m, np.inf)
    for i, con in enumerate(model.constraints):
        for vid, coef in con.terms:
            rows.append(i)
            cols.append(vid)
            vals.append(coef)
        if con.sense in ("=", ">="):
            row_lb[i] = con.rhs
        if con.sense in ("=", "<="):
            row_ub[i] = con.rhs
    a = sparse.csr_matrix(
        (vals, (rows, cols)), shape=(m, n), dtype=float
    )
    return _Matrices(c, lb, ub, integrality, a, row_lb, row_ub)


def constraint_residuals(mats: _Matrices, x: np.ndarray) -> np.ndarray:
    """Per-row violation (0 when satisfied) of A x within [row_lb, row_ub]."""
    ax = mats.a @ x
    below = np.maximum(mats.row_lb - ax, 0.0)
    above = np.maximum(ax - mats.row_ub, 0.0)
    return np.maximum(below, above)


def _finish(model: MilpModel, sol: Solution, mats: _Matrices | None = None) -> Solution:
    """Residual pass: never trust feasibility claims from the backend."""
    if not sol.feasible or sol.values is None:
        return sol
    if mats is None:
        mats = model_matrices(model)
    res = constraint_residuals(mats, sol.values)
    worst = float(res.max()) if res.size else 0.0
    sol.max_residual = worst
    if worst > RESIDUAL_TOL:
        idx = int(res.argmax())
        tag = model.constraints[idx].tag or f"c{idx}"
        return Solution(
            ERROR,
            detail=(
                f"backend returned a point violating constraint {idx} "
                f"({tag}) by {worst:.3e}"
            ),
            max_residual=worst,
        )
    if sol.objective is None:
        sol.objective = float(mats.c @ sol.values)
    return sol


# -- scipy / HiGHS ----------------------------------------------------


def _solve_scipy(model: MilpModel, cfg: BackendConfig) -> Solution:
    mats = model_matrices(model)
    bounds = Bounds(mats.lb, mats.ub)
    constraints = (
        LinearConstraint(mats.a, mats.row_lb, mats.row_ub)
        if len(model.constraints)
        else ()
    )
    options = {
        "disp": not cfg.quiet,
        "mip_rel_gap": cfg.gap,
        "time_limit": cfg.time_limit,
    }
    res = milp(
        c=mats.c,
        constraints=constraints,
        integrality=mats.integrality,
        bounds=bounds,
        options=options,
    )
    gap = getattr(res, "mip_gap", None)
    if res.status == 0:
        sol = Solution(OPTIMAL, float(res.fun), gap, res.x, res.message)
    elif res.status == 1 and res.x is not None:
        sol = Solution(FEASIBLE, float(res.fun), gap, res.x, res.message)
    elif res.status == 2:
        sol = Solution(INFEASIBLE, detail=res.message)
    elif res.status == 1:
        sol = Solution(ERROR, detail=f"limit reached with no incumbent: {res.message}")
    else:
        sol = Solution(ERROR, detail=res.message)
    return _finish(model, sol, mats)


# -- GLPK (cvxopt) ----------------------------------------------------


def _solve_glpk(model: MilpModel, cfg: BackendConfig) -> Solution:
    try:
        from cvxopt import glpk, matrix, spmatrix
    except ImportError as exc:  # pragma: no cover - depends on environment
        raise BackendUnavailable(f"backend unavailable: cvxopt/glpk ({exc})")

    n = model.num_variables
    c = matrix([float(model.objective.get(vid, 0.0)) for vid in range(n)])

    g_rows: list[tuple[list[float], list[int], float]] = []
    a_rows: list[tuple[list[float], list[int], float]] = []
    for con in model.constraints:
        coefs = [float(co) for _, co in con.terms]
        idx = [vid for vid, _ in con.terms]
        if con.sense == "<=":
            g_rows.append((coefs, idx, con.rhs))
        elif con.sense == ">=":
            g_rows.append(([-co for co in coefs], idx, -con.rhs))
        else:
            a_rows.append((coefs, idx, con.rhs))
    int_set, bin_set = set(), set()
    for vid, spec in enumerate(model.variables):
        if spec.kind == BINARY and (spec.lower, spec.upper) == (0.0, 1.0):
            bin_set.add(vid)
            continue
        if spec.kind in (BINARY, INTEGER):
            int_set.add(vid)
        if spec.lower > -math.inf:
            g_rows.append(([-1.0], [vid], -spec.lower))
        if spec.upper < math.inf:
            g_rows.append(([1.0], [vid], spec.upper))

    def build(rows):
        vals, ridx, cidx, rhs = [], [], [], []
        for r, (coefs, idx, b) in enumerate(rows):
            vals.extend(coefs)
            ridx.extend([r] * len(coefs))
            cidx.extend(idx)
            rhs.append(float(b))
        mat = spmatrix(vals, ridx, cidx, (len(rows), n)) if rows else None
        return mat, matrix(rhs) if rows else None

    gmat, h = build(g_rows)
    amat, b = build(a_rows)
    if gmat is None:  # glpk.ilp requires at least one inequality row
        gmat = spmatrix([0.0], [0], [0], (1, n))
        h = matrix([0.0])

    options = {
        "msg_lev": "GLP_MSG_OFF",
        "tm_lim": max(1, int(cfg.time_limit * 1000)),
        "mip_gap": float(cfg.gap),
        "presolve": "GLP_ON",
    }
    try:
        if amat is not None:
            status, x = glpk.ilp(
                c, gmat, h, amat, b, I=int_set, B=bin_set, options=options
            )
        else:
            status, x = glpk.ilp(c, gmat, h, I=int_set, B=bin_set, options=options)
    except ValueError as exc:
        return Solution(ERROR, detail=f"glpk rejected the model: {exc}")

    if x is not None:
        values = np.array(x).reshape(-1)
        obj = float(np.dot(values, np.asarray(c).reshape(-1)))
        mapped = OPTIMAL if status == "optimal" else FEASIBLE
        sol = Solution(mapped, obj, None if mapped == FEASIBLE else 0.0, values, status)
    elif "infeasible" in status:
        sol = Solution(INFEASIBLE, detail=status)
    else:
        sol = Solution(ERROR, detail=f"glpk status: {status}")
    return _finish(model, sol)


# -- external process over LP files ------------------------------------


def _solve_process(model: MilpModel, cfg: BackendConfig) -> Solution:
    exe = cfg.resolve_exe()
    with tempfile.TemporaryDirectory(prefix="restoplan-") as tmp:
        lp_path = os.path.join(tmp, "model.lp")
        sol_path = os.path.join(tmp, "solution.json")
        with open(lp_path, "w") as fh:
            fh.write(emit_lp(model))
        cmd = [
            exe,
            lp_path,
            sol_path,
            "--gap",
            repr(cfg.gap),
            "--time-limit",
            repr(cfg.time_limit),
        ]
        try:
            proc = subprocess.run(
                cmd,
                capture_output=True,
                text=True,
                timeout=cfg.time_limit + 300.0,
            )
        except (OSError, subprocess.TimeoutExpired) as exc:
            return Solution(ERROR, detail=f"backend unavailable: {exc}")
        if not os.path.exists(sol_path):
            return Solution(
                ERROR,
                detail=(
                    f"solver process wrote no solution file "
                    f"(rc={proc.returncode}): {proc.stderr[-500:]}"
                ),
            )
        with open(sol_path) as fh:
            payload = json.load(fh)
    status = payload.get("status", ERROR)
    values = None
    if payload.get("values") is not None:
        values = np.zeros(model.num_variables)
        for name, val in payload["values"].items():
            values[int(name[1:])] = float(val)
    sol = Solution(
        status,
        payload.get("objective"),
        payload.get("gap"),
        values,
        payload.get("detail", ""),
    )
    return _finish(model, sol)


_BACKENDS = {
    "scipy": _solve_scipy,
    "glpk": _solve_glpk,
    "process": _solve_process,
}


def available_backends() -> list[str]:
    names = ["scipy", "process"]
    try:
        import cvxopt.glpk  # noqa: F401

        names.insert(1, "glpk")
    except ImportError:
        pass
    return names


def solve(model: MilpModel, cfg: BackendConfig | None = None) -> Solution:
    """Solve the model with the configured backend.

    Accepted solutions always pass the built-in residual check; see the
    module docstring for the status contract.
    """
    cfg = cfg or BackendConfig()
    try:
        fn = _BACKENDS[cfg.backend]
    except KeyError:
        raise BackendUnavailable(
            f"backend unavailable: unknown backend {cfg.backend!r}"
        )
    return fn(model, cfg)


# -- LP text parsing (the dialect written by emit_lp) -------------------


def parse_lp(text: str) -> MilpModel:
    """Parse LP text produced by :func:`restoplan.milp.emit_lp`.

    Supports the emitter's normalized dialect: every term is written
    ``<sign> <coef> v<id>`` with spaces, sections in fixed order.
    """
    from .milp import Constraint, VarSpec

    section = None
    obj_tokens: list[str] = []
    row_chunks: list[list[str]] = []
    bound_tokens: list[str] = []
    generals: set[int] = set()
    binaries: set[int] = set()
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("\\"):
            continue
        word = line.lower()
        if word == "minimize":
            section = "obj"
            continue
        if word == "subject to":
            section = "rows"
            continue
        if word == "bounds":
            section = "bounds"
            continue
        if word == "generals":
            section = "generals"
            continue
        if word == "binaries":
            section = "binaries"
            continue
        if word == "end":
            break
        if section == "obj":
            obj_tokens.extend(line.split())
        elif section == "rows":
            toks = line.split()
            if toks and toks[0].endswith(":"):
                row_chunks.append(toks)
            else:
                row_chunks[-1].extend(toks)
        elif section == "bounds":
            bound_tokens.append(line)
        elif section == "generals":
            generals.update(int(t[1:]) for t in line.split())
        elif section == "binaries":
            binaries.update(int(t[1:]) for t in line.split())

    def read_terms(tokens):
        terms, i = [], 0
        while i < len(tokens):
            sign = 1.0 if tokens[i] == "+" else -1.0
            coef = float(tokens[i + 1])
            vid = int(tokens[i + 2][1:])
            terms.append((vid, sign * coef))
            i += 3
        return terms

    if obj_tokens and obj_tokens[0] == "obj:":
        obj_tokens = obj_tokens[1:]
    obj_terms = read_terms(obj_tokens)

    rows = []
    max_vid = max((vid for vid, _ in obj_terms), default=-1)
    for toks in row_chunks:
        label = toks[0][:-1]
        tag = label.split("_", 1)[1] if "_" in label else ""
        sense_pos = next(i for i, t in enumerate(toks) if t in ("<=", ">=", "="))
        terms = read_terms(toks[1:sense_pos])
        rhs = float(toks[sense_pos + 1])
        rows.append((terms, toks[sense_pos], rhs, tag))
        for vid, _ in terms:
            max_vid = max(max_vid, vid)

    lo: dict[int, float] = {}
    hi: dict[int, float] = {}
    for line in bound_tokens:
        toks = line.split()
        if len(toks) == 2 and toks[1] == "free":
            vid = int(toks[0][1:])
            lo[vid], hi[vid] = -math.inf, math.inf
        else:
            vid = int(toks[2][1:])
            lov, hiv = float(toks[0]), float(toks[4])
            lo[vid] = -math.inf if lov <= -LP_INF else lov
            hi[vid] = math.inf if hiv >= LP_INF else hiv
        max_vid = max(max_vid, vid)
    max_vid = max(max_vid, max(generals, default=-1), max(binaries, default=-1))

    model = MilpModel(name="parsed")
    for vid in range(max_vid + 1):
        if vid in binaries:
            kind = BINARY
            lower, upper = lo.get(vid, 0.0), hi.get(vid, 1.0)
        elif vid in generals:
            kind = INTEGER
            lower, upper = lo.get(vid, 0.0), hi.get(vid, math.inf)
        else:
            kind = "continuous"
            lower, upper = lo.get(vid, 0.0), hi.get(vid, math.inf)
        model.variables.append(VarSpec(f"v{vid}", kind, lower, upper))
    for terms, sense, rhs, tag in rows:
        folded: dict[int, float] = {}
        for vid, coef in terms:
            folded[vid] = folded.get(vid, 0.0) + coef
        model.constraints.append(
            Constraint(tuple(folded.items()), sense, rhs, tag)
        )
    for vid, coef in obj_terms:
        if coef != 0.0:
            model.objective[vid] = model.objective.get(vid, 0.0) + coef
    return model


def solve_shim_main(argv: list[str] | None = None) -> int:
    """Entry point of ``restoplan-solve``: LP file in, JSON solution out."""
    import argparse

    ap = argparse.ArgumentParser(
        prog="restoplan-solve",
        description="Solve an LP-format MILP and write a JSON solution file.",
    )
    ap.add_argument("model_lp")
    ap.add_argument("solution_json")
    ap.add_argument("--gap", type=float, default=1e-4)
    ap.add_argument("--time-limit", type=float, default=1800.0)
    args = ap.parse_args(argv)

    with open(args.model_lp) as fh:
        model = parse_lp(fh.read())
    cfg = BackendConfig(backend="scipy", gap=args.gap, time_limit=args.time_limit)
    sol = _solve_scipy(model, cfg)
    payload = {
        "status": sol.status,
        "objective": sol.objective,
        "gap": sol.gap,
        "detail": sol.detail,
        "values": None
        if sol.values is None
        else {f"v{vid}": float(val) for vid, val in enumerate(sol.values)},
    }
    with open(args.solution_json, "w") as fh:
        json.dump(payload, fh)
    return 0 if sol.status in (OPTIMAL, FEASIBLE, INFEASIBLE) else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(solve_shim_main())
