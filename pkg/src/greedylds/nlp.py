"""Mixed-integer bilinear model for the next point in d = 2, as a plain-text file.

Variables
    y1, y2, v1, v2, v3     continuous in [0, 1]
    t_j, u_j               continuous in [0, 1], the max(x, y) stand-ins
    x_1 .. x_2n            fixed to the existing coordinates (x_{2j-1}, x_{2j})
    r_j, s_j               binaries, 1 when the fixed coordinate is the larger

The objective is

    -(n+1)/2 v3 + (1 - y1)(1 - y2) + 2 sum_j (1 - t_j)(1 - u_j)

which equals F_2(y) exactly once the binaries follow the max pattern.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass, field

import numpy as np

from .core import PointSet, format_float

__all__ = [
    "Constraint",
    "Expr",
    "NlpModel",
    "SolutionReport",
    "build_model",
    "check_solution",
    "export_model",
    "feasible_assignment",
    "parse_model",
    "render_model",
]

HEADER = (
    "Next-point model for the greedy L2 sequence in d=2.",
    "Two index/sign fixes relative to the commonly printed form:",
    "  linking   printed: t_j = (1 - r_j) y1 + r_j x_{2j+1}, u_j = (1 - s_j) y2 + s_j x_{2j+2}",
    "            used:    t_j = (1 - r_j) y1 + r_j x_{2j-1}, u_j = (1 - s_j) y2 + s_j x_{2j}",
    "  objective printed: -(n+1)/2 v3 + (1 - y1)(1 - y2) + 2 sum_j t_j u_j",
    "            used:    -(n+1)/2 v3 + (1 - y1)(1 - y2) + 2 sum_j (1 - t_j)(1 - u_j)",
    "Terms are 'coef * var' or 'coef * var * var'; constraints are 'name: expr op rhs'.",
)


class Expr(dict):
    """Polynomial of degree <= 2: maps () / (v,) / (v, w) to a coefficient.

    Insertion order is kept and drives the written term order.
    """

    def add(self, coef: float, *vars_: str) -> Expr:
        key = tuple(vars_)
        self[key] = self.get(key, 0.0) + float(coef)
        return self

    def evaluate(self, values: dict[str, float]) -> float:
        total = 0.0
        for key, coef in self.items():
            term = coef
            for v in key:
                term *= values[v]
            total += term
        return total

    @property
    def variables(self) -> set[str]:
        return {v for key in self for v in key}


@dataclass(frozen=True)
class Constraint:
    name: str
    expr: Expr
    sense: str
    rhs: float

    def violation(self, values: dict[str, float]) -> float:
        lhs = self.expr.evaluate(values)
        if self.sense == "<=":
            return max(0.0, lhs - self.rhs)
        if self.sense == ">=":
            return max(0.0, self.rhs - lhs)
        return abs(lhs - self.rhs)


@dataclass
class NlpModel:
    objective: Expr
    bounds: dict[str, tuple[float, float]]
    binaries: list[str]
    constraints: list[Constraint]
    points: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def variables(self) -> list[str]:
        return list(self.bounds) + list(self.binaries)


def build_model(ps) -> NlpModel:
    x = ps.coords if isinstance(ps, PointSet) else np.asarray(ps, dtype=np.float64).reshape(-1, 2)
    if x.ndim != 2 or x.shape[1] != 2:
        raise ValueError("the model is only formulated for d=2")
    n = x.shape[0]
    idx = range(1, n + 1)

    obj = Expr().add(-(n + 1) / 2.0, "v3")
    # (1 - y1)(1 - y2)
    obj.add(1.0).add(-1.0, "y1").add(-1.0, "y2").add(1.0, "y1", "y2")
    for j in idx:
        # 2 (1 - t_j)(1 - u_j)
        obj.add(2.0).add(-2.0, f"t{j}").add(-2.0, f"u{j}").add(2.0, f"t{j}", f"u{j}")

    bounds: dict[str, tuple[float, float]] = {}
    for name in ("y1", "y2", "v1", "v2", "v3"):
        bounds[name] = (0.0, 1.0)
    for prefix in ("t", "u"):
        for j in idx:
            bounds[f"{prefix}{j}"] = (0.0, 1.0)
    for k in range(1, 2 * n + 1):
        bounds[f"x{k}"] = (0.0, 1.0)
    binaries = [f"r{j}" for j in idx] + [f"s{j}" for j in idx]

    cons: list[Constraint] = []
    for j in idx:
        cons.append(Constraint(f"fix_a_{j}", Expr().add(1.0, f"x{2 * j - 1}"), "=", float(x[j - 1, 0])))
    for j in idx:
        cons.append(Constraint(f"fix_b_{j}", Expr().add(1.0, f"x{2 * j}"), "=", float(x[j - 1, 1])))
    for binv, offset, yk, (lo_tag, hi_tag) in (("r", 1, "y1", "cd"), ("s", 0, "y2", "ef")):
        for j in idx:
            # b_j - 1 <= x - y   ->   b_j - x + y <= 1
            cons.append(Constraint(f"max_{lo_tag}_{j}",
                                   Expr().add(1.0, f"{binv}{j}").add(-1.0, f"x{2 * j - offset}")
                                   .add(1.0, yk), "<=", 1.0))
        for j in idx:
            # x - y <= b_j   ->   b_j - x + y >= 0
            cons.append(Constraint(f"max_{hi_tag}_{j}",
                                   Expr().add(1.0, f"{binv}{j}").add(-1.0, f"x{2 * j - offset}")
                                   .add(1.0, yk), ">=", 0.0))
    for j in idx:
        # t_j - y1 + r_j y1 - r_j x_{2j-1} = 0
        cons.append(Constraint(f"link_g_{j}",
                               Expr().add(1.0, f"t{j}").add(-1.0, "y1").add(1.0, f"r{j}", "y1")
                               .add(-1.0, f"r{j}", f"x{2 * j - 1}"), "=", 0.0))
    for j in idx:
        cons.append(Constraint(f"link_h_{j}",
                               Expr().add(1.0, f"u{j}").add(-1.0, "y2").add(1.0, f"s{j}", "y2")
                               .add(-1.0, f"s{j}", f"x{2 * j}"), "=", 0.0))
    cons.append(Constraint("prod_i", Expr().add(1.0, "v1").add(-1.0, "y1", "y1"), "=", 0.0))
    cons.append(Constraint("prod_j", Expr().add(1.0, "v2").add(-1.0, "y2", "y2"), "=", 0.0))
    # v3 = (1 - v1)(1 - v2)  ->  v3 + v1 + v2 - v1 v2 = 1
    cons.append(Constraint("prod_k", Expr().add(1.0, "v3").add(1.0, "v1").add(1.0, "v2")
                           .add(-1.0, "v1", "v2"), "=", 1.0))
    return NlpModel(obj, bounds, binaries, cons, np.array(x, dtype=np.float64))


def _render_expr(expr: Expr) -> str:
    parts = []
    for key, coef in expr.items():
        sign = "-" if coef < 0 or (coef == 0 and np.signbit(coef)) else "+"
        body = format_float(abs(coef))
        if key:
            body += " * " + " * ".join(key)
        parts.append((sign, body))
    if not parts:
        return "0"
    first_sign, first = parts[0]
    out = ("-" if first_sign == "-" else "") + first
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


def render_model(model: NlpModel) -> str:
    lines = [f"# {h}" for h in HEADER]
    lines.append(f"# n = {model.n}")
    lines.append(f"minimize: {_render_expr(model.objective)}")
    lines.append("bounds")
    for name, (lo, hi) in model.bounds.items():
        lines.append(f"  {format_float(lo)} <= {name} <= {format_float(hi)}")
    lines.append("binaries")
    for name in model.binaries:
        lines.append(f"  {name}")
    lines.append("constraints")
    for c in model.constraints:
        lines.append(f"  {c.name}: {_render_expr(c.expr)} {c.sense} {format_float(c.rhs)}")
    lines.append("end")
    return "\n".join(lines) + "\n"


def export_model(model: NlpModel, path: str | os.PathLike) -> None:
    text = render_model(model)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write model to {os.fspath(path)!r}: {exc.strerror}") from exc


def _parse_expr(text: str) -> Expr:
    tokens = text.split()
    expr = Expr()
    sign = 1.0
    i = 0
    if tokens and tokens[0].startswith("-") and len(tokens[0]) > 1:
        tokens[0] = tokens[0][1:]
        sign = -1.0
    while i < len(tokens):
        tok = tokens[i]
        if tok in ("+", "-"):
            sign = 1.0 if tok == "+" else -1.0
            i += 1
            continue
        coef = sign * float(tok)
        names = []
        i += 1
        while i + 1 < len(tokens) and tokens[i] == "*":
            names.append(tokens[i + 1])
            i += 2
        expr.add(coef, *names)
        sign = 1.0
    return expr


def parse_model(source: str | os.PathLike | io.TextIOBase) -> NlpModel:
    """Read a model written by :func:`render_model` (fixed points recovered from fix_* rows)."""
    if isinstance(source, (str, os.PathLike)) and os.path.exists(source):
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    elif isinstance(source, str):
        text = source
    else:
        text = source.read()
    objective = Expr()
    bounds: dict[str, tuple[float, float]] = {}
    binaries: list[str] = []
    cons: list[Constraint] = []
    section = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("minimize:"):
            objective = _parse_expr(line[len("minimize:"):])
        elif line in ("bounds", "binaries", "constraints"):
            section = line
        elif line == "end":
            break
        elif section == "bounds":
            lo, _, name, _, hi = line.split()
            bounds[name] = (float(lo), float(hi))
        elif section == "binaries":
            binaries.append(line)
        elif section == "constraints":
            name, rest = line.split(":", 1)
            for sense in ("<=", ">=", "="):
                if f" {sense} " in rest:
                    lhs, rhs = rest.rsplit(f" {sense} ", 1)
                    cons.append(Constraint(name, _parse_expr(lhs), sense, float(rhs)))
                    break
            else:
                raise ValueError(f"constraint without a sense: {line!r}")
        else:
            raise ValueError(f"unexpected line: {line!r}")
    fix_a = {c.name: c.rhs for c in cons if c.name.startswith("fix_a_")}
    fix_b = {c.name: c.rhs for c in cons if c.name.startswith("fix_b_")}
    n = len(fix_a)
    pts = np.array([[fix_a[f"fix_a_{j}"], fix_b[f"fix_b_{j}"]] for j in range(1, n + 1)]).reshape(n, 2)
    return NlpModel(objective, bounds, binaries, cons, pts)


@dataclass(frozen=True)
class SolutionReport:
    objective: float
    max_violation: float
    worst: str
    binaries_match_max: bool
    functional_gap: float | None


def check_solution(model: NlpModel, assignment: dict[str, float]) -> SolutionReport:
    """Evaluate the objective and every constraint, bound and integrality condition.

    When the binaries follow the true max pattern (ties accept either value),
    ``functional_gap`` is objective minus F_2 at (y1, y2); with the corrected
    objective it is zero up to rounding.
    """
    missing = [v for v in model.variables if v not in assignment]
    if missing:
        raise KeyError(f"assignment lacks {len(missing)} variable(s): {', '.join(missing[:8])}")
    worst_val, worst = 0.0, ""
    for c in model.constraints:
        v = c.violation(assignment)
        if v > worst_val:
            worst_val, worst = v, c.name
    for name, (lo, hi) in model.bounds.items():
        v = max(lo - assignment[name], assignment[name] - hi, 0.0)
        if v > worst_val:
            worst_val, worst = v, f"bound {name}"
    for name in model.binaries:
        v = min(abs(assignment[name]), abs(assignment[name] - 1.0))
        if v > worst_val:
            worst_val, worst = v, f"integrality {name}"
    objective = model.objective.evaluate(assignment)

    y1, y2 = assignment["y1"], assignment["y2"]
    match = True
    for j, (a, b) in enumerate(model.points, 1):
        for xv, yv, bv in ((a, y1, assignment[f"r{j}"]), (b, y2, assignment[f"s{j}"])):
            if xv > yv and bv != 1.0 or xv < yv and bv != 0.0:
                match = False
    gap = None
    if match and 0.0 <= y1 < 1.0 and 0.0 <= y2 < 1.0:
        from .functional import functional_nd

        gap = objective - functional_nd([y1, y2], model.points.reshape(-1, 2))
    return SolutionReport(objective, worst_val, worst, match, gap)


def feasible_assignment(model: NlpModel, y1: float, y2: float) -> dict[str, float]:
    """The assignment implied by (y1, y2): binaries, maxima and products filled in."""
    a: dict[str, float] = {"y1": y1, "y2": y2, "v1": y1 * y1, "v2": y2 * y2}
    a["v3"] = (1.0 - a["v1"]) * (1.0 - a["v2"])
    for j, (p, q) in enumerate(model.points, 1):
        a[f"x{2 * j - 1}"] = float(p)
        a[f"x{2 * j}"] = float(q)
        a[f"r{j}"] = 1.0 if p > y1 else 0.0
        a[f"s{j}"] = 1.0 if q > y2 else 0.0
        a[f"t{j}"] = max(float(p), y1)
        a[f"u{j}"] = max(float(q), y2)
    return a
