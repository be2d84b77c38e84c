"""CPLEX-LP text export of the scheduling model, plus a parser for the same
subset of the format and a matrix-form solver hook for cross-checking.

The writer emits full-precision coefficients (%.17g) so a write/parse round
trip reproduces the model exactly.  The parser supports the subset this writer
produces: Minimize / Subject To / Bounds / Binaries / Generals / End, one
objective or constraint per line, explicit bounds for every non-binary
variable.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.optimize import milp as _scipy_milp
from scipy.optimize import Bounds, LinearConstraint

from .model import MilpModel


def _num(v: float) -> str:
    return f"{v:.17g}"


def export_lp(model: MilpModel) -> str:
    """Serialize the model as CPLEX-LP text (presolve hints excluded: the
    text is the pure model, solvable by any LP-format-aware solver)."""
    lines = ["\\ hyrosched scheduling model", "Minimize"]
    terms = [
        f"{'+' if v.obj >= 0 else '-'} {_num(abs(v.obj))} {v.name}"
        for v in model.variables
        if v.obj != 0.0
    ]
    lines.append(" obj: " + (" ".join(terms).lstrip("+ ") or "0 " + model.variables[0].name))
    lines.append("Subject To")
    for con in model.constraints:
        parts = []
        for idx in sorted(con.coeffs):
            c = con.coeffs[idx]
            sign = "+" if c >= 0 else "-"
            parts.append(f"{sign} {_num(abs(c))} {model.variables[idx].name}")
        body = " ".join(parts).lstrip("+ ") or "0 " + model.variables[0].name
        lines.append(f" {con.name}: {body} {con.sense} {_num(con.rhs)}")
    lines.append("Bounds")
    for v in model.variables:
        if v.vtype != "B":
            lines.append(f" {_num(v.lb)} <= {v.name} <= {_num(v.ub)}")
    binaries = [v.name for v in model.variables if v.vtype == "B"]
    generals = [v.name for v in model.variables if v.vtype == "I"]
    if binaries:
        lines.append("Binaries")
        lines.extend(f" {name}" for name in binaries)
    if generals:
        lines.append("Generals")
        lines.extend(f" {name}" for name in generals)
    lines.append("End")
    return "\n".join(lines) + "\n"


@dataclass
class ParsedLp:
    """Matrix form of a parsed LP file."""

    names: list[str]
    c: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    integrality: np.ndarray  # 1 where integer/binary
    rows: list[tuple[str, dict[int, float], str, float]] = field(default_factory=list)


_TERM_RE = re.compile(r"([+-]?)\s*(\d[\d.eE+-]*)?\s*([A-Za-z_][A-Za-z0-9_]*)")
_SENSE_RE = re.compile(r"(<=|>=|=)\s*([+-]?[\d.eE+-]+)\s*$")


def _parse_terms(body: str, index: dict[str, int]) -> dict[int, float]:
    coeffs: dict[int, float] = {}
    for sign, mag, name in _TERM_RE.findall(body):
        coef = float(mag) if mag else 1.0
        if sign == "-":
            coef = -coef
        idx = index.setdefault(name, len(index))
        coeffs[idx] = coeffs.get(idx, 0.0) + coef
    return coeffs


def parse_lp(text: str) -> ParsedLp:
    """Parse the LP subset produced by :func:`export_lp`."""
    section = None
    index: dict[str, int] = {}
    obj: dict[int, float] = {}
    rows: list[tuple[str, dict[int, float], str, float]] = []
    bounds: dict[str, tuple[float, float]] = {}
    binaries: set[str] = set()
    generals: set[str] = set()
    headers = {
        "minimize": "objective", "subject to": "constraints", "st": "constraints",
        "bounds": "bounds", "binaries": "binaries", "binary": "binaries",
        "generals": "generals", "general": "generals", "end": "end",
    }
    for raw in text.splitlines():
        line = raw.split("\\", 1)[0].strip()
        if not line:
            continue
        low = line.lower()
        if low in headers:
            section = headers[low]
            continue
        if section == "objective":
            body = line.split(":", 1)[1] if ":" in line else line
            obj.update(_parse_terms(body, index))
        elif section == "constraints":
            name, body = (part.strip() for part in line.split(":", 1))
            m = _SENSE_RE.search(body)
            if not m:
                raise ValueError(f"constraint without relation: {line!r}")
            rows.append((name, _parse_terms(body[: m.start()], index),
                         m.group(1), float(m.group(2))))
        elif section == "bounds":
            m = re.match(
                r"([+-]?[\d.eE+-]+)\s*<=\s*([A-Za-z_][A-Za-z0-9_]*)\s*<=\s*([+-]?[\d.eE+-]+)",
                line,
            )
            if not m:
                raise ValueError(f"unsupported bounds line: {line!r}")
            index.setdefault(m.group(2), len(index))
            bounds[m.group(2)] = (float(m.group(1)), float(m.group(3)))
        elif section == "binaries":
            for name in line.split():
                index.setdefault(name, len(index))
                binaries.add(name)
        elif section == "generals":
            for name in line.split():
                index.setdefault(name, len(index))
                generals.add(name)
    names = sorted(index, key=index.get)
    nv = len(names)
    c = np.zeros(nv)
    for idx, coef in obj.items():
        c[idx] = coef
    lb = np.zeros(nv)
    ub = np.full(nv, np.inf)
    integrality = np.zeros(nv)
    for i, name in enumerate(names):
        if name in binaries:
            lb[i], ub[i] = 0.0, 1.0
            integrality[i] = 1
        if name in generals:
            integrality[i] = 1
        if name in bounds:
            lb[i], ub[i] = bounds[name]
    return ParsedLp(names=names, c=c, lb=lb, ub=ub, integrality=integrality, rows=rows)


def solve_parsed(parsed: ParsedLp) -> tuple[float, np.ndarray]:
    """Solve a parsed LP/MIP with scipy's HiGHS MIP interface.

    This is the external cross-check route: a solver that never sees the
    in-memory model, only the LP text.
    """
    nv = len(parsed.names)
    rows_i, cols, data, lo, hi = [], [], [], [], []
    for r, (_, coeffs, sense, rhs) in enumerate(parsed.rows):
        for idx, coef in coeffs.items():
            rows_i.append(r)
            cols.append(idx)
            data.append(coef)
        if sense == "<=":
            lo.append(-np.inf)
            hi.append(rhs)
        elif sense == ">=":
            lo.append(rhs)
            hi.append(np.inf)
        else:
            lo.append(rhs)
            hi.append(rhs)
    a = sp.csr_matrix((data, (rows_i, cols)), shape=(len(parsed.rows), nv))
    res = _scipy_milp(
        c=parsed.c,
        constraints=LinearConstraint(a, np.array(lo), np.array(hi)),
        bounds=Bounds(parsed.lb, parsed.ub),
        integrality=parsed.integrality,
    )
    if res.status != 0:
        raise RuntimeError(f"cross-check solve failed: {res.message}")
    return float(res.fun), res.x
