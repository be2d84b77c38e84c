"""Deterministic branch-and-bound over the scheduling model.

The search is best-bound with deterministic tie-breaking: nodes are keyed by
(parent LP bound, creation order), branching picks the fractional assignment
variable with the largest objective-coefficient magnitude (lexicographic tie
break), then the lowest-index fractional integer variable.  LP relaxations
are solved with HiGHS via scipy, which is deterministic for fixed input, so
two runs on the same model return the same incumbent and objective.
"""

from __future__ import annotations

import heapq
import json
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from ..channel import OWC, RF
from .model import MilpModel

TECHS_BOTH = (RF, OWC)

INT_TOL = 1e-6
OBJ_TOL = 1e-9

SOLUTION_SCHEMA = "hyrosched-solution"
SOLUTION_VERSION = 1


@dataclass(frozen=True)
class SolverLimits:
    node_cap: int = 1_000_000
    time_cap_s: float | None = None
    gap: float = 0.0


@dataclass
class SolverStats:
    nodes: int = 0
    wall_time_s: float = 0.0
    optimal: bool = False
    gap: float = float("inf")


@dataclass
class ScheduleSolution:
    """Solved schedule: dense assignment tensor x[i, j, m, k-1], sent packet
    counts per (message index, technology, step), per-message delays, and the
    technology-state trajectory s[i, k] (column 0 is the RF initial state)."""

    x: np.ndarray  # (N, N, 2, T) uint8
    ytilde: dict[tuple[int, int, int], int]
    delays: dict[int, int]
    s: np.ndarray  # (N, T+1) uint8
    objective: float
    stats: SolverStats = field(default_factory=SolverStats)
    infeasible: bool = False


class ModelArrays:
    """Matrix form of a MilpModel, built once and shared across nodes."""

    def __init__(self, model: MilpModel):
        nv = len(model.variables)
        self.c = np.array([v.obj for v in model.variables])
        self.lb = np.array([v.lb for v in model.variables], dtype=float)
        self.ub = np.array([v.ub for v in model.variables], dtype=float)
        for idx, val in model.presolve_fixes.items():
            self.lb[idx] = self.ub[idx] = val
        self.is_int = np.array([v.vtype in ("B", "I") for v in model.variables])
        rows_ub, cols_ub, data_ub, b_ub = [], [], [], []
        rows_eq, cols_eq, data_eq, b_eq = [], [], [], []
        for con in model.constraints:
            if con.sense == "=":
                r = len(b_eq)
                for idx, coef in con.coeffs.items():
                    rows_eq.append(r)
                    cols_eq.append(idx)
                    data_eq.append(coef)
                b_eq.append(con.rhs)
            else:
                sign = 1.0 if con.sense == "<=" else -1.0
                r = len(b_ub)
                for idx, coef in con.coeffs.items():
                    rows_ub.append(r)
                    cols_ub.append(idx)
                    data_ub.append(sign * coef)
                b_ub.append(sign * con.rhs)
        self.A_ub = sp.csr_matrix((data_ub, (rows_ub, cols_ub)), shape=(len(b_ub), nv))
        self.b_ub = np.array(b_ub)
        self.A_eq = (
            sp.csr_matrix((data_eq, (rows_eq, cols_eq)), shape=(len(b_eq), nv))
            if b_eq
            else None
        )
        self.b_eq = np.array(b_eq) if b_eq else None

    def solve_relaxation(self, lb: np.ndarray, ub: np.ndarray):
        res = linprog(
            self.c,
            A_ub=self.A_ub,
            b_ub=self.b_ub,
            A_eq=self.A_eq,
            b_eq=self.b_eq,
            bounds=np.column_stack([lb, ub]),
            method="highs",
        )
        if res.status != 0:
            return None, None
        return res.fun, res.x


def _trivial_solution_vector(model: MilpModel) -> np.ndarray:
    """The always-feasible all-zero schedule (every message expires)."""
    v = np.zeros(len(model.variables))
    for fi in model.y:
        v[model.y[fi]] = model.scenario.messages[fi].packets
        v[model.delta[fi]] = model.chi
    for idx, val in model.presolve_fixes.items():
        v[idx] = val
    return v


def _min_switches(uses: list[tuple[int, int]]) -> int:
    """Fewest technology-state changes consistent with a sorted (step, tech)
    use sequence; devices start on RF."""
    state, switches = 0, 0
    for _, t in uses:
        if t != state:
            switches += 1
            state = t
    return switches


def _assignment_to_vector(model: MilpModel, assigned: dict[int, tuple[int, int, int]]) -> np.ndarray:
    """Full variable vector for a schedule given as message -> (tech, step,
    packets).  The caller guarantees the schedule respects every rule."""
    scn = model.scenario
    v = np.zeros(len(model.variables))
    for idx, val in model.presolve_fixes.items():
        v[idx] = val
    uses: dict[int, list[tuple[int, int]]] = {d: [] for d in range(scn.n_devices)}
    for fi, f in enumerate(scn.messages):
        choice = assigned.get(fi)
        if choice is None:
            v[model.y[fi]] = f.packets
            v[model.delta[fi]] = model.chi
            continue
        t, k, q = choice
        v[model.x[f.src, f.dst, t, k]] = 1.0
        v[model.ytilde[fi, t, k]] = q
        v[model.y[fi]] = f.packets - q
        v[model.delta[fi]] = k - f.window_start + 1
        uses[f.src].append((k, t))
        uses[f.dst].append((k, t))
    # Minimal-switch state trajectory: hold the previous state until a use
    # forces a change.
    for d in range(scn.n_devices):
        seq = sorted(uses[d])
        state = 0
        pos = 0
        for k in range(1, scn.horizon + 1):
            if pos < len(seq) and seq[pos][0] == k:
                state = seq[pos][1]
                pos += 1
            prev = v[model.s[d, k - 1]] if k > 1 else 0.0
            v[model.s[d, k]] = state
            v[model.z[d, k]] = abs(state - prev)
    return v


def _greedy_rounding(model: MilpModel, arrays: "ModelArrays",
                     lb: np.ndarray, ub: np.ndarray) -> np.ndarray | None:
    """Deterministic primal heuristic, aware of the node's branching bounds.

    Transmissions forced on by the node (assignment lower bound 1) are placed
    first; the remaining messages are walked in a model-independent order
    (largest packet count, then earliest window) and given their earliest free
    admissible step, preferring the technology with the better objective
    coefficient.  Packet counts then greedily fill the most valuable
    assignments within the energy budgets.  Returns None when the forced
    transmissions already conflict.
    """
    scn = model.scenario
    omega = model.omega
    assigned: dict[int, tuple[int, int, int]] = {}
    busy: set[tuple[int, int]] = set()
    uses: dict[int, list[tuple[int, int]]] = {d: [] for d in range(scn.n_devices)}

    def commit(fi: int, t: int, k: int) -> bool:
        f = scn.messages[fi]
        if fi in assigned or (f.src, k) in busy or (f.dst, k) in busy:
            return False
        for d in (f.src, f.dst):
            if _min_switches(sorted(uses[d] + [(k, t)])) > omega:
                return False
        assigned[fi] = (t, k, 0)
        busy.add((f.src, k))
        busy.add((f.dst, k))
        uses[f.src].append((k, t))
        uses[f.dst].append((k, t))
        return True

    window_of: dict[tuple[int, int, int], int] = {}
    for fi, f in enumerate(scn.messages):
        for k in f.steps:
            window_of[f.src, f.dst, k] = fi

    for (i, j, t, k), idx in model.x.items():
        if lb[idx] > 0.5:
            fi = window_of.get((i, j, k))
            if fi is None or not commit(fi, t, k):
                return None

    order = sorted(
        range(len(scn.messages)),
        key=lambda fi: (-scn.messages[fi].packets,
                        scn.messages[fi].window_start, fi),
    )
    for fi in order:
        if fi in assigned:
            continue
        f = scn.messages[fi]
        for k in f.steps:
            if (f.src, k) in busy or (f.dst, k) in busy:
                continue
            techs = []
            for t in TECHS_BOTH:
                x_idx = model.x[f.src, f.dst, t, k]
                if ub[x_idx] < 0.5 or not scn.link_admissible(f.src, f.dst, k, t):
                    continue
                techs.append((arrays.c[model.ytilde[fi, t, k]], t))
            placed = False
            for _, t in sorted(techs):
                if commit(fi, t, k):
                    placed = True
                    break
            if placed:
                break

    # Packets: most valuable (most negative objective coefficient) first.
    remaining = [float(b) / scn.packet_bits for b in scn.devices.budgets_j]
    fills = sorted(
        ((arrays.c[model.ytilde[fi, t, k]], fi) for fi, (t, k, _) in assigned.items()),
    )
    for coef, fi in fills:
        t, k, _ = assigned[fi]
        f = scn.messages[fi]
        if scn.capacity_bps(f.src, f.dst, k, t) <= 0:
            continue
        xs, xr = scn.energy_coeffs(f.src, f.dst, k, t)
        q = min(f.packets, int(np.floor(scn.packet_capacity(f.src, f.dst, k, t))))
        if xs > 0:
            q = min(q, int(np.floor(remaining[f.src] / xs)))
        if xr > 0:
            q = min(q, int(np.floor(remaining[f.dst] / xr)))
        q = max(q, 0)
        assigned[fi] = (t, k, q)
        remaining[f.src] -= q * xs
        remaining[f.dst] -= q * xr
    return _assignment_to_vector(model, assigned)


def solution_to_assignment(
    scn, sol: ScheduleSolution
) -> dict[int, tuple[int, int, int]]:
    """Express a solved schedule as message -> (tech, step, packets)."""
    assigned: dict[int, tuple[int, int, int]] = {}
    for fi, f in enumerate(scn.messages):
        for t in (0, 1):
            for k in f.steps:
                if sol.x[f.src, f.dst, t, k - 1]:
                    assigned[fi] = (t, k, sol.ytilde.get((fi, t, k), 0))
    return assigned


def solve_bnb(
    model: MilpModel,
    limits: SolverLimits = SolverLimits(),
) -> ScheduleSolution:
    """Solve the model to proven optimality (within ``limits``).

    Always returns a solution: the all-zero schedule is feasible for every
    well-formed model, so infeasibility cannot occur.
    """
    t0 = time.monotonic()
    arrays = ModelArrays(model)
    x_indices = set(model.x.values())

    incumbent = _trivial_solution_vector(model)
    incumbent_obj = model.objective_value(incumbent)

    stats = SolverStats()
    counter = 0
    # heap entries: (parent bound, insertion counter, lb overrides, ub overrides)
    heap: list[tuple[float, int, dict[int, float], dict[int, float]]] = [
        (-np.inf, counter, {}, {})
    ]
    hit_limit = False
    while heap:
        bound_key, _, lb_over, ub_over = heapq.heappop(heap)
        if bound_key >= incumbent_obj - OBJ_TOL:
            continue
        if stats.nodes >= limits.node_cap:
            hit_limit = True
            break
        if limits.time_cap_s is not None and time.monotonic() - t0 > limits.time_cap_s:
            hit_limit = True
            break
        stats.nodes += 1
        lb = arrays.lb.copy()
        ub = arrays.ub.copy()
        for idx, val in lb_over.items():
            lb[idx] = max(lb[idx], val)
        for idx, val in ub_over.items():
            ub[idx] = min(ub[idx], val)
        if np.any(lb > ub):
            continue
        obj, values = arrays.solve_relaxation(lb, ub)
        if obj is None:
            continue  # infeasible subtree
        if obj >= incumbent_obj - OBJ_TOL:
            continue
        if limits.gap > 0 and incumbent_obj - obj <= limits.gap:
            continue
        frac = [
            idx
            for idx in np.nonzero(arrays.is_int)[0]
            if abs(values[idx] - round(values[idx])) > INT_TOL
        ]
        if frac:
            # Primal heuristic: complete the node's branching decisions into a
            # feasible schedule; often tightens the incumbent long before the
            # search reaches an integral relaxation.
            heur = _greedy_rounding(model, arrays, lb, ub)
            if heur is not None:
                heur_obj = model.objective_value(heur)
                if heur_obj < incumbent_obj - 1e-12:
                    incumbent, incumbent_obj = heur, heur_obj
        if not frac:
            rounded = values.copy()
            ints = np.nonzero(arrays.is_int)[0]
            rounded[ints] = np.round(rounded[ints])
            cand_obj = model.objective_value(rounded)
            if cand_obj < incumbent_obj - 1e-12:
                incumbent = rounded
                incumbent_obj = cand_obj
            continue
        frac_x = [i for i in frac if i in x_indices]
        if frac_x:
            branch = min(frac_x, key=lambda i: (-abs(arrays.c[i]), i))
        else:
            branch = min(frac)
        val = values[branch]
        counter += 1
        heapq.heappush(
            heap, (obj, counter, dict(lb_over), {**ub_over, branch: np.floor(val)})
        )
        counter += 1
        heapq.heappush(
            heap, (obj, counter, {**lb_over, branch: np.ceil(val)}, dict(ub_over))
        )

    stats.wall_time_s = time.monotonic() - t0
    if hit_limit:
        open_bounds = [entry[0] for entry in heap]
        lowest = min(open_bounds, default=incumbent_obj)
        stats.gap = max(incumbent_obj - lowest, 0.0)
        stats.optimal = stats.gap <= limits.gap
    else:
        stats.optimal = True
        stats.gap = 0.0
    return _extract_solution(model, incumbent, incumbent_obj, stats)


def _extract_solution(
    model: MilpModel, values: np.ndarray, objective: float, stats: SolverStats
) -> ScheduleSolution:
    scn = model.scenario
    n, horizon = scn.n_devices, scn.horizon
    x = np.zeros((n, n, 2, horizon), dtype=np.uint8)
    for (i, j, t, k), idx in model.x.items():
        x[i, j, t, k - 1] = int(round(values[idx]))
    ytilde = {
        key: int(round(values[idx]))
        for key, idx in model.ytilde.items()
        if round(values[idx]) != 0
    }
    delays = {fi: int(round(values[idx])) for fi, idx in model.delta.items()}
    s = np.zeros((n, horizon + 1), dtype=np.uint8)
    for (i, k), idx in model.s.items():
        s[i, k] = int(round(values[idx]))
    return ScheduleSolution(
        x=x, ytilde=ytilde, delays=delays, s=s, objective=objective, stats=stats
    )


# ---------------------------------------------------------------------------
# Solution serialization (shared with the replay tooling and the CLI).

def solution_to_json(sol: ScheduleSolution) -> str:
    payload = {
        "schema": SOLUTION_SCHEMA,
        "version": SOLUTION_VERSION,
        "objective": sol.objective,
        "x": [
            [int(i), int(j), int(t), int(k + 1)]
            for (i, j, t, k) in zip(*np.nonzero(sol.x))
        ],
        "shape": list(sol.x.shape),
        "ytilde": [[fi, t, k, cnt] for (fi, t, k), cnt in sorted(sol.ytilde.items())],
        "delays": [[fi, d] for fi, d in sorted(sol.delays.items())],
        "s": sol.s.tolist(),
        # wall time is deliberately not serialized so solution files are
        # byte-for-byte reproducible from (scenario, limits)
        "stats": {
            "nodes": sol.stats.nodes,
            "optimal": sol.stats.optimal,
            "gap": sol.stats.gap,
        },
    }
    return json.dumps(payload, indent=1)


def solution_from_json(text: str) -> ScheduleSolution:
    payload = json.loads(text)
    if payload.get("schema") != SOLUTION_SCHEMA:
        raise ValueError(f"not a solution file (schema {payload.get('schema')!r})")
    if payload.get("version") != SOLUTION_VERSION:
        raise ValueError(f"unsupported solution version {payload.get('version')!r}")
    x = np.zeros(payload["shape"], dtype=np.uint8)
    for i, j, t, k in payload["x"]:
        x[i, j, t, k - 1] = 1
    stats = SolverStats(
        nodes=payload["stats"]["nodes"],
        wall_time_s=payload["stats"].get("wall_time_s", 0.0),
        optimal=payload["stats"]["optimal"],
        gap=payload["stats"]["gap"],
    )
    return ScheduleSolution(
        x=x,
        ytilde={(fi, t, k): cnt for fi, t, k, cnt in payload["ytilde"]},
        delays={fi: d for fi, d in payload["delays"]},
        s=np.array(payload["s"], dtype=np.uint8),
        objective=payload["objective"],
        stats=stats,
    )
