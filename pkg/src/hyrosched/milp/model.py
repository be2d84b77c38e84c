"""Exact optimization model for dual-technology link scheduling.

Variables
---------
x[i,j,m,k]   binary   device i transmits to j with technology m at step k
a[i,j,m,k]   binary   auxiliary admission flag for the SNR threshold
s[i,k]       binary   technology state of device i at step k (0 RF, 1 OWC)
z[i,k]       continuous |s[i,k] - s[i,k-1]| envelope for the switching cap
y[f]         integer  packets of message f left untransmitted
delta[f]     integer  delay of message f (chi when never transmitted)
ytilde[f,m,k] integer packets of message f sent with m at step k

The product x * (Gamma - y) is linearized with the Big-M system using
sigma_bar = max Gamma; the conditional delay and technology-state rules use
Big-M constants chi and 1 respectively (the smallest valid choices).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..channel import OWC, RF
from ..scenario import Scenario

TECHS = (RF, OWC)

LE, GE, EQ = "<=", ">=", "="


@dataclass
class Variable:
    name: str
    vtype: str  # 'B' binary, 'I' integer, 'C' continuous
    lb: float
    ub: float
    obj: float = 0.0


@dataclass
class Constraint:
    name: str
    family: str
    coeffs: dict[int, float]  # variable index -> coefficient
    sense: str
    rhs: float


@dataclass
class MilpModel:
    scenario: Scenario
    variables: list[Variable] = field(default_factory=list)
    constraints: list[Constraint] = field(default_factory=list)
    # index maps
    x: dict[tuple[int, int, int, int], int] = field(default_factory=dict)
    a: dict[tuple[int, int, int, int], int] = field(default_factory=dict)
    s: dict[tuple[int, int], int] = field(default_factory=dict)
    z: dict[tuple[int, int], int] = field(default_factory=dict)
    y: dict[int, int] = field(default_factory=dict)
    delta: dict[int, int] = field(default_factory=dict)
    ytilde: dict[tuple[int, int, int], int] = field(default_factory=dict)
    # scalars
    chi: int = 1
    sigma_bar: int = 1
    omega: int = 0
    alpha1: float = 0.35
    alpha2: float = 0.65
    s1: float = 1.0
    s2: float = 1.0
    # variables provably fixable before search (forced x = 0, slack a values)
    presolve_fixes: dict[int, float] = field(default_factory=dict)

    def add_var(self, name, vtype, lb, ub, obj=0.0) -> int:
        self.variables.append(Variable(name, vtype, lb, ub, obj))
        return len(self.variables) - 1

    def add_con(self, name, family, coeffs, sense, rhs) -> None:
        coeffs = {idx: c for idx, c in coeffs.items() if c != 0.0}
        self.constraints.append(Constraint(name, family, coeffs, sense, rhs))

    def objective_value(self, values: np.ndarray) -> float:
        return float(sum(v.obj * values[idx] for idx, v in enumerate(self.variables)))


def delay_sentinel(scn: Scenario) -> int:
    """chi: one more than the widest message window (2 when no messages)."""
    widest = max((f.window_len for f in scn.messages), default=1)
    return widest + 1


def build_model(
    scn: Scenario,
    alpha1: float = 0.35,
    alpha2: float = 0.65,
    omega: int | None = None,
) -> MilpModel:
    """Emit every constraint family of the scheduling problem for ``scn``.

    The objective minimizes alpha1 * (sum of delays) / S1 minus
    alpha2 * (energy-weighted throughput) / S2, with S1 and S2 upper bounds
    on each sub-objective.
    """
    n = scn.n_devices
    horizon = scn.horizon
    msgs = list(scn.messages)
    chi = delay_sentinel(scn)
    sigma_bar = max((f.packets for f in msgs), default=1)
    if omega is None:
        omega = horizon // 2

    m = MilpModel(scenario=scn, chi=chi, sigma_bar=sigma_bar, omega=omega,
                  alpha1=alpha1, alpha2=alpha2)

    # Energy coefficients per admissible (i, j, k, tech); zero-capacity links
    # never carry packets, so their (infinite) coefficients are never needed.
    xi_cache: dict[tuple[int, int, int, int], tuple[float, float]] = {}

    def xi(i, j, k, t):
        key = (i, j, k, t)
        if key not in xi_cache:
            xi_cache[key] = scn.energy_coeffs(i, j, k, t)
        return xi_cache[key]

    # Normalization: S1 caps the delay sum, S2 the throughput-per-energy sum.
    m.s1 = float(chi * len(msgs)) if msgs else 1.0
    best_rate = 0.0
    for f in msgs:
        for k in f.steps:
            for t in TECHS:
                if scn.capacity_bps(f.src, f.dst, k, t) > 0:
                    xs, xr = xi(f.src, f.dst, k, t)
                    best_rate = max(best_rate, 1.0 / (xr + xs))
    total_packets = sum(f.packets for f in msgs)
    m.s2 = total_packets * best_rate if total_packets and best_rate else 1.0

    # --- variables -------------------------------------------------------
    for i in range(n):
        for j in range(n):
            for t in TECHS:
                for k in range(1, horizon + 1):
                    m.x[i, j, t, k] = m.add_var(f"x_{i}_{j}_{t}_{k}", "B", 0, 1)
    for i in range(n):
        for j in range(n):
            for t in TECHS:
                for k in range(1, horizon + 1):
                    m.a[i, j, t, k] = m.add_var(f"a_{i}_{j}_{t}_{k}", "B", 0, 1)
    for i in range(n):
        for k in range(1, horizon + 1):
            m.s[i, k] = m.add_var(f"s_{i}_{k}", "B", 0, 1)
    for i in range(n):
        for k in range(1, horizon + 1):
            m.z[i, k] = m.add_var(f"z_{i}_{k}", "C", 0, 1)
    for fi, f in enumerate(msgs):
        m.y[fi] = m.add_var(f"y_{fi}", "I", 0, f.packets)
        m.delta[fi] = m.add_var(f"delta_{fi}", "I", 1, chi, obj=alpha1 / m.s1)
        for t in TECHS:
            for k in f.steps:
                cap = scn.packet_capacity(f.src, f.dst, k, t)
                obj = 0.0
                if scn.capacity_bps(f.src, f.dst, k, t) > 0:
                    xs, xr = xi(f.src, f.dst, k, t)
                    obj = -alpha2 / (m.s2 * (xr + xs))
                m.ytilde[fi, t, k] = m.add_var(
                    f"yt_{fi}_{t}_{k}", "I", 0, min(cap, float(f.packets)), obj=obj
                )

    # --- one link per device per step ------------------------------------
    for i in range(n):
        for k in range(1, horizon + 1):
            m.add_con(
                f"tx1_{i}_{k}", "one-link-tx",
                {m.x[i, j, t, k]: 1.0 for j in range(n) for t in TECHS}, LE, 1.0,
            )
    for j in range(n):
        for k in range(1, horizon + 1):
            m.add_con(
                f"rx1_{j}_{k}", "one-link-rx",
                {m.x[i, j, t, k]: 1.0 for i in range(n) for t in TECHS}, LE, 1.0,
            )

    # --- communication only where a message is scheduled ------------------
    for i in range(n):
        for j in range(n):
            for k in range(1, horizon + 1):
                m.add_con(
                    f"msg_{i}_{j}_{k}", "message-exists",
                    {m.x[i, j, t, k]: 1.0 for t in TECHS},
                    LE, float(scn.comm_schedule[i, j, k - 1]),
                )

    # --- SNR admission threshold ------------------------------------------
    for i in range(n):
        for j in range(n):
            for t in TECHS:
                thr = scn.snr_min_linear(t)
                for k in range(1, horizon + 1):
                    snr = scn.visibility.snr_linear[i, j, k - 1, t]
                    snr_c = float(snr) if np.isfinite(snr) else 0.0
                    m.add_con(
                        f"snr_{i}_{j}_{t}_{k}", "snr-threshold",
                        {m.x[i, j, t, k]: thr, m.a[i, j, t, k]: -snr_c}, LE, 0.0,
                    )
                    if snr_c >= thr:
                        m.presolve_fixes[m.a[i, j, t, k]] = 1.0
                    else:
                        m.presolve_fixes[m.a[i, j, t, k]] = 0.0
                        m.presolve_fixes[m.x[i, j, t, k]] = 0.0

    # --- no self-communication --------------------------------------------
    for i in range(n):
        for t in TECHS:
            for k in range(1, horizon + 1):
                m.add_con(f"self_{i}_{t}_{k}", "no-self-loop",
                          {m.x[i, i, t, k]: 1.0}, EQ, 0.0)
                m.presolve_fixes[m.x[i, i, t, k]] = 0.0

    # ``x`` forced off wherever no message is scheduled.
    for i in range(n):
        for j in range(n):
            for k in range(1, horizon + 1):
                if not scn.comm_schedule[i, j, k - 1]:
                    for t in TECHS:
                        m.presolve_fixes[m.x[i, j, t, k]] = 0.0

    # --- a receiver cannot also transmit in the same step ------------------
    for i in range(n):
        for j in range(n):
            for jp in range(n):
                for t in TECHS:
                    for tp in TECHS:
                        for k in range(1, horizon + 1):
                            vi, vj = m.x[i, j, t, k], m.x[j, jp, tp, k]
                            if vi == vj:
                                continue
                            m.add_con(
                                f"roles_{i}_{j}_{jp}_{t}_{tp}_{k}",
                                "no-simultaneous-roles",
                                {vi: 1.0, vj: 1.0}, LE, 1.0,
                            )

    # --- each message transmitted at most once -----------------------------
    for fi, f in enumerate(msgs):
        m.add_con(
            f"once_{fi}", "at-most-once",
            {m.x[f.src, f.dst, t, k]: 1.0 for t in TECHS for k in f.steps}, LE, 1.0,
        )

    # --- Big-M linearization of sent packets ytilde = x * (Gamma - y) ------
    for fi, f in enumerate(msgs):
        for t in TECHS:
            for k in f.steps:
                yt = m.ytilde[fi, t, k]
                xv = m.x[f.src, f.dst, t, k]
                m.add_con(f"lin_c_{fi}_{t}_{k}", "packet-linearization",
                          {yt: 1.0, xv: -float(sigma_bar)}, LE, 0.0)
                m.add_con(f"lin_d_{fi}_{t}_{k}", "packet-linearization",
                          {yt: 1.0, m.y[fi]: 1.0}, LE, float(f.packets))
                m.add_con(f"lin_e_{fi}_{t}_{k}", "packet-linearization",
                          {yt: 1.0, m.y[fi]: 1.0, xv: -float(sigma_bar)},
                          GE, float(f.packets - sigma_bar))

    # --- per-device energy budgets -----------------------------------------
    for d in range(n):
        coeffs: dict[int, float] = {}
        for fi, f in enumerate(msgs):
            for t in TECHS:
                for k in f.steps:
                    if scn.capacity_bps(f.src, f.dst, k, t) <= 0:
                        continue
                    xs, xr = xi(f.src, f.dst, k, t)
                    if f.src == d:
                        coeffs[m.ytilde[fi, t, k]] = coeffs.get(m.ytilde[fi, t, k], 0.0) + xs
                    if f.dst == d:
                        coeffs[m.ytilde[fi, t, k]] = coeffs.get(m.ytilde[fi, t, k], 0.0) + xr
        m.add_con(f"energy_{d}", "energy-budget", coeffs, LE,
                  float(scn.devices.budgets_j[d]) / scn.packet_bits)

    # --- delay extraction ---------------------------------------------------
    for fi, f in enumerate(msgs):
        dv = m.delta[fi]
        for k in f.steps:
            off = k - f.window_start + 1
            xk = {m.x[f.src, f.dst, t, k]: float(chi) for t in TECHS}
            m.add_con(f"delay_ub_{fi}_{k}", "delay-extraction",
                      {dv: 1.0, **xk}, LE, float(off + chi))
            m.add_con(f"delay_lb_{fi}_{k}", "delay-extraction",
                      {dv: 1.0, **{v: -c for v, c in xk.items()}}, GE, float(off - chi))
        allx = {m.x[f.src, f.dst, t, k]: float(chi) for t in TECHS for k in f.steps}
        m.add_con(f"delay_miss_{fi}", "delay-extraction",
                  {dv: 1.0, **allx}, GE, float(chi))

    # --- technology-state tracking (Big-M = 1) ------------------------------
    for j in range(n):
        for k in range(1, horizon + 1):
            owc_use = {}
            rf_use = {}
            any_use = {}
            for i in range(n):
                for var in (m.x[i, j, OWC, k], m.x[j, i, OWC, k]):
                    owc_use[var] = owc_use.get(var, 0.0) + 1.0
                for var in (m.x[i, j, RF, k], m.x[j, i, RF, k]):
                    rf_use[var] = rf_use.get(var, 0.0) + 1.0
            for d in (owc_use, rf_use):
                for var, c in d.items():
                    any_use[var] = any_use.get(var, 0.0) + c
            sv = m.s[j, k]
            m.add_con(f"state_owc_{j}_{k}", "technology-state",
                      {sv: 1.0, **{v: -c for v, c in owc_use.items()}}, GE, 0.0)
            m.add_con(f"state_rf_{j}_{k}", "technology-state",
                      {sv: 1.0, **rf_use}, LE, 1.0)
            prev = {m.s[j, k - 1]: -1.0} if k > 1 else {}  # s at step 0 is RF
            m.add_con(f"state_hold_up_{j}_{k}", "technology-state",
                      {sv: 1.0, **prev, **{v: -c for v, c in any_use.items()}}, LE, 0.0)
            m.add_con(f"state_hold_dn_{j}_{k}", "technology-state",
                      {sv: -1.0, **{v: -c for v, c in prev.items()},
                       **{v: -c for v, c in any_use.items()}}, LE, 0.0)

    # --- switching limit ----------------------------------------------------
    for j in range(n):
        for k in range(1, horizon + 1):
            prev = {m.s[j, k - 1]: -1.0} if k > 1 else {}
            m.add_con(f"switch_up_{j}_{k}", "switching-limit",
                      {m.z[j, k]: 1.0, m.s[j, k]: -1.0, **{v: -c for v, c in prev.items()}},
                      GE, 0.0)
            m.add_con(f"switch_dn_{j}_{k}", "switching-limit",
                      {m.z[j, k]: 1.0, m.s[j, k]: 1.0, **prev}, GE, 0.0)
        m.add_con(f"switch_cap_{j}", "switching-limit",
                  {m.z[j, k]: 1.0 for k in range(1, horizon + 1)}, LE, float(omega))

    return m
