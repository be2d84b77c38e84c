"""Schedule replay: apply a solved schedule to a scenario, step time forward,
and record the ground-truth system evolution plus summary metrics.

Ages are measured in steps on the continuous interval [0, horizon]; an update
received in slot k takes effect at t = k + 1.  A message counts as delivered
only when it actually carries packets; a transmission of zero packets keeps
its delay but neither resets any age nor moves any energy.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .channel import OWC, RF
from .milp.feasibility import check_feasibility
from .milp.model import delay_sentinel
from .milp.solver import ScheduleSolution
from .scenario import Scenario

TECHS = (RF, OWC)


class InfeasibleScheduleError(ValueError):
    """A schedule failed feasibility checking; carries the violations."""

    def __init__(self, violations):
        super().__init__(
            "schedule is infeasible: " + "; ".join(str(v) for v in violations)
        )
        self.violations = violations


@dataclass
class Trace:
    """Ground-truth evolution of one replayed schedule."""

    scenario: Scenario
    #: residual energy per device, column k holds the level after step k
    residual_j: np.ndarray  # (N, T+1)
    #: delivered packets per step: (step, message index, src, dst, tech, packets)
    deliveries: list[tuple[int, int, int, int, int, int]]
    #: peer each device talks to at step k (-1 when idle)
    active_peer: np.ndarray  # (N, T)
    #: technology used at step k (-1 when idle)
    active_tech: np.ndarray  # (N, T)
    #: technology-state trajectory; column 0 is the initial (RF) state
    s: np.ndarray  # (N, T+1)
    #: message index -> (step, tech, packets) for transmitted messages
    tx: dict[int, tuple[int, int, int]]
    #: message indices whose window closed without a transmission
    expired: list[int]

    def delays(self) -> dict[int, int]:
        """Per-message delay: step offset when transmitted, sentinel when not."""
        chi = delay_sentinel(self.scenario)
        out = {}
        for fi, f in enumerate(self.scenario.messages):
            if fi in self.tx:
                out[fi] = self.tx[fi][0] - f.window_start + 1
            else:
                out[fi] = chi
        return out


@dataclass
class MetricsReport:
    m_aoi: float
    p_aoi: float
    per_type: dict[int, tuple[float, float]]
    successful_transmission_rate: float
    rate_vacuous: bool
    total_energy_j: float
    energy_per_bit_j: float
    switch_count: list[int]
    packets_exchanged: int


def simulate(scn: Scenario, sol: ScheduleSolution, omega: int | None = None) -> Trace:
    """Replay ``sol`` on ``scn``; raises :class:`InfeasibleScheduleError` when
    the schedule violates any scheduling rule."""
    violations = check_feasibility(scn, sol.x, sol.ytilde, omega=omega)
    if violations:
        raise InfeasibleScheduleError(violations)
    n, horizon = scn.n_devices, scn.horizon

    residual = np.zeros((n, horizon + 1))
    residual[:, 0] = scn.devices.budgets_j
    active_peer = np.full((n, horizon), -1, dtype=int)
    active_tech = np.full((n, horizon), -1, dtype=int)
    deliveries: list[tuple[int, int, int, int, int, int]] = []
    tx: dict[int, tuple[int, int, int]] = {}

    for fi, f in enumerate(scn.messages):
        for t in TECHS:
            for k in f.steps:
                if sol.x[f.src, f.dst, t, k - 1]:
                    tx[fi] = (k, t, sol.ytilde.get((fi, t, k), 0))

    for k in range(1, horizon + 1):
        residual[:, k] = residual[:, k - 1]
        for fi, (kk, t, q) in tx.items():
            if kk != k:
                continue
            f = scn.messages[fi]
            active_peer[f.src, k - 1] = f.dst
            active_peer[f.dst, k - 1] = f.src
            active_tech[f.src, k - 1] = t
            active_tech[f.dst, k - 1] = t
            if q >= 1:
                xi_s, xi_r = scn.energy_coeffs(f.src, f.dst, k, t)
                residual[f.src, k] -= q * scn.packet_bits * xi_s
                residual[f.dst, k] -= q * scn.packet_bits * xi_r
                deliveries.append((k, fi, f.src, f.dst, t, q))

    # Minimal-switch technology states: hold the previous state until a
    # transmission forces a change.
    s = np.zeros((n, horizon + 1), dtype=np.uint8)
    for d in range(n):
        for k in range(1, horizon + 1):
            s[d, k] = active_tech[d, k - 1] if active_tech[d, k - 1] >= 0 else s[d, k - 1]

    expired = [fi for fi in range(len(scn.messages)) if fi not in tx]
    assert (residual >= -1e-12).all(), "energy went negative despite feasibility"
    return Trace(
        scenario=scn,
        residual_j=residual,
        deliveries=sorted(deliveries),
        active_peer=active_peer,
        active_tech=active_tech,
        s=s,
        tx=tx,
        expired=expired,
    )


# ---------------------------------------------------------------------------
# Age of information


def aoi_from_events(
    horizon: float, events: list[tuple[float, float]]
) -> tuple[float, float]:
    """Exact (mean age, peak age) of one piecewise-linear age sawtooth.

    ``events`` holds (reset time, generation time) pairs: at each reset time r
    the age drops to r - g.  Age starts at 0 at t = 0 (generation reference 0)
    and grows with slope 1 between resets.  The mean is the exact integral of
    the sawtooth over [0, horizon] divided by the horizon; the peak age is the
    mean of the ages immediately before each reset, or the final age when
    there are no resets at all.
    """
    u = 0.0
    t_prev = 0.0
    integral = 0.0
    peaks: list[float] = []
    for r, g in sorted(events):
        peaks.append(r - u)
        span = min(r, horizon)
        if span > t_prev:
            integral += ((span - u) ** 2 - (t_prev - u) ** 2) / 2.0
            t_prev = span
        u = max(u, g)
    if horizon > t_prev:
        integral += ((horizon - u) ** 2 - (t_prev - u) ** 2) / 2.0
    mean = integral / horizon
    peak = sum(peaks) / len(peaks) if peaks else horizon - u
    return mean, peak


def aoi(trace: Trace) -> tuple[float, float, dict[int, tuple[float, float]]]:
    """Network AoI: mean and peak age averaged over destination streams, plus
    a per-data-type breakdown.

    A stream is one (src, dst, data type) triple with at least one message;
    a delivery in slot k of a message generated at its window start resets
    that stream's age at t = k + 1.  Streams that never receive anything age
    from the horizon start (generation reference 0).
    """
    scn = trace.scenario
    streams: dict[tuple[int, int, int], list[tuple[float, float]]] = {}
    for fi, f in enumerate(scn.messages):
        streams.setdefault((f.src, f.dst, f.data_type), [])
    for _, fi, i, j, _, _ in trace.deliveries:
        f = scn.messages[fi]
        k = trace.tx[fi][0]
        streams[(i, j, f.data_type)].append((float(k + 1), float(f.window_start)))

    per_stream = {
        key: aoi_from_events(float(scn.horizon), events)
        for key, events in streams.items()
    }
    if not per_stream:
        return 0.0, 0.0, {}
    m_all = float(np.mean([m for m, _ in per_stream.values()]))
    p_all = float(np.mean([p for _, p in per_stream.values()]))
    per_type: dict[int, tuple[float, float]] = {}
    for l in range(scn.l_count):
        vals = [v for (s_, d_, lt), v in per_stream.items() if lt == l]
        if vals:
            per_type[l] = (
                float(np.mean([m for m, _ in vals])),
                float(np.mean([p for _, p in vals])),
            )
    return m_all, p_all, per_type


def rates_and_energy(trace: Trace) -> MetricsReport:
    """Summary metrics of one trace (rates, energy, switching)."""
    scn = trace.scenario
    generated = sum(f.packets for f in scn.messages)
    delivered = sum(q for *_, q in trace.deliveries)
    vacuous = generated == 0
    rate = 1.0 if vacuous else delivered / generated
    total_energy = float(
        (trace.residual_j[:, 0] - trace.residual_j[:, -1]).sum()
    )
    bits = delivered * scn.packet_bits
    if bits > 0:
        epb = total_energy / bits
    else:
        epb = 0.0 if total_energy == 0.0 else math.inf
    switches = [int(np.count_nonzero(np.diff(trace.s[d].astype(int))))
                for d in range(scn.n_devices)]
    m_aoi, p_aoi, per_type = aoi(trace)
    return MetricsReport(
        m_aoi=m_aoi,
        p_aoi=p_aoi,
        per_type=per_type,
        successful_transmission_rate=rate,
        rate_vacuous=vacuous,
        total_energy_j=total_energy,
        energy_per_bit_j=epb,
        switch_count=switches,
        packets_exchanged=delivered,
    )


CSV_FIELDS = [
    "label",
    "m_aoi",
    "p_aoi",
    "successful_transmission_rate",
    "total_energy_j",
    "energy_per_bit_j",
    "packets_exchanged",
    "switch_count_max",
]


def metrics_to_csv(rows: list[tuple[str, MetricsReport]]) -> str:
    """One CSV row per labeled report (label is e.g. 'seed 7 hybrid')."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for label, r in rows:
        writer.writerow([
            label,
            f"{r.m_aoi:.12g}",
            f"{r.p_aoi:.12g}",
            f"{r.successful_transmission_rate:.12g}",
            f"{r.total_energy_j:.12g}",
            f"{r.energy_per_bit_j:.12g}",
            r.packets_exchanged,
            max(r.switch_count, default=0),
        ])
    return buf.getvalue()
