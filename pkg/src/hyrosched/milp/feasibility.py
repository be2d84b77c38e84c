"""Schedule feasibility checking, independent of the optimization model.

Works directly from the scenario semantics (who may talk to whom, when, at
what SNR, under which budget) rather than from the emitted constraint matrix,
so it can catch model-building bugs.  Each violation names the rule family it
breaks and the indices involved.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..channel import OWC, RF
from ..scenario import Scenario

TECHS = (RF, OWC)

#: Absolute slack for comparisons against real-valued capacities/budgets.
EPS = 1e-9


@dataclass(frozen=True)
class Violation:
    family: str
    indices: tuple
    detail: str

    def __str__(self) -> str:
        return f"[{self.family}] {self.indices}: {self.detail}"


def _message_at(scn: Scenario, i: int, j: int, k: int):
    """Index of the message whose window covers step k on pair (i, j)."""
    for fi, f in enumerate(scn.messages):
        if f.src == i and f.dst == j and f.window_start <= k <= f.window_end:
            return fi
    return None


def check_feasibility(
    scn: Scenario,
    x: np.ndarray,
    ytilde: dict[tuple[int, int, int], int],
    delays: dict[int, int] | None = None,
    omega: int | None = None,
) -> list:
    """Validate a schedule against every scheduling rule.

    ``x`` is the (N, N, 2, T) assignment tensor (step k at index k-1),
    ``ytilde`` maps (message index, technology, step) to sent packet counts,
    ``delays`` optionally carries per-message delay values to verify, and
    ``omega`` is the per-device technology switching cap (default T // 2).

    Returns a list of :class:`Violation`; empty means feasible.
    """
    n, horizon = scn.n_devices, scn.horizon
    if omega is None:
        omega = scn.horizon // 2
    out: list[Violation] = []
    if x.shape != (n, n, 2, horizon):
        return [Violation("shape", (x.shape,), f"expected {(n, n, 2, horizon)}")]

    # One transmission and one reception per device per step; no device both
    # sends and receives in the same step.
    for k in range(1, horizon + 1):
        xs = x[:, :, :, k - 1]
        for d in range(n):
            tx = int(xs[d].sum())
            rx = int(xs[:, d].sum())
            if tx > 1:
                out.append(Violation("one-link-tx", (d, k), f"{tx} simultaneous transmissions"))
            if rx > 1:
                out.append(Violation("one-link-rx", (d, k), f"{rx} simultaneous receptions"))
            if tx >= 1 and rx >= 1:
                out.append(Violation(
                    "no-simultaneous-roles", (d, k), "device both transmits and receives"))

    for i in range(n):
        for j in range(n):
            for t in TECHS:
                for k in range(1, horizon + 1):
                    if not x[i, j, t, k - 1]:
                        continue
                    if i == j:
                        out.append(Violation("no-self-loop", (i, t, k), "self transmission"))
                        continue
                    if not scn.comm_schedule[i, j, k - 1]:
                        out.append(Violation(
                            "message-exists", (i, j, k), "no message window covers this step"))
                    if not scn.link_admissible(i, j, k, t):
                        out.append(Violation(
                            "snr-threshold", (i, j, t, k), "link below admission SNR"))

    # Per-message rules: at most one transmission, packets within capacity.
    tx_steps: dict[int, list[tuple[int, int]]] = {fi: [] for fi in range(len(scn.messages))}
    for fi, f in enumerate(scn.messages):
        for t in TECHS:
            for k in f.steps:
                if x[f.src, f.dst, t, k - 1]:
                    tx_steps[fi].append((t, k))
        if len(tx_steps[fi]) > 1:
            out.append(Violation("at-most-once", (fi,),
                                 f"transmitted {len(tx_steps[fi])} times: {tx_steps[fi]}"))

    for (fi, t, k), cnt in ytilde.items():
        if cnt == 0:
            continue
        if fi >= len(scn.messages):
            out.append(Violation("packet-linearization", (fi, t, k), "unknown message"))
            continue
        f = scn.messages[fi]
        if cnt < 0 or cnt > f.packets:
            out.append(Violation("packet-linearization", (fi, t, k),
                                 f"{cnt} packets outside [0, {f.packets}]"))
        if k not in f.steps or not x[f.src, f.dst, t, k - 1]:
            out.append(Violation("packet-linearization", (fi, t, k),
                                 "packets sent without a matching transmission"))
            continue
        cap = scn.packet_capacity(f.src, f.dst, k, t)
        if cnt > cap + EPS:
            out.append(Violation("packet-linearization", (fi, t, k),
                                 f"{cnt} packets exceed step capacity {cap:.6g}"))

    # Per-device energy budgets.
    for d in range(n):
        spent = 0.0
        for (fi, t, k), cnt in ytilde.items():
            if fi >= len(scn.messages) or cnt <= 0:
                continue
            f = scn.messages[fi]
            if d not in (f.src, f.dst):
                continue
            if scn.capacity_bps(f.src, f.dst, k, t) <= 0:
                continue
            xi_s, xi_r = scn.energy_coeffs(f.src, f.dst, k, t)
            if f.src == d:
                spent += cnt * scn.packet_bits * xi_s
            if f.dst == d:
                spent += cnt * scn.packet_bits * xi_r
        budget = float(scn.devices.budgets_j[d])
        if spent > budget * (1.0 + EPS) + EPS:
            out.append(Violation("energy-budget", (d,),
                                 f"spent {spent:.6g} J of {budget:.6g} J"))

    # Delay extraction: the step offset when transmitted, the sentinel when not.
    if delays is not None:
        from .model import delay_sentinel

        chi = delay_sentinel(scn)
        for fi, f in enumerate(scn.messages):
            expected = chi
            if len(tx_steps[fi]) == 1:
                (_, k) = tx_steps[fi][0]
                expected = k - f.window_start + 1
            got = delays.get(fi)
            if got != expected:
                out.append(Violation("delay-extraction", (fi,),
                                     f"delay {got}, expected {expected}"))

    # Technology switching cap: every use pins the device's state, so the
    # minimum number of state changes is the number of tech changes along the
    # device's use sequence (devices start on RF).
    for d in range(n):
        uses: list[tuple[int, int]] = []  # (step, tech)
        for k in range(1, horizon + 1):
            techs = {t for t in TECHS
                     if x[d, :, t, k - 1].any() or x[:, d, t, k - 1].any()}
            if len(techs) > 1:
                out.append(Violation("technology-state", (d, k),
                                     "device uses both technologies in one step"))
            for t in techs:
                uses.append((k, t))
        state = RF
        switches = 0
        for _, t in uses:
            if t != state:
                switches += 1
                state = t
        if switches > omega:
            out.append(Violation("switching-limit", (d,),
                                 f"{switches} technology switches exceed cap {omega}"))

    return out
