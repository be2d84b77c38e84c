"""Exhaustive reference optimizer for small scheduling instances.

Enumerates every schedule outright — per message: skip it, or pick an
admissible (technology, step) slot together with an exact packet count — and
keeps the best objective among combinations that respect device exclusivity,
switching caps, and energy budgets.  No linear programming, no branching, no
linearization: an entirely independent route to the optimum, usable as an
oracle for the branch-and-bound solver on instances small enough to afford it.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from ..channel import OWC, RF
from ..scenario import Scenario
from .model import delay_sentinel

TECHS = (RF, OWC)


class SizeError(Exception):
    """The instance's schedule space is too large to enumerate."""


@dataclass(frozen=True)
class OracleResult:
    objective: float
    #: message index -> (technology, step, packets sent) or None when skipped
    assignment: dict
    delays: dict
    candidates: int


def brute_force_oracle(
    scn: Scenario,
    alpha1: float = 0.35,
    alpha2: float = 0.65,
    omega: int | None = None,
    size_cap: float = 1e8,
) -> OracleResult:
    """Find the optimal schedule by full enumeration.

    Raises :class:`SizeError` when the number of candidate schedules exceeds
    ``size_cap``.  Objective weights, normalizers, and energy coefficients are
    computed exactly as in the optimization model so objectives compare to
    tight tolerance.
    """
    msgs = list(scn.messages)
    chi = delay_sentinel(scn)
    if omega is None:
        omega = scn.horizon // 2

    # Normalizers, identical to the model's.
    s1 = float(chi * len(msgs)) if msgs else 1.0
    best_rate = 0.0
    xi_cache: dict[tuple[int, int, int, int], tuple[float, float]] = {}

    def xi(i, j, k, t):
        key = (i, j, k, t)
        if key not in xi_cache:
            xi_cache[key] = scn.energy_coeffs(i, j, k, t)
        return xi_cache[key]

    for f in msgs:
        for k in f.steps:
            for t in TECHS:
                if scn.capacity_bps(f.src, f.dst, k, t) > 0:
                    xs, xr = xi(f.src, f.dst, k, t)
                    best_rate = max(best_rate, 1.0 / (xr + xs))
    total_packets = sum(f.packets for f in msgs)
    s2 = total_packets * best_rate if total_packets and best_rate else 1.0

    # Choice list per message: None (skip) or (tech, step, packets).
    choices: list[list] = []
    size = 1.0
    for f in msgs:
        opts: list = [None]
        for t in TECHS:
            for k in f.steps:
                if not scn.link_admissible(f.src, f.dst, k, t):
                    continue
                # floor(cap) matches the integer bound the solver enforces
                max_q = min(f.packets,
                            int(math.floor(scn.packet_capacity(f.src, f.dst, k, t))))
                opts.extend((t, k, q) for q in range(max_q + 1))
        choices.append(opts)
        size *= len(opts)
    if size > size_cap:
        raise SizeError(f"{size:.3g} candidate schedules exceed the cap {size_cap:.3g}")

    n = scn.n_devices
    budgets_bits = [float(b) / scn.packet_bits for b in scn.devices.budgets_j]

    best_obj = math.inf
    best_pick: tuple = ()
    count = 0
    for pick in itertools.product(*choices):
        count += 1
        if not _combination_feasible(scn, msgs, pick, omega, budgets_bits, xi):
            continue
        obj = 0.0
        for f, choice in zip(msgs, pick):
            if choice is None:
                obj += alpha1 / s1 * chi
            else:
                t, k, q = choice
                obj += alpha1 / s1 * (k - f.window_start + 1)
                xs, xr = xi(f.src, f.dst, k, t)
                obj -= alpha2 / (s2 * (xr + xs)) * q
        if obj < best_obj - 1e-15:
            best_obj = obj
            best_pick = pick

    assignment = {fi: choice for fi, choice in enumerate(best_pick)}
    delays = {
        fi: (chi if choice is None else choice[1] - msgs[fi].window_start + 1)
        for fi, choice in enumerate(best_pick)
    }
    return OracleResult(objective=best_obj, assignment=assignment,
                        delays=delays, candidates=count)


def _combination_feasible(scn, msgs, pick, omega, budgets_bits, xi) -> bool:
    n = scn.n_devices
    # Device exclusivity: each device joins at most one link per step (covers
    # the one-transmission, one-reception, and no-dual-role rules at once).
    busy: set[tuple[int, int]] = set()
    for f, choice in zip(msgs, pick):
        if choice is None:
            continue
        _, k, _ = choice
        for d in (f.src, f.dst):
            if (d, k) in busy:
                return False
            busy.add((d, k))

    # Switching caps: minimal state changes along each device's use sequence.
    for d in range(n):
        uses = sorted(
            (choice[1], choice[0])
            for f, choice in zip(msgs, pick)
            if choice is not None and d in (f.src, f.dst)
        )
        state, switches = RF, 0
        for _, t in uses:
            if t != state:
                switches += 1
                state = t
        if switches > omega:
            return False

    # Energy budgets (per-bit form, matching the model's row scaling).
    spent = [0.0] * n
    for f, choice in zip(msgs, pick):
        if choice is None or choice[2] == 0:
            continue
        t, k, q = choice
        xs, xr = xi(f.src, f.dst, k, t)
        spent[f.src] += q * xs
        spent[f.dst] += q * xr
    for d in range(n):
        if spent[d] > budgets_bits[d] + 1e-12:
            return False
    return True
