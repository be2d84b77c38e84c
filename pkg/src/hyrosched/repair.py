"""Feasibility repair for predicted per-edge class probabilities.

A snapshot prediction assigns each ordered device pair a probability vector
over the 8 augmented classes.  Hard-labeling the argmax can yield infeasible
schedules (a device active on several edges at once, or a chosen technology
the link doesn't offer).  ``top2_repair`` fixes that deterministically: the
violating edge with the smallest top-1/top-2 confidence gap is demoted to its
second choice, and to the "available but not used" class of its availability
code if that still conflicts — so termination and feasibility are
unconditional.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graphio import AUGMENT_PAIRS, N_CLASSES, augment_label, decode_label, edge_order

#: availability code -> augmented class meaning "available but not used"
FALLBACK_CLASS = {0: 0, 1: 1, 2: 3, 3: 5}

PROB_TOL = 1e-6


@dataclass(frozen=True)
class ConflictMap:
    """Pairwise conflict structure: one row per unordered device pair, listing
    the indices of every ordered pair that shares a device with it."""

    n_devices: int
    pairs: tuple[tuple[int, int], ...]  # unordered, lexicographic
    groups: np.ndarray  # (C(n,2), group size) of ordered-pair indices

    @property
    def shape(self) -> tuple[int, int]:
        return self.groups.shape


@dataclass(frozen=True)
class RepairViolation:
    kind: str  # "device-conflict" or "incompatible"
    index: int  # device id or edge index
    detail: str


def conflict_map(n_devices: int) -> ConflictMap:
    """Conflict incidence for ``n_devices``: C(n,2) rows; each row's group
    holds all ordered pairs touching either row device — n(n-1) − (n-2)(n-3)
    of them (6 rows of 10 for four devices)."""
    if n_devices < 2:
        raise ValueError("need at least two devices")
    ordered = edge_order(n_devices)
    pairs = tuple((a, b) for a in range(n_devices) for b in range(a + 1, n_devices))
    groups = np.array([
        [e for e, (i, j) in enumerate(ordered) if i in (a, b) or j in (a, b)]
        for a, b in pairs
    ], dtype=int)
    return ConflictMap(n_devices=n_devices, pairs=pairs, groups=groups)


def _chosen_ok(availability: int, chosen: int) -> bool:
    if chosen == 0:
        return True
    if chosen == 1:
        return availability in (1, 3)
    if chosen == 2:
        return availability in (2, 3)
    return False


def detect_violations(chosen: np.ndarray, availability: np.ndarray,
                      n_devices: int) -> list[RepairViolation]:
    """Violations of one snapshot's hard labels: devices on multiple active
    edges, and chosen technologies the link's availability doesn't offer."""
    pairs = edge_order(n_devices)
    out: list[RepairViolation] = []
    active_count = np.zeros(n_devices, dtype=int)
    for e, (i, j) in enumerate(pairs):
        if chosen[e] > 0:
            active_count[i] += 1
            active_count[j] += 1
        if not _chosen_ok(int(availability[e]), int(chosen[e])):
            out.append(RepairViolation(
                "incompatible", e,
                f"edge {pairs[e]} chose {int(chosen[e])} under availability {int(availability[e])}",
            ))
    for d in range(n_devices):
        if active_count[d] > 1:
            out.append(RepairViolation(
                "device-conflict", d, f"device {d} active on {active_count[d]} edges"))
    return out


def top2_repair(probs: np.ndarray, availability: np.ndarray,
                n_devices: int) -> np.ndarray:
    """Turn per-edge class probabilities into feasible augmented labels.

    ``probs`` is (E, 8) with rows summing to 1 (tolerance 1e-6); the returned
    array holds augmented class codes consistent with ``availability`` and
    free of device conflicts.  Deterministic; edges not involved in any
    violation are never touched.
    """
    probs = np.asarray(probs, dtype=float)
    pairs = edge_order(n_devices)
    if probs.shape != (len(pairs), N_CLASSES):
        raise ValueError(f"expected probabilities shaped {(len(pairs), N_CLASSES)}")
    if not np.allclose(probs.sum(axis=1), 1.0, atol=PROB_TOL):
        raise ValueError("probability rows must sum to 1")

    top_order = np.argsort(-probs, axis=1, kind="stable")
    top1 = top_order[:, 0]
    top2 = top_order[:, 1]
    gaps = probs[np.arange(len(pairs)), top1] - probs[np.arange(len(pairs)), top2]

    # stage 0: top-1 class; stage 1: top-2; stage 2: forced "not used"
    stage = np.zeros(len(pairs), dtype=int)

    def code_at(e: int) -> int:
        if stage[e] == 0:
            return int(top1[e])
        if stage[e] == 1:
            return int(top2[e])
        return FALLBACK_CLASS[int(availability[e])]

    def chosen_at(e: int) -> int:
        return AUGMENT_PAIRS[code_at(e)][1]

    while True:
        chosen = np.array([chosen_at(e) for e in range(len(pairs))])
        violations = detect_violations(chosen, availability, n_devices)
        if not violations:
            break
        involved: set[int] = set()
        for v in violations:
            if v.kind == "incompatible":
                involved.add(v.index)
            else:
                for e, (i, j) in enumerate(pairs):
                    if chosen[e] > 0 and v.index in (i, j):
                        involved.add(e)
        candidates = [e for e in sorted(involved) if stage[e] < 2]
        # At least one advanceable edge always exists: fully-demoted edges
        # choose class "not used", which cannot be part of any violation.
        target = min(candidates, key=lambda e: (gaps[e], e))
        stage[target] += 1

    return np.array([
        augment_label(int(availability[e]), chosen_at(e)) for e in range(len(pairs))
    ], dtype=int)
