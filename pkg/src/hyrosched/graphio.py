"""Graph snapshot extraction for the learned scheduler: per-step input and
recorded (ground truth) snapshots, 8-class label augmentation, inverse
frequency class weights, and line-delimited dataset / prediction files.

Frozen feature layouts (documented schema, version 1):

* node features, one row per device:
  ``[energy_j, queued_packets_type_0 .. queued_packets_type_{L-1},
  send_energy_per_bit_rf, send_energy_per_bit_owc]`` — energy is the initial
  budget in input snapshots and the residual after step k in recorded ones;
  queued packets count packets of open messages originating at the device;
  the per-bit send energies average over the device's admissible outgoing
  links at step k (0 when it has none for that technology).
* edge features, one row per ordered device pair in lexicographic order:
  ``[availability_code, pending_messages, pending_packets,
  snr_rf_linear, snr_owc_linear]`` with SNR 0 where the link is impossible.

Availability codes: 0 nothing, 1 RF only, 2 OWC only, 3 both.  Chosen-link
labels: 0 none, 1 RF, 2 OWC.  The augmented label enumerates the 8 compatible
(availability, chosen) pairs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .channel import OWC, RF
from .replay import Trace
from .scenario import Scenario

DATASET_SCHEMA = "hyrosched-graph-dataset"
DATASET_VERSION = 1
PREDICTION_SCHEMA = "hyrosched-predictions"
PREDICTION_VERSION = 1

N_CLASSES = 8

#: augmented code -> (availability, chosen) in the fixed enumeration order
AUGMENT_PAIRS: tuple[tuple[int, int], ...] = (
    (0, 0), (1, 0), (1, 1), (2, 0), (2, 2), (3, 0), (3, 1), (3, 2),
)
_AUGMENT_INDEX = {pair: code for code, pair in enumerate(AUGMENT_PAIRS)}


@dataclass(frozen=True)
class GraphSnapshot:
    kind: str  # "input" or "recorded"
    step: int  # 1-based
    n_devices: int
    node_features: np.ndarray  # (N, F)
    edge_index: tuple[tuple[int, int], ...]  # ordered pairs, lexicographic
    edge_features: np.ndarray  # (E, 5)
    labels: np.ndarray | None  # (E,) chosen-link codes, recorded only
    seed: int

    def availability(self) -> np.ndarray:
        return self.edge_features[:, 0].astype(int)


def edge_order(n: int) -> tuple[tuple[int, int], ...]:
    return tuple((i, j) for i in range(n) for j in range(n) if i != j)


def availability_code(scn: Scenario, i: int, j: int, k: int) -> int:
    code = 0
    if scn.link_admissible(i, j, k, RF):
        code += 1
    if scn.link_admissible(i, j, k, OWC):
        code += 2
    return code


def _pending(scn: Scenario, i: int, j: int, k: int,
             delivered_before: set[int] | None = None) -> tuple[int, int]:
    msgs = 0
    packets = 0
    for fi, f in enumerate(scn.messages):
        if f.src != i or f.dst != j or not (f.window_start <= k <= f.window_end):
            continue
        if delivered_before and fi in delivered_before:
            continue
        msgs += 1
        packets += f.packets
    return msgs, packets


def _node_features(scn: Scenario, k: int, energy: np.ndarray,
                   done: set[int] | None = None) -> np.ndarray:
    n = scn.n_devices
    feats = np.zeros((n, 1 + scn.l_count + 2))
    feats[:, 0] = energy
    for fi, f in enumerate(scn.messages):
        if done and fi in done:
            continue
        if f.window_start <= k <= f.window_end:
            feats[f.src, 1 + f.data_type] += f.packets
    for i in range(n):
        for t, col in ((RF, 1 + scn.l_count), (OWC, 2 + scn.l_count)):
            costs = [
                scn.energy_coeffs(i, j, k, t)[0]
                for j in range(n)
                if j != i and scn.link_admissible(i, j, k, t)
            ]
            feats[i, col] = float(np.mean(costs)) if costs else 0.0
    return feats


def _edge_features(scn: Scenario, k: int,
                   done: set[int] | None = None) -> np.ndarray:
    pairs = edge_order(scn.n_devices)
    feats = np.zeros((len(pairs), 5))
    for e, (i, j) in enumerate(pairs):
        msgs, packets = _pending(scn, i, j, k, done)
        snr = scn.visibility.snr_linear[i, j, k - 1]
        feats[e] = [
            availability_code(scn, i, j, k),
            msgs,
            packets,
            float(snr[RF]) if np.isfinite(snr[RF]) else 0.0,
            float(snr[OWC]) if np.isfinite(snr[OWC]) else 0.0,
        ]
    return feats


def build_input_snapshot(scn: Scenario, k: int) -> GraphSnapshot:
    """Snapshot of prior knowledge at step k: planned schedule, thresholded
    availability, and initial energy — nothing from any solved schedule."""
    if not 1 <= k <= scn.horizon:
        raise ValueError(f"step {k} outside horizon 1..{scn.horizon}")
    return GraphSnapshot(
        kind="input",
        step=k,
        n_devices=scn.n_devices,
        node_features=_node_features(scn, k, np.asarray(scn.devices.budgets_j, dtype=float)),
        edge_index=edge_order(scn.n_devices),
        edge_features=_edge_features(scn, k),
        labels=None,
        seed=scn.seed,
    )


def build_recorded_snapshot(trace: Trace, k: int) -> GraphSnapshot:
    """Ground-truth snapshot after step k: evolved energy and queues, plus the
    chosen-link label per edge."""
    scn = trace.scenario
    if not 1 <= k <= scn.horizon:
        raise ValueError(f"step {k} outside horizon 1..{scn.horizon}")
    done = {fi for fi, (kk, _, _) in trace.tx.items() if kk <= k}
    pairs = edge_order(scn.n_devices)
    labels = np.zeros(len(pairs), dtype=int)
    for fi, (kk, t, _) in trace.tx.items():
        if kk != k:
            continue
        f = scn.messages[fi]
        labels[pairs.index((f.src, f.dst))] = t + 1
    return GraphSnapshot(
        kind="recorded",
        step=k,
        n_devices=scn.n_devices,
        node_features=_node_features(scn, k, trace.residual_j[:, k], done),
        edge_index=pairs,
        edge_features=_edge_features(scn, k, done),
        labels=labels,
        seed=scn.seed,
    )


def augment_label(availability: int, chosen: int) -> int:
    """Map a compatible (availability, chosen-link) pair to its 8-class code."""
    try:
        return _AUGMENT_INDEX[(availability, chosen)]
    except KeyError:
        raise ValueError(
            f"incompatible pair: chosen {chosen} not available under code {availability}"
        ) from None


def decode_label(code: int) -> tuple[int, int]:
    """Inverse of :func:`augment_label`."""
    if not 0 <= code < N_CLASSES:
        raise ValueError(f"augmented code {code} outside 0..{N_CLASSES - 1}")
    return AUGMENT_PAIRS[code]


def class_weights(codes) -> np.ndarray:
    """Inverse-frequency weights over augmented codes, normalized so that
    sum(w_c * count_c) = total count; classes absent from ``codes`` get the
    maximum observed weight."""
    codes = np.asarray(list(codes), dtype=int)
    if codes.size == 0:
        raise ValueError("cannot weight an empty label collection")
    counts = np.bincount(codes, minlength=N_CLASSES)
    present = counts > 0
    weights = np.zeros(N_CLASSES)
    total = counts.sum()
    weights[present] = total / (present.sum() * counts[present])
    weights[~present] = weights[present].max()
    return weights


# ---------------------------------------------------------------------------
# Dataset serialization: JSON-lines with a versioned header record.

def _snapshot_record(s: GraphSnapshot) -> dict:
    rec = {
        "kind": s.kind,
        "step": s.step,
        "n_devices": s.n_devices,
        "seed": s.seed,
        "node_features": s.node_features.tolist(),
        "edge_features": s.edge_features.tolist(),
    }
    if s.labels is not None:
        rec["labels"] = s.labels.tolist()
    return rec


def _snapshot_from_record(rec: dict) -> GraphSnapshot:
    labels = rec.get("labels")
    return GraphSnapshot(
        kind=rec["kind"],
        step=rec["step"],
        n_devices=rec["n_devices"],
        node_features=np.array(rec["node_features"], dtype=float),
        edge_index=edge_order(rec["n_devices"]),
        edge_features=np.array(rec["edge_features"], dtype=float),
        labels=None if labels is None else np.array(labels, dtype=int),
        seed=rec["seed"],
    )


def write_dataset(snapshots, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"schema": DATASET_SCHEMA, "version": DATASET_VERSION}) + "\n")
        for s in snapshots:
            fh.write(json.dumps(_snapshot_record(s)) + "\n")


def read_dataset(path: str) -> list[GraphSnapshot]:
    out: list[GraphSnapshot] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                rec = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}: line {lineno}: corrupted record") from exc
            if lineno == 1:
                if rec.get("schema") != DATASET_SCHEMA:
                    raise ValueError(f"{path}: line 1: not a graph dataset")
                if rec.get("version") != DATASET_VERSION:
                    raise ValueError(
                        f"{path}: line 1: unsupported version {rec.get('version')!r}"
                    )
                continue
            try:
                out.append(_snapshot_from_record(rec))
            except KeyError as exc:
                raise ValueError(f"{path}: line {lineno}: missing field {exc}") from None
    return out


def snapshots_for_trace(trace: Trace) -> list[GraphSnapshot]:
    """One input and one recorded snapshot per step: 2·horizon records."""
    scn = trace.scenario
    out = []
    for k in range(1, scn.horizon + 1):
        out.append(build_input_snapshot(scn, k))
        out.append(build_recorded_snapshot(trace, k))
    return out


# ---------------------------------------------------------------------------
# Prediction files: one probability vector over the 8 augmented classes per
# edge, one record per snapshot.

def write_predictions(records, path: str) -> None:
    """``records`` iterates (seed, step, probs) with probs shaped (E, 8)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"schema": PREDICTION_SCHEMA, "version": PREDICTION_VERSION}) + "\n")
        for seed, step, probs in records:
            fh.write(json.dumps({
                "seed": seed,
                "step": step,
                "probs": np.asarray(probs, dtype=float).tolist(),
            }) + "\n")


def read_predictions(path: str) -> list[tuple[int, int, np.ndarray]]:
    out: list[tuple[int, int, np.ndarray]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                rec = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}: line {lineno}: corrupted record") from exc
            if lineno == 1:
                if rec.get("schema") != PREDICTION_SCHEMA:
                    raise ValueError(f"{path}: line 1: not a prediction file")
                if rec.get("version") != PREDICTION_VERSION:
                    raise ValueError(
                        f"{path}: line 1: unsupported version {rec.get('version')!r}"
                    )
                continue
            probs = np.array(rec["probs"], dtype=float)
            if probs.ndim != 2 or probs.shape[1] != N_CLASSES:
                raise ValueError(f"{path}: line {lineno}: bad probability shape {probs.shape}")
            out.append((rec["seed"], rec["step"], probs))
    return out
