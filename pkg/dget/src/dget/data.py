"""Reading graph-dataset files and writing prediction files.

This module speaks the documented on-disk formats only (the
``hyrosched-graph-dataset`` and ``hyrosched-predictions`` JSON-lines schemas);
it does not depend on the package that produces them.

Feature layouts (dataset schema version 1):

* node features: ``[energy_j, queued packets per data type..., mean send J/bit
  RF, mean send J/bit OWC]``
* edge features (directed pairs, lexicographic): ``[availability code,
  pending messages, pending packets, SNR RF, SNR OWC]``

Availability codes: 0 none, 1 RF, 2 OWC, 3 both.  Chosen-link labels: 0 none,
1 RF, 2 OWC.  The 8 augmented classes enumerate the compatible
(availability, chosen) pairs in the fixed order below.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

DATASET_SCHEMA = "hyrosched-graph-dataset"
DATASET_VERSION = 1
PREDICTION_SCHEMA = "hyrosched-predictions"
PREDICTION_VERSION = 1

N_CLASSES = 8
AUGMENT_PAIRS: tuple[tuple[int, int], ...] = (
    (0, 0), (1, 0), (1, 1), (2, 0), (2, 2), (3, 0), (3, 1), (3, 2),
)
_AUGMENT_INDEX = {pair: code for code, pair in enumerate(AUGMENT_PAIRS)}

#: classes whose chosen-link component is a real transmission
COMM_CLASSES = frozenset(
    code for code, (_, chosen) in enumerate(AUGMENT_PAIRS) if chosen > 0
)


@dataclass(frozen=True)
class Snapshot:
    kind: str  # "input" or "recorded"
    step: int  # 1-based
    seed: int
    n_devices: int
    node_features: np.ndarray  # (N, F)
    edge_features: np.ndarray  # (E, 5)
    labels: np.ndarray | None  # (E,) chosen-link codes, recorded only

    def availability(self) -> np.ndarray:
        return self.edge_features[:, 0].astype(int)


@dataclass(frozen=True)
class Sample:
    """One time step of one scenario: the input snapshot, its recorded twin,
    and the augmented 8-class truth label per edge."""

    inp: Snapshot
    rec: Snapshot
    labels: np.ndarray  # (E,) augmented classes


def edge_order(n: int) -> tuple[tuple[int, int], ...]:
    return tuple((i, j) for i in range(n) for j in range(n) if i != j)


def augment_label(availability: int, chosen: int) -> int:
    try:
        return _AUGMENT_INDEX[(availability, chosen)]
    except KeyError:
        raise ValueError(
            f"incompatible pair: chosen {chosen} not available under code {availability}"
        ) from None


def decode_label(code: int) -> tuple[int, int]:
    if not 0 <= code < N_CLASSES:
        raise ValueError(f"augmented code {code} outside 0..{N_CLASSES - 1}")
    return AUGMENT_PAIRS[code]


def class_weights(codes) -> np.ndarray:
    """Inverse-frequency weights, normalized so sum(w_c * count_c) equals the
    total count; classes absent from ``codes`` get the maximum observed
    weight."""
    codes = np.asarray(list(codes), dtype=int)
    if codes.size == 0:
        raise ValueError("cannot weight an empty label collection")
    counts = np.bincount(codes, minlength=N_CLASSES)
    present = counts > 0
    weights = np.zeros(N_CLASSES)
    weights[present] = counts.sum() / (present.sum() * counts[present])
    weights[~present] = weights[present].max()
    return weights


def read_dataset(path: str) -> list[Snapshot]:
    out: list[Snapshot] = []
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
                labels = rec.get("labels")
                out.append(Snapshot(
                    kind=rec["kind"],
                    step=int(rec["step"]),
                    seed=int(rec["seed"]),
                    n_devices=int(rec["n_devices"]),
                    node_features=np.array(rec["node_features"], dtype=float),
                    edge_features=np.array(rec["edge_features"], dtype=float),
                    labels=None if labels is None else np.array(labels, dtype=int),
                ))
            except KeyError as exc:
                raise ValueError(f"{path}: line {lineno}: missing field {exc}") from None
    return out


def pair_samples(snapshots: list[Snapshot]) -> list[Sample]:
    """Pair each input snapshot with its recorded twin and derive augmented
    labels (input availability + recorded chosen link)."""
    recorded = {(s.seed, s.step): s for s in snapshots if s.kind == "recorded"}
    samples: list[Sample] = []
    for inp in snapshots:
        if inp.kind != "input":
            continue
        rec = recorded.get((inp.seed, inp.step))
        if rec is None:
            raise ValueError(f"no recorded snapshot for seed={inp.seed} step={inp.step}")
        if rec.labels is None:
            raise ValueError(f"recorded snapshot seed={inp.seed} step={inp.step} lacks labels")
        avail = inp.availability()
        labels = np.array([
            augment_label(int(a), int(c)) for a, c in zip(avail, rec.labels)
        ])
        samples.append(Sample(inp=inp, rec=rec, labels=labels))
    return samples


def write_predictions(records, path: str) -> None:
    """``records`` iterates (seed, step, probs) with probs shaped (E, 8)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(
            {"schema": PREDICTION_SCHEMA, "version": PREDICTION_VERSION}) + "\n")
        for seed, step, probs in records:
            probs = np.asarray(probs, dtype=float)
            if probs.ndim != 2 or probs.shape[1] != N_CLASSES:
                raise ValueError(f"bad probability shape {probs.shape}")
            fh.write(json.dumps(
                {"seed": int(seed), "step": int(step), "probs": probs.tolist()}) + "\n")


class Normalizer:
    """Per-column affine normalization of node and edge features, fitted on
    the training data and stored in checkpoints so inference matches."""

    def __init__(self, node_mean, node_std, edge_mean, edge_std):
        self.node_mean = np.asarray(node_mean, dtype=float)
        self.node_std = np.asarray(node_std, dtype=float)
        self.edge_mean = np.asarray(edge_mean, dtype=float)
        self.edge_std = np.asarray(edge_std, dtype=float)

    @classmethod
    def fit(cls, snapshots: list[Snapshot]) -> "Normalizer":
        nodes = np.concatenate([s.node_features for s in snapshots], axis=0)
        edges = np.concatenate([s.edge_features for s in snapshots], axis=0)
        return cls(
            nodes.mean(axis=0), np.maximum(nodes.std(axis=0), 1e-8),
            edges.mean(axis=0), np.maximum(edges.std(axis=0), 1e-8),
        )

    def nodes(self, feats: np.ndarray) -> np.ndarray:
        return (feats - self.node_mean) / self.node_std

    def edges(self, feats: np.ndarray) -> np.ndarray:
        return (feats - self.edge_mean) / self.edge_std

    def state(self) -> dict:
        return {
            "node_mean": self.node_mean.tolist(),
            "node_std": self.node_std.tolist(),
            "edge_mean": self.edge_mean.tolist(),
            "edge_std": self.edge_std.tolist(),
        }

    @classmethod
    def from_state(cls, state: dict) -> "Normalizer":
        return cls(state["node_mean"], state["node_std"],
                   state["edge_mean"], state["edge_std"])
