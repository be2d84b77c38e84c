"""Inference: load a checkpoint, classify every edge of every input-kind
snapshot in a dataset file, and write the class distributions in the
prediction file format consumed by the schedule repair tool."""

from __future__ import annotations

import torch

from .config import ModelConfig
from .data import Normalizer, read_dataset, write_predictions
from .model import DGET, predict_probabilities


def load_checkpoint(path: str) -> tuple[DGET, Normalizer]:
    try:
        ckpt = torch.load(path, map_location="cpu", weights_only=False)
        cfg = ModelConfig(**ckpt["config"])
        model = DGET(cfg, ckpt["node_dim"], ckpt["edge_dim"])
        model.load_state_dict(ckpt["state_dict"])
        norm = Normalizer.from_state(ckpt["normalizer"])
    except (KeyError, TypeError, RuntimeError) as exc:
        raise ValueError(f"{path}: not a valid checkpoint: {exc}") from exc
    model.eval()
    return model, norm


def predict(checkpoint_path: str, dataset_path: str, out_path: str) -> int:
    """Returns the number of snapshots predicted."""
    model, norm = load_checkpoint(checkpoint_path)
    inputs = [s for s in read_dataset(dataset_path) if s.kind == "input"]
    if not inputs:
        raise ValueError(f"{dataset_path}: no input snapshots")
    for s in inputs:
        if s.node_features.shape[1] != model.node_dim:
            raise ValueError(
                f"{dataset_path}: node feature width {s.node_features.shape[1]} "
                f"does not match checkpoint ({model.node_dim})"
            )
    records = [
        (s.seed, s.step, predict_probabilities(model, s, norm)) for s in inputs
    ]
    write_predictions(records, out_path)
    return len(records)
