"""Training: stratified cross-validation folds, a one-cycle learning-rate
schedule, per-epoch CSV metrics, and a final checkpoint trained on the full
dataset.

Runs are deterministic for a fixed (dataset, config, seed) up to the
framework's documented nondeterminism (thread scheduling inside BLAS kernels
may reorder floating-point reductions on some platforms).
"""

from __future__ import annotations

import csv
import os
from dataclasses import asdict

import numpy as np
import torch

from .config import ModelConfig
from .data import (
    COMM_CLASSES,
    Normalizer,
    Sample,
    class_weights,
    pair_samples,
    read_dataset,
)
from .losses import classification_loss, consistency_loss, lambda_schedule
from .model import DGET, EDGE_DIM, snapshot_tensors
from .penalty import default_penalty_matrix

METRICS_COLUMNS = [
    "fold", "epoch", "lambda", "lr",
    "train_cls_loss", "train_cons_loss", "train_total_loss",
    "train_accuracy", "val_accuracy",
]


def stratum(sample: Sample) -> int:
    """Stratification key: whether the snapshot contains any transmission."""
    return int(any(int(c) in COMM_CLASSES for c in sample.labels))


def stratified_folds(samples: list[Sample], folds: int,
                     seed: int) -> list[list[int]]:
    """Deterministically deal sample indices into ``folds`` groups so each
    group keeps the stratum proportions.  Raises when any stratum has fewer
    members than there are folds."""
    if folds < 2:
        raise ValueError("need at least 2 folds")
    by_stratum: dict[int, list[int]] = {}
    for idx, s in enumerate(samples):
        by_stratum.setdefault(stratum(s), []).append(idx)
    for key, members in sorted(by_stratum.items()):
        if len(members) < folds:
            raise ValueError(
                f"dataset too small to stratify: stratum {key} has "
                f"{len(members)} samples for {folds} folds"
            )
    rng = np.random.default_rng(seed)
    out: list[list[int]] = [[] for _ in range(folds)]
    for _, members in sorted(by_stratum.items()):
        members = list(members)
        rng.shuffle(members)
        for pos, idx in enumerate(members):
            out[pos % folds].append(idx)
    return [sorted(group) for group in out]


def _accuracy(model: DGET, samples, tensors, labels) -> float:
    model.eval()
    correct = total = 0
    with torch.no_grad():
        for idx in samples:
            t = tensors[idx]
            _, logits = model(t["nodes"], t["edges_dense"], t["edge_feats"],
                              t["avail"], t["step"])
            pred = logits.argmax(dim=1)
            correct += int((pred == labels[idx]).sum())
            total += len(labels[idx])
    return correct / total if total else 0.0


def _run_fold(fold_name, train_idx, val_idx, samples, inp_tensors, rec_tensors,
              labels, cfg: ModelConfig, weights, penalty, seed, writer):
    torch.manual_seed(seed)
    node_dim = inp_tensors[train_idx[0]]["nodes"].shape[1]
    model = DGET(cfg, node_dim)
    optimizer = torch.optim.Adam(model.parameters(), lr=cfg.lr_start,
                                 weight_decay=cfg.weight_decay)
    scheduler = torch.optim.lr_scheduler.OneCycleLR(
        optimizer,
        max_lr=cfg.lr_peak,
        total_steps=cfg.epochs * len(train_idx),
        div_factor=cfg.lr_peak / cfg.lr_start,
        final_div_factor=cfg.lr_start / cfg.lr_final,
    )
    rng = np.random.default_rng(seed)
    last_train_acc = 0.0
    for epoch in range(cfg.epochs):
        lam = lambda_schedule(epoch, cfg.epochs, cfg.lambda0)
        order = np.array(train_idx)
        rng.shuffle(order)
        cls_sum = cons_sum = total_sum = 0.0
        for idx in order:
            t = inp_tensors[idx]
            model.eval()  # stable (dropout-free) reference embeddings
            with torch.no_grad():
                r = rec_tensors[idx]
                g = model.embed(r["nodes"], r["edges_dense"], r["avail"])
            model.train()
            o, logits = model(t["nodes"], t["edges_dense"], t["edge_feats"],
                              t["avail"], t["step"])
            cons = consistency_loss(o, g)
            probs = torch.softmax(logits, dim=1)
            cls = classification_loss(probs, labels[idx], weights, penalty)
            loss = cls + lam * cons
            optimizer.zero_grad()
            loss.backward()
            torch.nn.utils.clip_grad_norm_(model.parameters(), 1.0)
            optimizer.step()
            scheduler.step()
            cls_sum += float(cls.detach())
            cons_sum += float(cons.detach())
            total_sum += float(loss.detach())
        n = len(train_idx)
        train_acc = _accuracy(model, train_idx, inp_tensors, labels)
        val_acc = (_accuracy(model, val_idx, inp_tensors, labels)
                   if val_idx else "")
        writer.writerow([
            fold_name, epoch, repr(lam), f"{scheduler.get_last_lr()[0]:.8e}",
            f"{cls_sum / n:.8f}", f"{cons_sum / n:.8f}", f"{total_sum / n:.8f}",
            f"{train_acc:.6f}",
            f"{val_acc:.6f}" if val_acc != "" else "",
        ])
        last_train_acc = train_acc
    final_val = _accuracy(model, val_idx, inp_tensors, labels) if val_idx else None
    return model, last_train_acc, final_val


def train(dataset_path: str, cfg: ModelConfig, seed: int, out_dir: str) -> dict:
    """Cross-validate, then train a final model on every sample.  Writes
    ``metrics.csv`` (one row per fold x epoch, plus the final model's rows)
    and ``checkpoint.pt`` into ``out_dir``; returns a summary."""
    snapshots = read_dataset(dataset_path)
    samples = pair_samples(snapshots)
    if not samples:
        raise ValueError(f"{dataset_path}: no input/recorded snapshot pairs")
    folds = stratified_folds(samples, cfg.folds, seed)

    norm = Normalizer.fit([s.inp for s in samples] + [s.rec for s in samples])
    inp_tensors = [snapshot_tensors(s.inp, norm) for s in samples]
    rec_tensors = [snapshot_tensors(s.rec, norm) for s in samples]
    labels = [torch.as_tensor(s.labels, dtype=torch.long) for s in samples]
    all_codes = np.concatenate([s.labels for s in samples])
    weights = torch.as_tensor(class_weights(all_codes), dtype=torch.float32)
    penalty = torch.as_tensor(default_penalty_matrix(), dtype=torch.float32)

    os.makedirs(out_dir, exist_ok=True)
    metrics_path = os.path.join(out_dir, "metrics.csv")
    checkpoint_path = os.path.join(out_dir, "checkpoint.pt")
    fold_val_accs: list[float] = []
    with open(metrics_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(METRICS_COLUMNS)
        for f, val_idx in enumerate(folds):
            train_idx = [i for i in range(len(samples)) if i not in set(val_idx)]
            _, _, val_acc = _run_fold(
                str(f), train_idx, val_idx, samples, inp_tensors, rec_tensors,
                labels, cfg, weights, penalty, seed * 1000 + f, writer,
            )
            fold_val_accs.append(val_acc)
        model, final_train_acc, _ = _run_fold(
            "final", list(range(len(samples))), [], samples, inp_tensors,
            rec_tensors, labels, cfg, weights, penalty, seed * 1000 + cfg.folds,
            writer,
        )

    torch.save({
        "config": asdict(cfg),
        "node_dim": model.node_dim,
        "edge_dim": EDGE_DIM,
        "state_dict": model.state_dict(),
        "normalizer": norm.state(),
        "seed": seed,
    }, checkpoint_path)
    return {
        "checkpoint": checkpoint_path,
        "metrics": metrics_path,
        "final_train_accuracy": final_train_acc,
        "fold_val_accuracies": fold_val_accs,
        "n_samples": len(samples),
    }
