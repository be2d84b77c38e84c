"""Loss functions: embedding consistency, penalty-weighted classification,
and the linearly decaying combination coefficient."""

from __future__ import annotations

import torch

LOG_CLAMP = 1e-12


def consistency_loss(predicted: torch.Tensor, true: torch.Tensor) -> torch.Tensor:
    """Mean squared alignment between predicted and reference embeddings,
    summed over all steps/coordinates and divided by the number of devices
    (the second-to-last axis).  Zero iff the inputs are equal."""
    if predicted.shape != true.shape:
        raise ValueError(f"shape mismatch: {tuple(predicted.shape)} vs {tuple(true.shape)}")
    if predicted.dim() < 2:
        raise ValueError("expected at least (devices, embed) shaped inputs")
    n_devices = predicted.shape[-2]
    return ((predicted - true) ** 2).sum() / n_devices


def classification_loss(
    probabilities: torch.Tensor,
    labels: torch.Tensor,
    weights: torch.Tensor,
    penalty: torch.Tensor,
) -> torch.Tensor:
    """Weighted negative log-likelihood with a misclassification penalty:
    -(1/n) * sum_i w_{y_i} * log(p_i[y_i]) * penalty[y_i, argmax_i].

    ``probabilities`` are full distributions (n, C); the penalty column is
    selected by the hard argmax prediction and acts as a constant factor.
    Logs are clamped at 1e-12.
    """
    if probabilities.dim() != 2:
        raise ValueError("probabilities must be (n, C)")
    n, c = probabilities.shape
    if labels.shape != (n,):
        raise ValueError(f"labels must be ({n},), got {tuple(labels.shape)}")
    if weights.shape != (c,) or penalty.shape != (c, c):
        raise ValueError("weights must be (C,), penalty (C, C)")
    predicted = probabilities.detach().argmax(dim=1)
    p_true = probabilities.gather(1, labels.view(-1, 1)).squeeze(1)
    log_p = torch.log(torch.clamp(p_true, min=LOG_CLAMP))
    terms = weights[labels] * log_p * penalty[labels, predicted]
    return -terms.mean()


def lambda_schedule(epoch: int, epochs: int, lambda0: float = 0.5) -> float:
    """Linear decay of the consistency coefficient: lambda0 * (1 - epoch/epochs)."""
    if epochs <= 0:
        raise ValueError("epochs must be positive")
    if not 0 <= epoch <= epochs:
        raise ValueError(f"epoch {epoch} outside [0, {epochs}]")
    return lambda0 * (1.0 - epoch / epochs)


def total_loss(cls, cons, epoch: int, epochs: int, lambda0: float = 0.5):
    return cls + lambda_schedule(epoch, epochs, lambda0) * cons
