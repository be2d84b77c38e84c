"""Misclassification penalty matrix over the 8 augmented edge classes.

The matrix multiplies the per-edge loss term: entry ``W[c, c']`` applies when
the true class is ``c`` and the argmax prediction is ``c'``.  The defaults
encode one asymmetry: confusions that *miss* a real transmission (predicting
a silent class when the truth transmits) are penalized hard, while confusions
that merely *over-predict* communication are left at the base weight — the
downstream top-2 repair step removes excess transmissions cheaply, but it can
never invent a missed one.  The concrete values are tuned defaults.
"""

from __future__ import annotations

import numpy as np

from .data import AUGMENT_PAIRS, N_CLASSES

#: penalty when a real transmission is predicted as silence
MISSED_TX = 4.0
#: penalty when a transmission is predicted with the wrong technology
WRONG_TECH = 2.0
BASE = 1.0


def default_penalty_matrix() -> np.ndarray:
    w = np.full((N_CLASSES, N_CLASSES), BASE)
    for c, (_, chosen_true) in enumerate(AUGMENT_PAIRS):
        for cp, (_, chosen_pred) in enumerate(AUGMENT_PAIRS):
            if c == cp:
                continue
            if chosen_true > 0 and chosen_pred == 0:
                w[c, cp] = MISSED_TX
            elif chosen_true > 0 and chosen_pred > 0:
                w[c, cp] = WRONG_TECH
    np.fill_diagonal(w, 1.0)
    return w


def validate_penalty_matrix(w: np.ndarray) -> None:
    w = np.asarray(w)
    if w.shape != (N_CLASSES, N_CLASSES):
        raise ValueError(f"penalty matrix must be {N_CLASSES}x{N_CLASSES}, got {w.shape}")
    if not np.all(np.diag(w) == 1.0):
        raise ValueError("penalty matrix diagonal must be 1")
    if not np.all(w > 0):
        raise ValueError("penalty entries must be positive")
