"""Learned link scheduler for hybrid RF/optical IoT networks.

Consumes graph-dataset files, trains a dual graph-embedding model with a
Transformer edge classifier, and writes prediction files for the downstream
feasibility repair tool.
"""

from .config import ModelConfig, desk_config, load_config, parse_config_text
from .data import (
    AUGMENT_PAIRS,
    N_CLASSES,
    Normalizer,
    Sample,
    Snapshot,
    augment_label,
    class_weights,
    decode_label,
    edge_order,
    pair_samples,
    read_dataset,
    write_predictions,
)
from .losses import classification_loss, consistency_loss, lambda_schedule, total_loss
from .model import (
    DGET,
    EdgeClassifier,
    InductiveRefiner,
    TransductiveGAT,
    predict_probabilities,
    snapshot_tensors,
)
from .penalty import default_penalty_matrix, validate_penalty_matrix
from .predict import load_checkpoint, predict
from .train import stratified_folds, train

__all__ = [
    "AUGMENT_PAIRS",
    "DGET",
    "EdgeClassifier",
    "InductiveRefiner",
    "ModelConfig",
    "N_CLASSES",
    "Normalizer",
    "Sample",
    "Snapshot",
    "TransductiveGAT",
    "augment_label",
    "class_weights",
    "classification_loss",
    "consistency_loss",
    "decode_label",
    "default_penalty_matrix",
    "desk_config",
    "edge_order",
    "lambda_schedule",
    "load_checkpoint",
    "load_config",
    "pair_samples",
    "parse_config_text",
    "predict",
    "predict_probabilities",
    "read_dataset",
    "snapshot_tensors",
    "stratified_folds",
    "total_loss",
    "train",
    "validate_penalty_matrix",
    "write_predictions",
]
