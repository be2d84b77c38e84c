import numpy as np
import pytest
import torch

from dget import ModelConfig

# one BLAS thread keeps floating-point reductions deterministic across runs
torch.set_num_threads(1)


def tiny_config(**overrides) -> ModelConfig:
    base = dict(
        gat_layers=1, gat_heads=2, inductive_layers=1, embed_dim=16,
        transformer_layers=1, transformer_heads=2, dropout=0.0,
        lr_peak=1e-3, epochs=2, folds=2,
    )
    base.update(overrides)
    return ModelConfig(**base)


@pytest.fixture(scope="session")
def toy_dataset_path(tmp_path_factory):
    """50-snapshot dataset (5 scenarios x 5 steps x input+recorded) produced
    by the scheduling toolkit's CLI — the file format is the only interface
    shared with this package."""
    cli = pytest.importorskip("hyrosched.cli")
    path = tmp_path_factory.mktemp("data") / "toy50.jsonl"
    rc = cli.main([
        "export-dataset", "--seeds", "5", "--nodes", "2", "--aps", "1",
        "--horizon", "5", "--load", "1", "--out", str(path),
    ])
    assert rc == 0
    return str(path)


def random_simplex(rng: np.random.Generator, n: int, c: int) -> np.ndarray:
    return rng.dirichlet(np.ones(c), size=n)


def finite_difference(func, x: torch.Tensor, h: float = 1e-6) -> torch.Tensor:
    """Central finite differences of a scalar function w.r.t. every entry."""
    grad = torch.zeros_like(x)
    flat = x.reshape(-1)
    gflat = grad.reshape(-1)
    for k in range(flat.numel()):
        orig = flat[k].item()
        flat[k] = orig + h
        up = func(x).item()
        flat[k] = orig - h
        down = func(x).item()
        flat[k] = orig
        gflat[k] = (up - down) / (2 * h)
    return grad
