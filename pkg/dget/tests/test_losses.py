import numpy as np
import pytest
import torch

from conftest import finite_difference, random_simplex
from dget import (
    N_CLASSES,
    classification_loss,
    consistency_loss,
    default_penalty_matrix,
    lambda_schedule,
    total_loss,
)

# --- consistency -----------------------------------------------------------


def test_consistency_equal_inputs_is_zero():
    o = torch.randn(3, 4, dtype=torch.float64)
    assert consistency_loss(o, o.clone()).item() == 0.0


def test_consistency_unit_difference_two_devices():
    # one coordinate of one device off by 1, |N| = 2 -> 1 / 2
    o = torch.zeros(2, 3, dtype=torch.float64)
    g = torch.zeros(2, 3, dtype=torch.float64)
    o[0, 1] = 1.0
    assert consistency_loss(o, g).item() == pytest.approx(0.5, abs=0.0)
    # with a leading time axis the device count stays the divisor
    o3 = torch.zeros(4, 2, 3, dtype=torch.float64)
    o3[1, 0, 1] = 1.0
    assert consistency_loss(o3, torch.zeros_like(o3)).item() == pytest.approx(0.5, abs=0.0)


def test_consistency_shape_mismatch():
    with pytest.raises(ValueError, match="shape mismatch"):
        consistency_loss(torch.zeros(2, 3), torch.zeros(3, 2))
    with pytest.raises(ValueError, match="at least"):
        consistency_loss(torch.zeros(3), torch.zeros(3))


def test_consistency_gradients_match_finite_differences():
    rng = np.random.default_rng(7)
    worst = 0.0
    for trial in range(100):
        n = int(rng.integers(2, 5))
        z = int(rng.integers(2, 6))
        shape = (n, z) if trial % 2 == 0 else (int(rng.integers(2, 4)), n, z)
        o = torch.tensor(rng.normal(size=shape), dtype=torch.float64, requires_grad=True)
        g = torch.tensor(rng.normal(size=shape), dtype=torch.float64)
        loss = consistency_loss(o, g)
        (analytic,) = torch.autograd.grad(loss, o)
        numeric = finite_difference(lambda x: consistency_loss(x, g), o.detach().clone())
        rel = (analytic - numeric).norm() / max(numeric.norm().item(), 1e-12)
        worst = max(worst, rel.item())
    assert worst <= 1e-4


# --- classification --------------------------------------------------------


def _random_case(rng, n):
    probs = torch.tensor(random_simplex(rng, n, N_CLASSES), dtype=torch.float64)
    labels = torch.tensor(rng.integers(0, N_CLASSES, size=n), dtype=torch.long)
    weights = torch.tensor(rng.uniform(0.2, 3.0, size=N_CLASSES), dtype=torch.float64)
    penalty = torch.tensor(default_penalty_matrix(), dtype=torch.float64)
    return probs, labels, weights, penalty


def test_classification_perfect_onehot_is_zero():
    labels = torch.tensor([0, 3, 7])
    probs = torch.zeros(3, N_CLASSES, dtype=torch.float64)
    probs[torch.arange(3), labels] = 1.0
    w = torch.ones(N_CLASSES, dtype=torch.float64)
    pen = torch.tensor(default_penalty_matrix(), dtype=torch.float64)
    assert classification_loss(probs, labels, w, pen).item() == 0.0


def test_classification_degenerates_to_plain_nll():
    rng = np.random.default_rng(3)
    probs, labels, _, _ = _random_case(rng, 12)
    uniform = torch.ones(N_CLASSES, dtype=torch.float64)
    identity = torch.ones(N_CLASSES, N_CLASSES, dtype=torch.float64)
    got = classification_loss(probs, labels, uniform, identity)
    expected = torch.nn.functional.nll_loss(torch.log(probs), labels)
    assert got.item() == pytest.approx(expected.item(), rel=1e-12)


def test_classification_zero_probability_clamped():
    probs = torch.zeros(1, N_CLASSES, dtype=torch.float64)
    probs[0, 2] = 1.0
    labels = torch.tensor([5])
    w = torch.ones(N_CLASSES, dtype=torch.float64)
    pen = torch.ones(N_CLASSES, N_CLASSES, dtype=torch.float64)
    loss = classification_loss(probs, labels, w, pen)
    assert torch.isfinite(loss)
    assert loss.item() == pytest.approx(-np.log(1e-12), rel=1e-12)


def test_classification_input_validation():
    w = torch.ones(N_CLASSES)
    pen = torch.ones(N_CLASSES, N_CLASSES)
    with pytest.raises(ValueError):
        classification_loss(torch.ones(3, N_CLASSES, 1), torch.zeros(3).long(), w, pen)
    with pytest.raises(ValueError):
        classification_loss(torch.ones(3, N_CLASSES), torch.zeros(2).long(), w, pen)
    with pytest.raises(ValueError):
        classification_loss(torch.ones(3, N_CLASSES), torch.zeros(3).long(),
                            torch.ones(3), pen)


def test_classification_gradients_match_finite_differences():
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 7))
        probs, labels, weights, penalty = _random_case(rng, n)
        probs.requires_grad_(True)
        loss = classification_loss(probs, labels, weights, penalty)
        (analytic,) = torch.autograd.grad(loss, probs)
        numeric = finite_difference(
            lambda x: classification_loss(x, labels, weights, penalty),
            probs.detach().clone(),
        )
        rel = (analytic - numeric).norm() / max(numeric.norm().item(), 1e-12)
        worst = max(worst, rel.item())
    assert worst <= 1e-4


# --- combination schedule --------------------------------------------------


def test_lambda_endpoints_and_midpoint():
    assert lambda_schedule(0, 70) == 0.5
    assert lambda_schedule(70, 70) == 0.0
    assert lambda_schedule(35, 70) == 0.25


def test_lambda_exactly_linear():
    epochs = 97
    for epoch in range(epochs + 1):
        assert lambda_schedule(epoch, epochs) == 0.5 * (1 - epoch / epochs)


def test_lambda_validation():
    with pytest.raises(ValueError):
        lambda_schedule(1, 0)
    with pytest.raises(ValueError):
        lambda_schedule(-1, 10)
    with pytest.raises(ValueError):
        lambda_schedule(11, 10)


def test_total_loss_composition():
    cls = torch.tensor(2.0)
    cons = torch.tensor(4.0)
    assert total_loss(cls, cons, 0, 10).item() == pytest.approx(2.0 + 0.5 * 4.0)
    assert total_loss(cls, cons, 10, 10).item() == pytest.approx(2.0)
    assert total_loss(cls, cons, 5, 10, lambda0=0.2).item() == pytest.approx(2.0 + 0.1 * 4.0)
