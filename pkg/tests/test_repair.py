"""Feasibility-repair tests: conflict structure, totality over random inputs,
idempotence, and minimal-touch behavior."""

import numpy as np
import pytest

from hyrosched.graphio import AUGMENT_PAIRS, N_CLASSES, augment_label, decode_label, edge_order
from hyrosched.repair import (
    FALLBACK_CLASS,
    ConflictMap,
    conflict_map,
    detect_violations,
    top2_repair,
)


def test_conflict_map_four_devices():
    cm = conflict_map(4)
    # C(4,2) unordered pairs; each conflicts with n(n-1) - (n-2)(n-3) ordered pairs
    assert cm.shape == (6, 10)
    assert cm.pairs == ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
    ordered = edge_order(4)
    row = cm.groups[cm.pairs.index((1, 2))]
    expected = {e for e, (i, j) in enumerate(ordered)
                if i in (1, 2) or j in (1, 2)}
    assert set(row.tolist()) == expected
    assert len(expected) == 10


def test_conflict_map_two_devices():
    cm = conflict_map(2)
    assert cm.shape == (1, 2)
    assert set(cm.groups[0].tolist()) == {0, 1}
    with pytest.raises(ValueError):
        conflict_map(1)


def test_detect_violations():
    # 3 devices, edges (0,1),(0,2),(1,0),(1,2),(2,0),(2,1)
    avail = np.array([3, 1, 3, 0, 1, 1])
    chosen = np.array([1, 1, 0, 0, 0, 0])  # device 0 transmits on two edges
    v = detect_violations(chosen, avail, 3)
    assert [x.kind for x in v] == ["device-conflict"]
    chosen = np.array([2, 0, 0, 0, 0, 0])  # OWC chosen where only RF+OWC=3 ok
    assert detect_violations(chosen, avail, 3) == []
    chosen = np.array([0, 2, 0, 0, 0, 0])  # OWC on an RF-only edge
    v = detect_violations(chosen, avail, 3)
    assert [x.kind for x in v] == ["incompatible"]


def _random_case(rng):
    n = int(rng.integers(2, 6))
    n_edges = n * (n - 1)
    avail = rng.integers(0, 4, size=n_edges)
    probs = rng.dirichlet(np.ones(N_CLASSES), size=n_edges)
    return n, avail, probs


def assert_feasible_output(labels, avail, n):
    for e, code in enumerate(labels):
        av, ch = decode_label(int(code))
        assert av == int(avail[e])  # codes normalized to actual availability
    chosen = np.array([decode_label(int(c))[1] for c in labels])
    assert detect_violations(chosen, avail, n) == []


def test_repair_totality_random_sample():
    rng = np.random.default_rng(99)
    for _ in range(1500):
        n, avail, probs = _random_case(rng)
        labels = top2_repair(probs, avail, n)
        assert_feasible_output(labels, avail, n)


def test_repair_deterministic():
    rng = np.random.default_rng(5)
    n, avail, probs = _random_case(rng)
    a = top2_repair(probs, avail, n)
    b = top2_repair(probs.copy(), avail.copy(), n)
    assert np.array_equal(a, b)


def test_repair_idempotent_on_feasible_input():
    rng = np.random.default_rng(17)
    for _ in range(50):
        n, avail, probs = _random_case(rng)
        labels = top2_repair(probs, avail, n)
        one_hot = np.full((len(labels), N_CLASSES), 1e-9)
        one_hot[np.arange(len(labels)), labels] = 1.0
        one_hot /= one_hot.sum(axis=1, keepdims=True)
        again = top2_repair(one_hot, avail, n)
        assert np.array_equal(again, labels)


def test_repair_never_touches_clean_edges():
    # edges for n=3: (0,1),(0,2),(1,0),(1,2),(2,0),(2,1)
    avail = np.array([3, 0, 3, 0, 0, 0])
    probs = np.full((6, N_CLASSES), 1e-12)
    # edges 0 and 2 both claim device 0 and 1 (conflict); edge 0 is far more
    # confident, so edge 2 must be demoted; its runner-up is "both, unused"
    probs[0, augment_label(3, 1)] = 1.0
    probs[2, augment_label(3, 2)] = 0.6
    probs[2, augment_label(3, 0)] = 0.4
    for e, av in ((1, 0), (3, 0), (4, 0), (5, 0)):
        probs[e, augment_label(av, 0)] = 1.0
    probs /= probs.sum(axis=1, keepdims=True)
    labels = top2_repair(probs, avail, 3)
    assert labels[0] == augment_label(3, 1)  # confident edge untouched
    assert labels[2] == augment_label(3, 0)  # loser demoted to its runner-up
    for e in (1, 3, 4, 5):
        assert labels[e] == augment_label(0, 0)


def test_repair_fallback_stage():
    # both edges of a 2-device pair insist on transmitting with certainty 1.0
    # in both of their top-2 classes: the fallback stage must still resolve it
    avail = np.array([1, 1])
    probs = np.zeros((2, N_CLASSES))
    probs[:, augment_label(1, 1)] = 0.9
    probs[:, augment_label(3, 1)] = 0.1  # runner-up also transmits
    labels = top2_repair(probs, avail, 2)
    assert_feasible_output(labels, avail, 2)
    # exactly one edge keeps its transmission
    chosen = [decode_label(int(c))[1] for c in labels]
    assert sorted(chosen) == [0, 1]
    assert FALLBACK_CLASS[1] == augment_label(1, 0)


def test_repair_input_validation():
    with pytest.raises(ValueError, match="shaped"):
        top2_repair(np.ones((3, N_CLASSES)) / N_CLASSES, np.zeros(2), 2)
    bad = np.ones((2, N_CLASSES))
    with pytest.raises(ValueError, match="sum to 1"):
        top2_repair(bad, np.zeros(2), 2)


def test_fallback_classes_are_the_unused_codes():
    for av, code in FALLBACK_CLASS.items():
        assert decode_label(code) == (av, 0)
    assert set(FALLBACK_CLASS) == {0, 1, 2, 3}
