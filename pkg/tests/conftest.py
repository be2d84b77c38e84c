"""Shared helpers: hand-built scenarios with exactly controlled link SNRs, and
a stream of small generated instances suitable for exhaustive optimization."""

from __future__ import annotations

import math

import numpy as np
import pytest

from hyrosched.channel import (
    K_BOLTZMANN,
    OWC,
    Q_ELECTRON,
    RF,
    OwcParams,
    RfParams,
)
from hyrosched.scenario import (
    IMPOSSIBLE,
    DeviceSet,
    GenConfig,
    Message,
    Scenario,
    VisibilityMatrix,
    generate,
)


def rf_power_for_snr(snr: float, rf: RfParams) -> float:
    """Received RF power consistent with a target linear SNR."""
    return snr * K_BOLTZMANN * rf.temperature_k * rf.bandwidth_hz


def owc_power_for_snr(snr: float, owc: OwcParams) -> float:
    """Received optical power consistent with a target linear SNR.

    Inverts SNR = i_r^2 / (2 q B (i_r + i_n) + 4 k T B / R_L) for i_r by
    solving the quadratic i_r^2 - a i_r - b = 0.
    """
    i_n = owc.responsivity_a_per_w * owc.ambient_power_w
    thermal = 4.0 * K_BOLTZMANN * owc.temperature_k / owc.load_ohm * owc.bandwidth_hz
    a = snr * 2.0 * Q_ELECTRON * owc.bandwidth_hz
    b = snr * (2.0 * Q_ELECTRON * i_n * owc.bandwidth_hz + thermal)
    i_r = (a + math.sqrt(a * a + 4.0 * b)) / 2.0
    return i_r / owc.responsivity_a_per_w


def manual_scenario(
    snr: np.ndarray,
    messages: list[Message],
    budgets,
    n_aps: int = 0,
    step_s: float = 0.05,
    packet_bits: int = 1024,
    l_count: int = 2,
    seed: int = 0,
    rf: RfParams | None = None,
    owc: OwcParams | None = None,
) -> Scenario:
    """Scenario with a fully specified (N, N, T, 2) SNR tensor.

    Received powers are derived so that the channel-model energy coefficients
    stay internally consistent with the requested SNRs.
    """
    rf = rf or RfParams()
    owc = owc or OwcParams()
    snr = np.asarray(snr, dtype=float)
    n, _, horizon, _ = snr.shape
    rx = np.zeros_like(snr)
    for i in range(n):
        for j in range(n):
            for k in range(horizon):
                if np.isfinite(snr[i, j, k, RF]):
                    rx[i, j, k, RF] = rf_power_for_snr(float(snr[i, j, k, RF]), rf)
                if np.isfinite(snr[i, j, k, OWC]):
                    rx[i, j, k, OWC] = owc_power_for_snr(float(snr[i, j, k, OWC]), owc)
    rho = np.zeros((n, n, horizon), dtype=np.uint8)
    for f in messages:
        rho[f.src, f.dst, f.window_start - 1 : f.window_end] = 1
    devices = DeviceSet(
        n_nodes=n - n_aps,
        n_aps=n_aps,
        distances_m=np.full((n, n), 5.0) - 5.0 * np.eye(n),
        budgets_j=np.asarray(budgets, dtype=float),
    )
    return Scenario(
        devices=devices,
        messages=tuple(messages),
        visibility=VisibilityMatrix(snr, rx),
        comm_schedule=rho,
        horizon=horizon,
        step_s=step_s,
        packet_bits=packet_bits,
        l_count=l_count,
        seed=seed,
        rf=rf,
        owc=owc,
    )


def empty_snr(n: int, horizon: int) -> np.ndarray:
    return np.full((n, n, horizon, 2), IMPOSSIBLE)


#: shapes (n_nodes, n_aps, horizon) cycled while producing tiny instances
_TINY_SHAPES = (
    (1, 1, 2),
    (1, 1, 3),
    (2, 1, 3),
    (1, 2, 4),
    (2, 2, 2),
    (2, 2, 4),
    (1, 3, 4),
    (2, 2, 3),
)


def tiny_instances(count: int, max_messages: int = 3, start_seed: int = 0):
    """Yield ``count`` generated instances small enough for full enumeration:
    at most 4 devices, at most 4 steps, at most ``max_messages`` messages of
    at most 3 packets each."""
    produced = 0
    seed = start_seed
    while produced < count:
        n_nodes, n_aps, horizon = _TINY_SHAPES[seed % len(_TINY_SHAPES)]
        cfg = GenConfig(
            n_nodes=n_nodes,
            n_aps=n_aps,
            horizon=horizon,
            arrival_p_ap_node=0.25,
            arrival_p_node_node=0.15,
            max_window=2,
            packets_per_device=3,
            max_packets_per_message=3,
        )
        scn = generate(cfg, seed)
        seed += 1
        if len(scn.messages) > max_messages:
            continue
        produced += 1
        yield scn


@pytest.fixture(scope="session")
def default_scenario():
    return generate(GenConfig(), 0)
