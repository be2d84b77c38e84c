"""Reproducible network instances: devices, budgets, messages with validity
windows, the 4-D visibility matrix, the planned schedule matrix, blockages,
and staleness injection.

Time steps are 1-based (1..horizon) in every public field; arrays use the
usual 0-based axis internally, so step ``k`` lives at index ``k - 1``.
Technology indices follow :mod:`hyrosched.channel`: 0 = RF, 1 = OWC.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import channel
from .channel import OWC, RF, LinkGeometry, OwcParams, RfParams

#: Sentinel for a forbidden (device pair, step, technology) entry.
IMPOSSIBLE = float("-inf")

SCENARIO_SCHEMA = "hyrosched-scenario"
SCENARIO_VERSION = 1


@dataclass(frozen=True)
class GenConfig:
    """Knobs for :func:`generate`.  Defaults give the desk-scale indoor setup:
    3 nodes + 2 APs, 10 steps of 50 ms, 1024-bit packets, two data types,
    Bernoulli(0.7) AP-node and Bernoulli(0.3) node-node arrivals, and a target
    load of 100 packets generated per device over the horizon."""

    n_nodes: int = 3
    n_aps: int = 2
    horizon: int = 10
    step_s: float = 0.05
    packet_bits: int = 1024
    n_data_types: int = 2
    arrival_p_ap_node: float = 0.7
    arrival_p_node_node: float = 0.3
    max_window: int = 4
    packets_per_device: int = 100
    max_packets_per_message: int | None = None
    budget_range: tuple[float, float] = (0.05, 0.1)
    distance_range: tuple[float, float] = (3.0, 20.0)
    owc_angle_max_rad: float = math.radians(60.0)
    rf: RfParams = field(default_factory=RfParams)
    owc: OwcParams = field(default_factory=OwcParams)

    def validate(self) -> None:
        if self.n_nodes < 1 or self.n_aps < 0:
            raise ValueError("need at least one IoT node")
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1 step")
        for p in (self.arrival_p_ap_node, self.arrival_p_node_node):
            if not 0.0 <= p <= 1.0:
                raise ValueError("arrival probabilities must lie in [0, 1]")
        if self.max_window < 1:
            raise ValueError("max_window must be at least 1")
        if self.distance_range[0] < channel.D0_M:
            raise ValueError("distances must not go below the 1 m reference")
        if self.packet_bits < 1 or self.packets_per_device < 0:
            raise ValueError("packet sizes and loads must be non-negative")


@dataclass(frozen=True)
class DeviceSet:
    """Device inventory.  Indices 0..n_nodes-1 are IoT nodes, the remaining
    n_aps indices are access points."""

    n_nodes: int
    n_aps: int
    distances_m: np.ndarray  # (N, N) symmetric, zero diagonal
    budgets_j: np.ndarray  # (N,)

    @property
    def n_total(self) -> int:
        return self.n_nodes + self.n_aps

    def is_ap(self, i: int) -> bool:
        return i >= self.n_nodes


@dataclass(frozen=True)
class Message:
    """One message on an ordered (src, dst) pair: ``seq``-th in that pair's
    queue, carrying ``packets`` unit packets of one data type, transmittable
    only during the inclusive step window [window_start, window_end]."""

    src: int
    dst: int
    seq: int
    data_type: int
    window_start: int
    window_end: int
    packets: int

    def __post_init__(self):
        if self.window_start > self.window_end:
            raise ValueError("message window is empty")
        if self.packets < 1:
            raise ValueError("a message carries at least one packet")

    @property
    def steps(self) -> range:
        return range(self.window_start, self.window_end + 1)

    @property
    def window_len(self) -> int:
        return self.window_end - self.window_start + 1


@dataclass(frozen=True)
class VisibilityMatrix:
    """Per (tx, rx, step, technology) link state.

    ``snr_linear`` holds linear SNR with ``-inf`` marking forbidden entries
    (diagonal, AP-AP pairs, node-node OWC, blocked steps); ``rx_power_w``
    holds the corresponding received power (0 where forbidden).
    """

    snr_linear: np.ndarray  # (N, N, T, 2)
    rx_power_w: np.ndarray  # (N, N, T, 2)

    def possible(self, i: int, j: int, k: int, m: int) -> bool:
        return bool(np.isfinite(self.snr_linear[i, j, k - 1, m]))


@dataclass(frozen=True)
class Scenario:
    """Immutable network instance.  ``comm_schedule[i, j, k-1]`` is 1 exactly
    where some message window on (i, j) covers step k."""

    devices: DeviceSet
    messages: tuple[Message, ...]
    visibility: VisibilityMatrix
    comm_schedule: np.ndarray  # (N, N, T) uint8
    horizon: int
    step_s: float
    packet_bits: int
    l_count: int
    seed: int
    rf: RfParams = field(default_factory=RfParams)
    owc: OwcParams = field(default_factory=OwcParams)

    @property
    def n_devices(self) -> int:
        return self.devices.n_total

    def snr_min_linear(self, m: int) -> float:
        db = self.rf.snr_min_db if m == RF else self.owc.snr_min_db
        return channel.db_to_linear(db)

    def bandwidth_hz(self, m: int) -> float:
        return self.rf.bandwidth_hz if m == RF else self.owc.bandwidth_hz

    def link_admissible(self, i: int, j: int, k: int, m: int) -> bool:
        """True when the SNR threshold admits a transmission on (i, j, k, m)."""
        snr = self.visibility.snr_linear[i, j, k - 1, m]
        return bool(np.isfinite(snr)) and snr >= self.snr_min_linear(m)

    def capacity_bps(self, i: int, j: int, k: int, m: int) -> float:
        snr = self.visibility.snr_linear[i, j, k - 1, m]
        if not np.isfinite(snr):
            return 0.0
        return channel.link_capacity_bps(float(snr), self.bandwidth_hz(m))

    def packet_capacity(self, i: int, j: int, k: int, m: int) -> float:
        """Packets transmittable in one step: C * tau / s_p (real-valued)."""
        return self.capacity_bps(i, j, k, m) * self.step_s / self.packet_bits

    def energy_coeffs(self, i: int, j: int, k: int, m: int) -> tuple[float, float]:
        """(send, receive) per-bit energies for link (i, j) at step k, J/bit."""
        cap = self.capacity_bps(i, j, k, m)
        p_rx = float(self.visibility.rx_power_w[i, j, k - 1, m])
        params = self.rf if m == RF else self.owc
        xi_s = channel.energy_per_bit_j(m, "send", cap, params)
        xi_r = channel.energy_per_bit_j(m, "receive", cap, params, received_power_w=p_rx)
        return xi_s, xi_r

    def messages_on(self, i: int, j: int) -> list[Message]:
        return [f for f in self.messages if f.src == i and f.dst == j]


def _pair_kind(cfg_or_devices, i: int, j: int) -> str:
    devices = cfg_or_devices
    ap_i, ap_j = devices.is_ap(i), devices.is_ap(j)
    if ap_i and ap_j:
        return "ap-ap"
    if ap_i or ap_j:
        return "ap-node"
    return "node-node"


def generate(config: GenConfig, seed: int) -> Scenario:
    """Build a scenario deterministically from (config, seed).

    Channel draws (shadowing, Rician gain, OWC angles) are quasi-static: one
    draw per ordered pair covers the whole coherence horizon.  Arrival events
    follow per-pair Bernoulli processes; per-slot packet generation events are
    merged into messages whose packet counts average to the configured
    per-device load.
    """
    config.validate()
    rng = np.random.default_rng(seed)
    n = config.n_nodes + config.n_aps
    horizon = config.horizon

    # Pairwise distances, symmetric.
    distances = np.zeros((n, n))
    lo, hi = config.distance_range
    for i in range(n):
        for j in range(i + 1, n):
            distances[i, j] = distances[j, i] = rng.uniform(lo, hi)

    budgets = rng.uniform(config.budget_range[0], config.budget_range[1], size=n)
    devices = DeviceSet(config.n_nodes, config.n_aps, distances, budgets)

    # Quasi-static channel state per ordered pair.
    snr = np.full((n, n, horizon, 2), IMPOSSIBLE)
    rx_power = np.zeros((n, n, horizon, 2))
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            kind = _pair_kind(devices, i, j)
            if kind == "ap-ap":
                continue
            shadow = rng.normal(0.0, config.rf.sigma_psi_db)
            fading = channel.sample_rician_power_gain(config.rf.rician_k, rng)
            theta = rng.uniform(0.0, config.owc_angle_max_rad)
            phi = rng.uniform(0.0, config.owc_angle_max_rad)
            geom = LinkGeometry(distances[i, j], theta, phi)
            rf_snr = channel.rf_snr_linear(geom, config.rf, shadow, fading)
            rf_rx = channel.rf_received_power_w(geom, config.rf, shadow, fading)
            snr[i, j, :, RF] = rf_snr
            rx_power[i, j, :, RF] = rf_rx
            if kind == "ap-node":
                owc_rx = channel.owc_received_power_w(geom, config.owc)
                snr[i, j, :, OWC] = channel.owc_snr_from_power(owc_rx, config.owc)
                rx_power[i, j, :, OWC] = owc_rx

    # Bernoulli message arrivals per ordered pair, with disjoint windows.
    arrivals: list[tuple[int, int, list[int]]] = []
    for i in range(n):
        for j in range(n):
            if i == j or _pair_kind(devices, i, j) == "ap-ap":
                continue
            p = (
                config.arrival_p_ap_node
                if _pair_kind(devices, i, j) == "ap-node"
                else config.arrival_p_node_node
            )
            steps = [k for k in range(1, horizon + 1) if rng.random() < p]
            if steps:
                arrivals.append((i, j, steps))

    raw: list[tuple[int, int, int, int, int, int]] = []  # src,dst,seq,l,start,end
    for i, j, steps in arrivals:
        for seq, start in enumerate(steps):
            next_start = steps[seq + 1] if seq + 1 < len(steps) else horizon + 1
            length = int(rng.integers(1, config.max_window + 1))
            end = min(start + length - 1, next_start - 1, horizon)
            data_type = int(rng.integers(0, config.n_data_types))
            raw.append((i, j, seq, data_type, start, end))

    # Merge per-slot generation events into integer packet counts targeting
    # the configured per-device load.
    originated = np.zeros(n, dtype=int)
    for src, *_ in raw:
        originated[src] += 1
    messages = []
    for src, dst, seq, data_type, start, end in raw:
        mean = config.packets_per_device / max(originated[src], 1)
        packets = max(1, int(rng.poisson(mean)))
        if config.max_packets_per_message is not None:
            packets = min(packets, config.max_packets_per_message)
        messages.append(Message(src, dst, seq, data_type, start, end, packets))

    rho = np.zeros((n, n, horizon), dtype=np.uint8)
    for f in messages:
        rho[f.src, f.dst, f.window_start - 1 : f.window_end] = 1

    scn = Scenario(
        devices=devices,
        messages=tuple(messages),
        visibility=VisibilityMatrix(snr, rx_power),
        comm_schedule=rho,
        horizon=horizon,
        step_s=config.step_s,
        packet_bits=config.packet_bits,
        l_count=config.n_data_types,
        seed=seed,
        rf=config.rf,
        owc=config.owc,
    )
    problems = validate(scn)
    if problems:
        raise AssertionError(f"generated scenario failed validation: {problems}")
    return scn


def validate(scn: Scenario) -> list[str]:
    """Structural validator; returns a list of problems (empty when valid)."""
    problems = []
    n, horizon = scn.n_devices, scn.horizon
    vis = scn.visibility.snr_linear
    if vis.shape != (n, n, horizon, 2):
        problems.append("visibility matrix shape mismatch")
        return problems
    for i in range(n):
        if np.isfinite(vis[i, i]).any():
            problems.append(f"diagonal visibility entry for device {i} not impossible")
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            kind = _pair_kind(scn.devices, i, j)
            if kind == "ap-ap" and np.isfinite(vis[i, j]).any():
                problems.append(f"AP-AP pair ({i},{j}) has a possible entry")
            if kind == "node-node" and np.isfinite(vis[i, j, :, OWC]).any():
                problems.append(f"node-node pair ({i},{j}) has a possible OWC entry")
    by_pair: dict[tuple[int, int], list[Message]] = {}
    for f in scn.messages:
        by_pair.setdefault((f.src, f.dst), []).append(f)
        if f.window_end > horizon or f.window_start < 1:
            problems.append(f"message {f} window outside horizon")
    for (i, j), msgs in by_pair.items():
        covered: set[int] = set()
        for f in msgs:
            overlap = covered & set(f.steps)
            if overlap:
                problems.append(f"overlapping windows on pair ({i},{j}) at {sorted(overlap)}")
            covered |= set(f.steps)
        for k in range(1, horizon + 1):
            if bool(scn.comm_schedule[i, j, k - 1]) != (k in covered):
                problems.append(f"schedule matrix inconsistent at ({i},{j},{k})")
    scheduled_pairs = {(f.src, f.dst) for f in scn.messages}
    for i in range(n):
        for j in range(n):
            if (i, j) not in scheduled_pairs and scn.comm_schedule[i, j].any():
                problems.append(f"schedule set on message-free pair ({i},{j})")
    return problems


def apply_blockages(
    scn: Scenario,
    seed: int,
    owc_prob: float = 0.2,
    rf_prob: float = 0.2,
) -> Scenario:
    """Overlay temporary link outages: OWC links lose a contiguous run of 3-8
    steps to object shadowing, RF links 2-6 steps to congestion.  Blockage is
    symmetric per device pair and leaves message windows untouched."""
    rng = np.random.default_rng(seed)
    snr = scn.visibility.snr_linear.copy()
    rx = scn.visibility.rx_power_w.copy()
    n, horizon = scn.n_devices, scn.horizon
    spans = {RF: (2, 6), OWC: (3, 8)}
    probs = {RF: rf_prob, OWC: owc_prob}
    for i in range(n):
        for j in range(i + 1, n):
            for m in (RF, OWC):
                if not (np.isfinite(snr[i, j, :, m]).any() or np.isfinite(snr[j, i, :, m]).any()):
                    continue
                if rng.random() >= probs[m]:
                    continue
                low, high = spans[m]
                length = min(int(rng.integers(low, high + 1)), horizon)
                start = int(rng.integers(1, max(horizon - length + 1, 1) + 1))
                sl = slice(start - 1, start - 1 + length)
                snr[i, j, sl, m] = IMPOSSIBLE
                snr[j, i, sl, m] = IMPOSSIBLE
                rx[i, j, sl, m] = 0.0
                rx[j, i, sl, m] = 0.0
    return replace(scn, visibility=VisibilityMatrix(snr, rx))


def inject_staleness(
    scn: Scenario,
    n_snapshots: int,
    fraction: float,
    seed: int,
) -> tuple[Scenario, list[tuple[int, int, int]]]:
    """Replace link-state entries in chosen snapshots with values from an
    earlier, non-adjacent snapshot, for robustness experiments.

    Picks ``n_snapshots`` pairwise non-adjacent steps; in each, replaces
    ceil(fraction * |E|) directed edges' per-technology entries with those of
    a donor step at least 2 steps earlier.  Returns the perturbed copy and
    the list of modified (i, j, k) with 1-based k.
    """
    if not 0.0 <= fraction <= 1.0:
        raise ValueError("fraction must be in [0, 1]")
    if n_snapshots >= scn.horizon:
        raise ValueError("need fewer snapshots than the horizon")
    if fraction == 0.0 or n_snapshots == 0:
        return scn, []
    candidates = list(range(3, scn.horizon + 1))
    max_pickable = (len(candidates) + 1) // 2
    if n_snapshots > max_pickable:
        raise ValueError(
            f"cannot pick {n_snapshots} non-adjacent snapshots from horizon {scn.horizon}"
        )
    rng = np.random.default_rng(seed)
    chosen: list[int] = []
    for _ in range(1000):
        chosen = []
        for k in rng.permutation(candidates):
            if all(abs(int(k) - c) >= 2 for c in chosen):
                chosen.append(int(k))
            if len(chosen) == n_snapshots:
                break
        if len(chosen) == n_snapshots:
            break
    if len(chosen) < n_snapshots:
        raise ValueError("failed to pick non-adjacent snapshots")
    chosen.sort()

    n = scn.n_devices
    edges = [(i, j) for i in range(n) for j in range(n) if i != j]
    count = math.ceil(fraction * len(edges))
    snr = scn.visibility.snr_linear.copy()
    rx = scn.visibility.rx_power_w.copy()
    modified: list[tuple[int, int, int]] = []
    for k in chosen:
        donor = int(rng.integers(1, k - 1))  # any step in [1, k-2]
        picked = rng.choice(len(edges), size=count, replace=False)
        for idx in sorted(int(p) for p in picked):
            i, j = edges[idx]
            snr[i, j, k - 1, :] = snr[i, j, donor - 1, :]
            rx[i, j, k - 1, :] = rx[i, j, donor - 1, :]
            modified.append((i, j, k))
    return replace(scn, visibility=VisibilityMatrix(snr, rx)), modified


def rf_only(scn: Scenario) -> Scenario:
    """Scenario transform that forbids every OWC entry (RF-only baseline)."""
    snr = scn.visibility.snr_linear.copy()
    rx = scn.visibility.rx_power_w.copy()
    snr[:, :, :, OWC] = IMPOSSIBLE
    rx[:, :, :, OWC] = 0.0
    return replace(scn, visibility=VisibilityMatrix(snr, rx))


# ---------------------------------------------------------------------------
# Serialization: versioned, self-describing JSON with stable field order.

def scenario_to_json(scn: Scenario) -> str:
    payload = {
        "schema": SCENARIO_SCHEMA,
        "version": SCENARIO_VERSION,
        "seed": scn.seed,
        "horizon": scn.horizon,
        "step_s": scn.step_s,
        "packet_bits": scn.packet_bits,
        "l_count": scn.l_count,
        "devices": {
            "n_nodes": scn.devices.n_nodes,
            "n_aps": scn.devices.n_aps,
            "distances_m": scn.devices.distances_m.tolist(),
            "budgets_j": scn.devices.budgets_j.tolist(),
        },
        "rf": scn.rf.__dict__,
        "owc": scn.owc.__dict__,
        "messages": [
            [f.src, f.dst, f.seq, f.data_type, f.window_start, f.window_end, f.packets]
            for f in scn.messages
        ],
        "comm_schedule": scn.comm_schedule.tolist(),
        "visibility": {
            "snr_linear": _encode_inf(scn.visibility.snr_linear),
            "rx_power_w": scn.visibility.rx_power_w.tolist(),
        },
    }
    return json.dumps(payload, indent=1)


def scenario_from_json(text: str) -> Scenario:
    payload = json.loads(text)
    if payload.get("schema") != SCENARIO_SCHEMA:
        raise ValueError(f"not a scenario file (schema {payload.get('schema')!r})")
    if payload.get("version") != SCENARIO_VERSION:
        raise ValueError(f"unsupported scenario version {payload.get('version')!r}")
    dev = payload["devices"]
    devices = DeviceSet(
        dev["n_nodes"],
        dev["n_aps"],
        np.array(dev["distances_m"]),
        np.array(dev["budgets_j"]),
    )
    messages = tuple(Message(*row) for row in payload["messages"])
    visibility = VisibilityMatrix(
        _decode_inf(payload["visibility"]["snr_linear"]),
        np.array(payload["visibility"]["rx_power_w"]),
    )
    return Scenario(
        devices=devices,
        messages=messages,
        visibility=visibility,
        comm_schedule=np.array(payload["comm_schedule"], dtype=np.uint8),
        horizon=payload["horizon"],
        step_s=payload["step_s"],
        packet_bits=payload["packet_bits"],
        l_count=payload["l_count"],
        seed=payload["seed"],
        rf=RfParams(**payload["rf"]),
        owc=OwcParams(**payload["owc"]),
    )


def save_scenario(scn: Scenario, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(scenario_to_json(scn))


def load_scenario(path: str) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return scenario_from_json(fh.read())


def _encode_inf(arr: np.ndarray):
    # JSON has no -inf literal; encode impossible entries as None.
    return [
        [[[None if v == IMPOSSIBLE else v for v in tech] for tech in step] for step in row]
        for row in arr.tolist()
    ]


def _decode_inf(nested) -> np.ndarray:
    arr = np.array(
        [
            [[[IMPOSSIBLE if v is None else v for v in tech] for tech in step] for step in row]
            for row in nested
        ],
        dtype=float,
    )
    return arr
