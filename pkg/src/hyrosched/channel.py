"""RF and optical link physics: path loss, fading, received power, SNR, capacity,
and per-bit energy.

All SNR values are handled in linear units internally; dB enters only at I/O
boundaries (parameter files, logs).  Every function here is a pure function of
its arguments; random sampling takes an explicit ``numpy.random.Generator``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

import numpy as np

K_BOLTZMANN = 1.380649e-23  # J/K
Q_ELECTRON = 1.602176634e-19  # C

#: Reference distance for the log-distance path-loss model (m).
D0_M = 1.0

RF = 0
OWC = 1


class LinkUnusableError(ValueError):
    """Raised when a per-bit energy is requested for a zero-capacity link."""


@dataclass(frozen=True)
class RfParams:
    """Indoor RF channel and radio parameters.

    Defaults follow the standard 2.4 GHz-class indoor setup used throughout
    this package: 2 MHz bandwidth, 50 mW transmit power, path-loss exponent 3,
    40 dB loss at the 1 m reference distance, 5 dBi antennas, and a 15 dB
    admission threshold.
    """

    pl0_db: float = 40.0
    alpha: float = 3.0
    sigma_psi_db: float = 4.0
    rician_k: float = 5.0
    tx_power_w: float = 0.05
    gain_tx_db: float = 5.0
    gain_rx_db: float = 5.0
    bandwidth_hz: float = 2e6
    temperature_k: float = 290.0
    snr_min_db: float = 15.0

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("path-loss exponent must be positive")
        if self.bandwidth_hz <= 0:
            raise ValueError("bandwidth must be positive")
        if self.tx_power_w <= 0:
            raise ValueError("transmit power must be positive")
        if self.rician_k < 0:
            raise ValueError("Rician K factor must be non-negative")
        if self.temperature_k <= 0:
            raise ValueError("temperature must be positive")


@dataclass(frozen=True)
class OwcParams:
    """LED/photodiode optical link parameters.

    ``kappa`` splits transmit power between data modulation and illumination;
    only the ``kappa`` share counts as communication power.  ``conv_eff`` is
    the electrical-to-optical conversion efficiency of the LED driver and
    ``bias_v`` the photodiode bias voltage used on reception.
    """

    tx_power_w: float = 5.0
    t_opt: float = 0.99
    lambert_u: float = 1.0
    kappa: float = 0.3
    area_m2: float = 0.0025
    responsivity_a_per_w: float = 0.6
    ambient_power_w: float = 1e-9
    load_ohm: float = 50.0
    bandwidth_hz: float = 1e9
    conv_eff: float = 0.5
    bias_v: float = 3.0
    temperature_k: float = 290.0
    snr_min_db: float = 10.0

    def __post_init__(self):
        for f in fields(self):
            if getattr(self, f.name) <= 0:
                raise ValueError(f"{f.name} must be strictly positive")
        if self.kappa > 1:
            raise ValueError("kappa must be in (0, 1]")
        if self.t_opt > 1:
            raise ValueError("t_opt must be in (0, 1]")


@dataclass(frozen=True)
class LinkGeometry:
    """Geometry of one directed link: distance plus LED irradiance angle at the
    transmitter and photodiode incidence angle at the receiver (radians)."""

    distance_m: float
    irradiance_rad: float = 0.0
    incidence_rad: float = 0.0

    def __post_init__(self):
        if self.distance_m <= 0:
            raise ValueError("distance must be positive")


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    if x <= 0:
        raise ValueError("cannot convert non-positive value to dB")
    return 10.0 * math.log10(x)


def rf_path_loss_db(d: float, params: RfParams, shadow_db: float = 0.0) -> float:
    """Log-distance path loss with an additive shadow-fading term, in dB.

    ``d`` must be at least the 1 m reference distance.
    """
    if d < D0_M:
        raise ValueError(f"distance {d} m is below the reference distance {D0_M} m")
    return params.pl0_db + 10.0 * params.alpha * math.log10(d / D0_M) + shadow_db


def sample_rician_power_gain(k_factor: float, rng: np.random.Generator) -> float:
    """Sample a unit-mean Rician power gain |h|^2.

    h combines a fixed-magnitude LoS phasor with uniform phase and a standard
    complex-normal scatter component, weighted so that E[|h|^2] = 1 for any K.
    """
    if k_factor < 0:
        raise ValueError("Rician K factor must be non-negative")
    gamma = rng.uniform(0.0, 2.0 * math.pi)
    z = (rng.normal(0.0, math.sqrt(0.5)) + 1j * rng.normal(0.0, math.sqrt(0.5)))
    h = math.sqrt(k_factor / (1.0 + k_factor)) * np.exp(1j * gamma)
    h += math.sqrt(1.0 / (1.0 + k_factor)) * z
    return float(abs(h) ** 2)


def rf_snr_linear(
    geom: LinkGeometry,
    params: RfParams,
    shadow_db: float = 0.0,
    fading_gain: float = 1.0,
) -> float:
    """Linear RF SNR: received power over thermal noise k_B * T * B."""
    pl_db = rf_path_loss_db(geom.distance_m, params, shadow_db)
    p_rx = (
        params.tx_power_w
        * db_to_linear(params.gain_tx_db)
        * db_to_linear(params.gain_rx_db)
        * db_to_linear(-pl_db)
        * fading_gain
    )
    noise_w = K_BOLTZMANN * params.temperature_k * params.bandwidth_hz
    return p_rx / noise_w


def rf_received_power_w(
    geom: LinkGeometry,
    params: RfParams,
    shadow_db: float = 0.0,
    fading_gain: float = 1.0,
) -> float:
    """Received RF power in watts (needed for the receive-side energy cost)."""
    noise_w = K_BOLTZMANN * params.temperature_k * params.bandwidth_hz
    return rf_snr_linear(geom, params, shadow_db, fading_gain) * noise_w


def owc_received_power_w(geom: LinkGeometry, params: OwcParams) -> float:
    """Received optical power of a Lambertian LED link, in watts.

    Zero outside the half-plane: any angle at or beyond pi/2 kills the link.
    """
    theta, phi = geom.irradiance_rad, geom.incidence_rad
    if theta >= math.pi / 2 or phi >= math.pi / 2:
        return 0.0
    u = params.lambert_u
    return (
        params.kappa
        * params.tx_power_w
        * params.t_opt
        * (u + 1.0)
        * params.area_m2
        * math.cos(theta) ** u
        * math.cos(phi)
        / (2.0 * math.pi * geom.distance_m**2)
    )


def owc_snr_linear(geom: LinkGeometry, params: OwcParams) -> float:
    """Linear OWC SNR: photocurrent signal power over shot plus thermal noise."""
    p_r = owc_received_power_w(geom, params)
    return owc_snr_from_power(p_r, params)


def owc_snr_from_power(received_power_w: float, params: OwcParams) -> float:
    """OWC SNR given an already-computed received optical power."""
    i_r = params.responsivity_a_per_w * received_power_w
    i_n = params.responsivity_a_per_w * params.ambient_power_w
    shot = 2.0 * Q_ELECTRON * (i_r + i_n) * params.bandwidth_hz
    thermal = 4.0 * K_BOLTZMANN * params.temperature_k / params.load_ohm * params.bandwidth_hz
    return i_r**2 / (shot + thermal)


def link_capacity_bps(snr_linear: float, bandwidth_hz: float) -> float:
    """Shannon capacity B * log2(1 + SNR) in bit/s."""
    if snr_linear < 0:
        raise ValueError("SNR must be non-negative")
    return bandwidth_hz * math.log2(1.0 + snr_linear)


def energy_per_bit_j(
    tech: int,
    role: str,
    capacity_bps: float,
    params: RfParams | OwcParams,
    received_power_w: float = 0.0,
) -> float:
    """Per-bit energy cost in J/bit for one side of a link.

    RF: transmit power (send) or received power (receive) over capacity.
    OWC: LED electrical power P_t / conv_eff (send) or photodiode dissipation
    I_r * V_bias (receive) over capacity.
    """
    if role not in ("send", "receive"):
        raise ValueError(f"unknown role {role!r}")
    if capacity_bps <= 0:
        raise LinkUnusableError("zero-capacity link has infinite per-bit energy")
    if tech == RF:
        if not isinstance(params, RfParams):
            raise TypeError("RF energy needs RfParams")
        power = params.tx_power_w if role == "send" else received_power_w
    elif tech == OWC:
        if not isinstance(params, OwcParams):
            raise TypeError("OWC energy needs OwcParams")
        if role == "send":
            power = params.tx_power_w / params.conv_eff
        else:
            power = params.responsivity_a_per_w * received_power_w * params.bias_v
    else:
        raise ValueError(f"unknown technology {tech}")
    return power / capacity_bps


def load_channel_config(path: str) -> tuple[RfParams, OwcParams]:
    """Read channel parameters from a flat key/value text file.

    Lines look like ``rf.tx_power_w = 0.05`` or ``owc.kappa = 0.3``; ``#``
    starts a comment.  Keys not present keep their defaults.
    """
    rf_over: dict[str, float] = {}
    owc_over: dict[str, float] = {}
    rf_fields = {f.name for f in fields(RfParams)}
    owc_fields = {f.name for f in fields(OwcParams)}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            try:
                num = float(value)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: bad numeric value {value!r}") from exc
            if key.startswith("rf.") and key[3:] in rf_fields:
                rf_over[key[3:]] = num
            elif key.startswith("owc.") and key[4:] in owc_fields:
                owc_over[key[4:]] = num
            else:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
    return replace(RfParams(), **rf_over), replace(OwcParams(), **owc_over)
