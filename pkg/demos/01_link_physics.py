"""
Link physics walkthrough: path loss, SNR, capacity, energy per bit
==================================================================

Computes every channel quantity for one radio link and one optical link at
desk scale, printing the intermediate values.
"""

import math

import numpy as np

from hyrosched.channel import (
    OWC,
    RF,
    LinkGeometry,
    OwcParams,
    RfParams,
    energy_per_bit_j,
    linear_to_db,
    link_capacity_bps,
    owc_received_power_w,
    owc_snr_from_power,
    rf_path_loss_db,
    rf_snr_linear,
    sample_rician_power_gain,
)

rf = RfParams()
owc = OwcParams()

# --- a 10 m radio link, no shadowing, unit fading ------------------------
geom = LinkGeometry(distance_m=10.0)
pl = rf_path_loss_db(geom.distance_m, rf)
snr_rf = rf_snr_linear(geom, rf)
cap_rf = link_capacity_bps(snr_rf, rf.bandwidth_hz)
print(f"RF   d=10m  path loss {pl:.1f} dB, SNR {linear_to_db(snr_rf):.1f} dB "
      f"(threshold {rf.snr_min_db} dB), capacity {cap_rf / 1e6:.1f} Mbit/s")
print(f"     energy: send {energy_per_bit_j(RF, 'send', cap_rf, rf):.3e} J/bit")

# fading makes the SNR a random variable; the Rician gain has unit mean
rng = np.random.default_rng(0)
gains = [sample_rician_power_gain(rf.rician_k, rng) for _ in range(5)]
print("     five Rician power gains:", " ".join(f"{g:.2f}" for g in gains))

# --- a 3 m optical link at 60 degree angles -------------------------------
geom = LinkGeometry(3.0, math.radians(60), math.radians(60))
p_r = owc_received_power_w(geom, owc)
snr_owc = owc_snr_from_power(p_r, owc)
cap_owc = link_capacity_bps(snr_owc, owc.bandwidth_hz)
print(f"OWC  d=3m   received {p_r * 1e6:.1f} uW, SNR {linear_to_db(snr_owc):.1f} dB "
      f"(threshold {owc.snr_min_db} dB), capacity {cap_owc / 1e6:.0f} Mbit/s")
print(f"     energy: send {energy_per_bit_j(OWC, 'send', cap_owc, owc):.3e} J/bit, "
      f"receive {energy_per_bit_j(OWC, 'receive', cap_owc, owc, received_power_w=p_r):.3e} J/bit")

# the optical link dies outside the LED/photodiode half planes
dead = owc_received_power_w(LinkGeometry(3.0, math.radians(91), 0.0), owc)
print(f"     at 91 degrees irradiance the received power is {dead} W")
