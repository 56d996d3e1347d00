"""
Downlink budget for one user
============================

Walk through the received power, noise floor and SINR of a single user as the
serving satellite moves away from zenith, and then as co-channel beams pile up.
"""

from types import SimpleNamespace

import numpy as np

from ntnopt.channel import (
    ChannelParams,
    elevation_deg,
    fspl_db,
    geodetic_to_ecef,
    noise_power_dbm,
    received_power_dbm,
    sinr,
    slant_range_km,
)
from ntnopt.metrics import user_rate_bps
from ntnopt.orbital import R_EARTH, SatelliteArrays

p = ChannelParams()
print(f"noise floor: {noise_power_dbm(p.bandwidth_hz, p.temperature_k, p.noise_figure_db):.2f} dBm")
print(f"excess loss (rain + cloud + vapour): {p.excess_loss_db:.1f} dB\n")

# %%
# Ground distance sweep for a 600 km satellite
# --------------------------------------------
user = (50.0, -100.0)
print(" offset_deg  elev_deg  range_km   FSPL_dB  Pr_dBm")
for offset in (0.0, 2.0, 5.0, 10.0, 15.0):
    d = float(slant_range_km(user[0], user[1], user[0] + offset, user[1], 600.0))
    el = float(elevation_deg(user[0], user[1], user[0] + offset, user[1], 600.0))
    loss = float(fspl_db(d, p.frequency_ghz))
    pr = received_power_dbm(p, loss + p.excess_loss_db)
    print(f"{offset:11.1f} {el:9.1f} {d:9.1f} {loss:9.2f} {pr:7.2f}")


def sats_at(lat, lon, alt):
    lat, lon = np.atleast_1d(lat).astype(float), np.atleast_1d(lon).astype(float)
    n = len(lat)
    alt = np.full(n, alt)
    return SatelliteArrays(np.full(n, "L"), np.arange(n), np.zeros(n, int), lat, lon, alt,
                           geodetic_to_ecef(lat, lon, R_EARTH + alt))


# %%
# Beams sharing the serving satellite
# -----------------------------------
# Every extra beam on the same satellite leaks power through the sidelobes.
sats = sats_at([50.0, 53.0], [-100.0, -96.0], 600.0)
print("\n beams_on_sat  beams_on_neighbour  SINR_dB  rate_Mbps")
for own, other in ((1, 0), (2, 0), (5, 0), (5, 5), (15, 15)):
    beams = [SimpleNamespace(beam_id=i, sat=0) for i in range(own)]
    beams += [SimpleNamespace(beam_id=own + i, sat=1) for i in range(other)]
    s = sinr(user[0], user[1], beams[0], beams, sats, p)
    print(f"{own:13d} {other:19d} {10 * np.log10(s):8.2f} {user_rate_bps(p.bandwidth_hz, s) / 1e6:10.1f}")
