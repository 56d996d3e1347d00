"""
Walker-Delta layers over a day
==============================

Build the three orbital layers, propagate them for 24 hours and look at where
the satellites sit relative to the service region.
"""

import numpy as np

from ntnopt.channel import visible
from ntnopt.mobility import RegionModel
from ntnopt.orbital import Constellation, LayerConfig, orbital_period, propagate_arrays

# A LEO shell of 9 planes x 15 satellites, a sparse MEO shell and three
# equatorial GEO slots anchored at 100 W.
const = Constellation((
    LayerConfig("L", 9, 15, 600.0, 53.0),
    LayerConfig("M", 7, 3, 20200.0, 56.0),
    LayerConfig("G", 1, 3, 35786.0, 0.0, -100.0),
))
print(f"{const.n_sats} satellites")
for layer in const.layers:
    print(f"  {layer.layer_id}: {layer.n_sats:4d} sats, period {orbital_period(layer.altitude_km) / 60:7.1f} min")

# Sub-satellite latitude never exceeds the inclination.
snap = propagate_arrays(const, 0.0)
for lid in "LMG":
    lat = snap.lat_deg[snap.layer_indices(lid)]
    print(f"  {lid}: max |lat| = {np.max(np.abs(lat)):.2f} deg")

# %%
# Visibility from the centre of the region, hour by hour
# ------------------------------------------------------
region = RegionModel.canada()
lat0 = 0.5 * (region.bbox[0] + region.bbox[1])
lon0 = 0.5 * (region.bbox[2] + region.bbox[3])
print(f"\nvisible satellites (elevation >= 10 deg) from ({lat0:.1f}, {lon0:.1f})")
print(" hour    L    M    G")
for hour in range(0, 24, 3):
    s = propagate_arrays(const, hour * 3600.0)
    vis = visible(lat0, lon0, s.lat_deg, s.lon_deg, s.altitude_km, 10.0)
    counts = [int(np.sum(vis[s.layer_indices(lid)])) for lid in "LMG"]
    print(f"{hour:5d} " + " ".join(f"{c:4d}" for c in counts))
