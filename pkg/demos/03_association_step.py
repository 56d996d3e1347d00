"""
One association step
====================

Drop users into the region, cluster them into candidate beams and watch the
layered association fill LEO first, then MEO, then GEO.
"""

import numpy as np

from ntnopt.association import AssociationParams, run_association_step
from ntnopt.channel import ChannelParams
from ntnopt.metrics import jfi, step_metrics
from ntnopt.mobility import MobilityParams, RegionModel, init_users
from ntnopt.orbital import Constellation, LayerConfig, propagate_arrays

region = RegionModel.canada()
users = init_users(300, region, MobilityParams(), 3)
const = Constellation((
    LayerConfig("L", 9, 15, 600.0, 53.0),
    LayerConfig("M", 7, 3, 20200.0, 56.0),
    LayerConfig("G", 1, 3, 35786.0, 0.0, -100.0),
))
sats = propagate_arrays(const, 6 * 3600.0)

params = AssociationParams(beams_per_sat=15, users_per_beam=20)
a = run_association_step(users, sats, params, ChannelParams(), np.random.default_rng(3))
m = step_metrics(a, len(users.ids))

for lid in "LMG":
    beams = a.beams[lid]
    print(f"{lid}: {len(beams):3d} beams on {m.active_sats[lid]:3d} sats, "
          f"{m.users_covered[lid]:4d} users, mean radius {m.mean_beam_radius_km[lid]:7.1f} km")
print(f"uncovered: {len(users.ids) - len(a.links)}")

# %%
# Per-beam view of the LEO layer
# ------------------------------
for b in a.beams["L"][:5]:
    sinr_db = [10 * np.log10(a.links[u].sinr) for u in b.admitted]
    print(f"beam {b.beam_id:3d} sat {b.sat:3d}: {len(b.admitted):2d}/{len(b.members):2d} admitted, "
          f"SINR {min(sinr_db):5.1f}..{max(sinr_db):5.1f} dB")

# %%
# Throughput and fairness for the step
# ------------------------------------
rates = np.zeros(len(users.ids))
for u, rec in a.links.items():
    rates[u] = rec.rate_bps
print(f"sum rate {rates.sum() / 1e9:.2f} Gbps, JFI {jfi(rates):.3f} (covered only: {jfi(rates[rates > 0]):.3f})")
