"""
Evaluating a constellation configuration
========================================

Run several seeded realizations of a day-long scenario and summarise the
throughput, fairness and per-layer load with 95% confidence intervals.
"""

from ntnopt.config import config_from_dict
from ntnopt.runner import run_evaluate

cfg = config_from_dict({"global": {"n_users": 200, "steps": 12, "realizations": 5, "seed": 0}})
out = run_evaluate(cfg, (9, 15, 7, 3))
s = out.summary

print(f"configuration {s['configuration']}")
print(f"mean sum rate {s['mean_sum_rate_gbps']:.2f} Gbps "
      f"(+/- {s['ci_half_width']['sum_rate_bps'] / 1e9:.2f})")
print(f"mean JFI {s['mean_jfi']:.3f} (+/- {s['ci_half_width']['jfi']:.3f}), "
      f"JFI of time-averaged user rates {s['jfi_of_mean_user_rates']:.3f}")
print(f"objective {s['objective']:.3f}, constraint violations {s['constraint_violations']}")
for lid, d in s["per_layer"].items():
    print(f"  {lid}: {d['mean_users_covered']:6.1f} users, {d['mean_active_sats']:5.2f} sats, "
          f"radius {d['mean_beam_radius_km']:7.1f} km")

# %%
# Time series with confidence bands
# ---------------------------------
series = s["series"]["sum_rate_bps"]
for t, (m, lo, hi) in enumerate(zip(series["mean"], series["lower"], series["upper"])):
    print(f"t={t:2d}h  {m / 1e9:6.2f} Gbps  [{lo / 1e9:6.2f}, {hi / 1e9:6.2f}]")
