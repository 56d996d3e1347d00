"""Throughput, fairness, scalarized objective and realization statistics."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import haversine_km
from .orbital import LAYER_ORDER, R_EARTH

CI_Z = 1.96
BANDWIDTH_POLICIES = ("full", "split")


@dataclass
class StepMetrics:
    t: int
    users_covered: dict[str, int]
    active_sats: dict[str, int]
    mean_beams_per_sat: dict[str, float]  # nan when no active satellite
    mean_beam_radius_km: dict[str, float]  # nan when no beam
    beam_radii_km: dict[str, list[float]] = field(repr=False)
    sum_rate_by_layer: dict[str, float]
    sum_rate_bps: float
    jfi: float


@dataclass
class TrialRecord:
    configuration: tuple[int, int, int, int]
    steps: list[StepMetrics]
    mean_sum_rate_bps: float
    mean_jfi: float
    objective: float


def user_rate_bps(bandwidth_hz, sinr):
    """Shannon rate ``B * log2(1 + SINR)``."""
    return np.asarray(bandwidth_hz, dtype=float) * np.log2(1.0 + np.asarray(sinr, dtype=float))


def allocated_bandwidth(bandwidth_hz: float, beam_sizes, policy: str = "full"):
    """Per-user bandwidth: the whole channel (full reuse) or an equal share of the beam."""
    beam_sizes = np.asarray(beam_sizes, dtype=float)
    if policy == "full":
        return np.full(beam_sizes.shape, float(bandwidth_hz))
    if policy == "split":
        return bandwidth_hz / beam_sizes
    raise ValueError(f"unknown bandwidth policy {policy!r}")


def sum_rate_bps(records) -> float:
    return float(sum(r.rate_bps for r in records))


def jfi(rates, n: int | None = None) -> float:
    """Jain's index over ``n`` users; users missing from ``rates`` count as 0."""
    rates = np.asarray(rates, dtype=float)
    if n is None:
        n = rates.size
    if n < 1 or rates.size > n:
        raise ValueError("n must be >= max(1, len(rates))")
    peak = float(np.max(np.abs(rates))) if rates.size else 0.0
    if peak == 0.0:
        return 0.0
    # scale by the peak so tiny or huge rates do not under/overflow when squared
    x = rates / peak
    return float(np.sum(x)) ** 2 / (n * float(np.sum(x * x)))


def scalarize(mean_rate_bps: float, mean_jfi: float, omega: float, r_ref_bps: float) -> float:
    if not 0.0 <= omega <= 1.0:
        raise ValueError("omega must lie in [0, 1]")
    if not r_ref_bps > 0:
        raise ValueError("r_ref_bps must be > 0")
    return omega * min(mean_rate_bps / r_ref_bps, 1.0) + (1.0 - omega) * mean_jfi


def beam_radius_km(centroid, member_lat, member_lon, earth_radius_km: float = R_EARTH) -> float:
    member_lat = np.asarray(member_lat, dtype=float)
    if member_lat.size == 0:
        return float("nan")
    d = haversine_km(centroid[0], centroid[1], member_lat, np.asarray(member_lon, dtype=float),
                     earth_radius_km)
    return float(np.max(d))


@dataclass
class SeriesSummary:
    mean: np.ndarray
    lower: np.ndarray | None
    upper: np.ndarray | None

    @property
    def half_width(self):
        return None if self.upper is None else self.upper - self.mean


def aggregate_realizations(series) -> SeriesSummary:
    """Per-step mean and normal-approximation 95% interval across realizations.

    ``series`` has shape (realizations, steps). With fewer than two
    realizations only the mean is returned.
    """
    arr = np.atleast_2d(np.asarray(series, dtype=float))
    mean = np.nanmean(arr, axis=0) if arr.shape[0] else np.full(arr.shape[1], np.nan)
    if arr.shape[0] < 2:
        return SeriesSummary(mean, None, None)
    half = CI_Z * np.nanstd(arr, axis=0, ddof=1) / np.sqrt(np.sum(~np.isnan(arr), axis=0))
    return SeriesSummary(mean, mean - half, mean + half)


def step_metrics(assignment, n_users: int) -> StepMetrics:
    """Collapse one StepAssignment into per-layer and system metrics."""
    covered, active, beams_per, radius, radii, rate_layer = {}, {}, {}, {}, {}, {}
    for layer in LAYER_ORDER:
        beams = assignment.beams.get(layer, [])
        covered[layer] = sum(len(b.admitted) for b in beams)
        per_sat: dict[int, int] = {}
        for b in beams:
            per_sat[b.sat] = per_sat.get(b.sat, 0) + 1
        active[layer] = len(per_sat)
        beams_per[layer] = float(np.mean(list(per_sat.values()))) if per_sat else float("nan")
        radii[layer] = [b.radius_km for b in beams if b.admitted]
        radius[layer] = float(np.mean(radii[layer])) if radii[layer] else float("nan")
        rate_layer[layer] = float(sum(assignment.links[u].rate_bps for b in beams for u in b.admitted))
    rates = [rec.rate_bps for rec in assignment.links.values()]
    return StepMetrics(
        t=assignment.t,
        users_covered=covered,
        active_sats=active,
        mean_beams_per_sat=beams_per,
        mean_beam_radius_km=radius,
        beam_radii_km=radii,
        sum_rate_by_layer=rate_layer,
        sum_rate_bps=float(sum(rates)),
        jfi=jfi(rates, n_users),
    )
