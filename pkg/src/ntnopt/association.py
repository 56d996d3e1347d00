"""Per-step beam formation and user association.

For each layer in priority order (LEO, MEO, GEO) the users not yet covered
are clustered into candidate beams. Each cluster goes to the nearest
satellite that still has a free beam slot, and the beam admits its best
users by SINR, up to its capacity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelParams, LayerLinks, LinkRecord, haversine_km, visible
from .metrics import allocated_bandwidth, beam_radius_km, user_rate_bps
from .mobility import UserPopulation
from .orbital import LAYER_ORDER, R_EARTH, SatelliteArrays


@dataclass(frozen=True)
class AssociationParams:
    beams_per_sat: int = 15  # X
    users_per_beam: int = 20  # Z
    kmeans_max_iters: int = 50
    bandwidth_policy: str = "full"
    persist_covered: bool = False

    def __post_init__(self):
        if self.beams_per_sat < 1 or self.users_per_beam < 1:
            raise ValueError("beams_per_sat and users_per_beam must be >= 1")


@dataclass
class Beam:
    beam_id: int
    layer: str
    sat: int  # row in SatelliteArrays
    centroid: tuple[float, float]
    members: list[int] = field(default_factory=list)
    admitted: list[int] = field(default_factory=list)
    radius_km: float = float("nan")


@dataclass
class StepAssignment:
    t: int
    beams: dict[str, list[Beam]]
    user_beam: dict[int, int]
    links: dict[int, LinkRecord]
    usage: dict[int, int]

    @property
    def active_beams(self) -> list[Beam]:
        return [b for layer in LAYER_ORDER for b in self.beams.get(layer, [])]

    def covered_by_layer(self) -> dict[str, set[int]]:
        return {k: {u for b in self.beams.get(k, []) for u in b.admitted} for k in LAYER_ORDER}


def feasible_cluster_count(n_remaining: int, n_sats: int, beams_per_sat: int, users_per_beam: int) -> int:
    if n_remaining <= 0:
        return 0
    return min(n_sats * beams_per_sat, math.ceil(n_remaining / users_per_beam), n_remaining)


def _kmeans_pp(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(points)
    centers = np.empty((k, points.shape[1]))
    centers[0] = points[rng.integers(n)]
    d2 = np.sum((points - centers[0]) ** 2, axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = rng.choice(n, p=d2 / total)
        else:
            idx = rng.integers(n)
        centers[j] = points[idx]
        d2 = np.minimum(d2, np.sum((points - centers[j]) ** 2, axis=1))
    return centers


def _repair_empty(points, labels, centers, k):
    counts = np.bincount(labels, minlength=k)
    for j in np.flatnonzero(counts == 0):
        big = int(np.argmax(counts))
        members = np.flatnonzero(labels == big)
        far = members[int(np.argmax(np.sum((points[members] - centers[big]) ** 2, axis=1)))]
        labels[far] = j
        counts[big] -= 1
        counts[j] = 1
        centers[j] = points[far]
        centers[big] = points[labels == big].mean(axis=0)


def kmeans_cluster(points, k: int, rng: np.random.Generator, max_iters: int = 50):
    """Lloyd's algorithm on planar (lat, lon) with k-means++ seeding.

    Returns ``(labels, centroids)``. Every cluster is non-empty.
    """
    points = np.asarray(points, dtype=float)
    n = len(points)
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= {n}, got k={k}")
    centers = _kmeans_pp(points, k, rng)
    labels = None
    for _ in range(max_iters):
        d2 = np.sum((points[:, None, :] - centers[None, :, :]) ** 2, axis=2)
        new = np.argmin(d2, axis=1)
        _repair_empty(points, new, centers, k)
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        for j in range(k):
            centers[j] = points[labels == j].mean(axis=0)
    return labels, centers


def assign_cluster_to_satellite(centroid, sats: SatelliteArrays, candidates, usage: dict[int, int],
                                beams_per_sat: int, min_elevation_deg: float = 0.0,
                                earth_radius_km: float = R_EARTH) -> int | None:
    """Nearest satellite (sub-point Haversine) with a free beam slot and in view of the centroid."""
    candidates = np.asarray(candidates, dtype=int)
    if candidates.size == 0:
        return None
    free = np.array([usage.get(int(s), 0) < beams_per_sat for s in candidates])
    in_view = visible(centroid[0], centroid[1], sats.lat_deg[candidates], sats.lon_deg[candidates],
                      sats.altitude_km[candidates], min_elevation_deg, earth_radius_km)
    ok = free & in_view
    if not ok.any():
        return None
    d = haversine_km(centroid[0], centroid[1], sats.lat_deg[candidates], sats.lon_deg[candidates],
                     earth_radius_km)
    d = np.where(ok, d, np.inf)
    return int(candidates[int(np.argmin(d))])


def select_top_z(user_ids, sinr, z: int) -> list[int]:
    """Highest-SINR users, at most ``z``; ties go to the lower user id."""
    user_ids = np.asarray(user_ids)
    sinr = np.asarray(sinr, dtype=float)
    order = np.lexsort((user_ids, -sinr))
    return [int(u) for u in user_ids[order[:z]]]


def run_association_step(users: UserPopulation, sats: SatelliteArrays, params: AssociationParams,
                         channel: ChannelParams, rng: np.random.Generator, t: int = 0,
                         covered: set[int] | None = None,
                         earth_radius_km: float = R_EARTH) -> StepAssignment:
    """Form beams and admit users for one time step.

    ``covered`` holds users excluded up front (used when coverage persists
    across steps); it is updated in place with this step's admissions.
    Admission uses SINR against the beams activated so far in the layer;
    reported links are recomputed against the final beam layout.
    """
    covered = set() if covered is None else covered
    pos = users.pos
    index_of = {int(u): i for i, u in enumerate(users.ids)}
    beams: dict[str, list[Beam]] = {k: [] for k in LAYER_ORDER}
    usage: dict[int, int] = {}
    tables: dict[str, tuple[np.ndarray, LayerLinks]] = {}
    next_id = 0

    for layer in LAYER_ORDER:
        sat_idx = sats.layer_indices(layer)
        remaining = np.array([i for i, u in enumerate(users.ids) if int(u) not in covered], dtype=int)
        k = feasible_cluster_count(len(remaining), len(sat_idx), params.beams_per_sat,
                                   params.users_per_beam)
        if k == 0:
            continue
        links = LayerLinks(pos[:, 0], pos[:, 1], sats, sat_idx, channel, earth_radius_km)
        tables[layer] = (sat_idx, links)
        local_of = {int(s): j for j, s in enumerate(sat_idx)}
        counts = np.zeros(len(sat_idx))
        labels, centroids = kmeans_cluster(pos[remaining], k, rng, params.kmeans_max_iters)
        for c in range(k):
            members = remaining[labels == c]
            centroid = (float(centroids[c, 0]), float(centroids[c, 1]))
            s = assign_cluster_to_satellite(centroid, sats, sat_idx, usage, params.beams_per_sat,
                                            channel.min_elevation_deg, earth_radius_km)
            if s is None:
                continue
            j = local_of[s]
            counts[j] += 1
            usage[s] = usage.get(s, 0) + 1
            ratio = links.sinr(members, j, counts)
            admitted = select_top_z(users.ids[members], ratio, params.users_per_beam)
            beams[layer].append(Beam(next_id, layer, s, centroid,
                                     [int(u) for u in users.ids[members]], admitted))
            next_id += 1
            covered.update(admitted)

    user_beam: dict[int, int] = {}
    records: dict[int, LinkRecord] = {}
    for layer, (sat_idx, links) in tables.items():
        local_of = {int(s): j for j, s in enumerate(sat_idx)}
        counts = np.zeros(len(sat_idx))
        for b in beams[layer]:
            counts[local_of[b.sat]] += 1
        for b in beams[layer]:
            rows = np.array([index_of[u] for u in b.admitted], dtype=int)
            j = local_of[b.sat]
            intra, inter = links.interference(rows, j, counts)
            ratio = links.rx_mw[rows, j] / (intra + inter + links.noise_mw)
            bw = allocated_bandwidth(channel.bandwidth_hz, np.full(len(rows), len(rows)),
                                     params.bandwidth_policy)
            rates = user_rate_bps(bw, ratio)
            for n, u in enumerate(b.admitted):
                r = rows[n]
                fspl = float(links.fspl_db[r, j])
                records[u] = LinkRecord(
                    user_id=u, beam_id=b.beam_id,
                    slant_range_km=float(links.range_km[r, j]), fspl_db=fspl,
                    path_loss_db=fspl + channel.excess_loss_db,
                    rx_power_dbm=float(links.rx_dbm[r, j]),
                    i_intra_mw=float(intra[n]), i_inter_mw=float(inter[n]),
                    sinr=float(ratio[n]), rate_bps=float(rates[n]),
                )
                user_beam[u] = b.beam_id
            b.radius_km = beam_radius_km(b.centroid, pos[rows, 0], pos[rows, 1], earth_radius_km)

    return StepAssignment(t, beams, user_beam, records, usage)
