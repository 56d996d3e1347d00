"""Walker-Delta constellation generation and circular two-body propagation.

Positions are produced on a spherical Earth. Each layer is a uniform set of
circular orbits; satellites are phased with the in-plane offset
``(2*pi*s/S + pi*p/S) mod 2*pi``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

MU_EARTH = 398600.4418  # km^3/s^2
R_EARTH = 6371.0  # km
OMEGA_EARTH = 7.2921159e-5  # rad/s

LAYER_ORDER = ("L", "M", "G")

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class LayerConfig:
    """Design parameters of one orbital layer."""

    layer_id: str
    planes: int
    sats_per_plane: int
    altitude_km: float
    inclination_deg: float
    longitude_offset_deg: float = 0.0

    def __post_init__(self):
        if self.layer_id not in LAYER_ORDER:
            raise ValueError(f"layer_id must be one of {LAYER_ORDER}, got {self.layer_id!r}")
        if self.planes < 1 or self.sats_per_plane < 1:
            raise ValueError("planes and sats_per_plane must be >= 1")
        if not self.altitude_km > 0:
            raise ValueError("altitude_km must be > 0")
        if not 0.0 <= self.inclination_deg <= 180.0:
            raise ValueError("inclination_deg must lie in [0, 180]")

    @property
    def n_sats(self) -> int:
        return self.planes * self.sats_per_plane


@dataclass(frozen=True)
class SatelliteSnapshot:
    layer_id: str
    plane: int
    sat: int
    lat_deg: float
    lon_deg: float
    altitude_km: float


@dataclass(frozen=True)
class Constellation:
    layers: tuple[LayerConfig, ...]
    epoch_s: float = 0.0
    mu: float = MU_EARTH
    earth_radius_km: float = R_EARTH
    earth_rotation_rad_s: float = OMEGA_EARTH

    @property
    def n_sats(self) -> int:
        return sum(layer.n_sats for layer in self.layers)


@dataclass
class SatelliteArrays:
    """Column-oriented view of every satellite at one instant.

    Row order is layer (as configured), then plane, then satellite index.
    """

    layer: np.ndarray  # str labels
    plane: np.ndarray
    sat: np.ndarray
    lat_deg: np.ndarray
    lon_deg: np.ndarray
    altitude_km: np.ndarray
    ecef_km: np.ndarray = field(repr=False)  # (n, 3) Earth-fixed Cartesian

    def __len__(self) -> int:
        return len(self.lat_deg)

    def snapshots(self) -> list[SatelliteSnapshot]:
        return [
            SatelliteSnapshot(
                str(self.layer[i]),
                int(self.plane[i]),
                int(self.sat[i]),
                float(self.lat_deg[i]),
                float(self.lon_deg[i]),
                float(self.altitude_km[i]),
            )
            for i in range(len(self))
        ]

    def layer_indices(self, layer_id: str) -> np.ndarray:
        return np.flatnonzero(self.layer == layer_id)


def raan_of_plane(p: int, n_planes: int) -> float:
    """Right ascension of the ascending node of plane ``p`` in radians."""
    if not 0 <= p < n_planes:
        raise IndexError(f"plane index {p} outside [0, {n_planes})")
    return TWO_PI * p / n_planes


def mean_anomaly_of(s: int, p: int, sats_per_plane: int) -> float:
    if not 0 <= s < sats_per_plane:
        raise IndexError(f"satellite index {s} outside [0, {sats_per_plane})")
    return (TWO_PI * s / sats_per_plane + math.pi * p / sats_per_plane) % TWO_PI


def orbital_period(altitude_km: float, mu: float = MU_EARTH, earth_radius_km: float = R_EARTH) -> float:
    """Period in seconds of a circular orbit at the given altitude."""
    if not altitude_km > 0:
        raise ValueError("altitude_km must be > 0")
    a = earth_radius_km + altitude_km
    return TWO_PI * math.sqrt(a**3 / mu)


def wrap_longitude(lon_deg):
    """Wrap longitudes to [-180, 180)."""
    return (np.asarray(lon_deg, dtype=float) + 180.0) % 360.0 - 180.0


def _layer_eci(layer: LayerConfig, t: float, const: Constellation) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    p_idx, s_idx = np.meshgrid(
        np.arange(layer.planes), np.arange(layer.sats_per_plane), indexing="ij"
    )
    p_idx = p_idx.ravel()
    s_idx = s_idx.ravel()
    raan = TWO_PI * p_idx / layer.planes
    anomaly = np.mod(
        TWO_PI * s_idx / layer.sats_per_plane + math.pi * p_idx / layer.sats_per_plane, TWO_PI
    )
    period = orbital_period(layer.altitude_km, const.mu, const.earth_radius_km)
    u = anomaly + (TWO_PI / period) * t
    r = const.earth_radius_km + layer.altitude_km
    inc = math.radians(layer.inclination_deg)

    # in-plane -> rotate about x by inclination -> rotate about z by RAAN
    xp = r * np.cos(u)
    yp = r * np.sin(u) * math.cos(inc)
    zp = r * np.sin(u) * math.sin(inc)
    x = xp * np.cos(raan) - yp * np.sin(raan)
    y = xp * np.sin(raan) + yp * np.cos(raan)
    return np.column_stack([x, y, zp]), p_idx, s_idx


def eci_to_ecef(eci_km: np.ndarray, t: float, omega: float, offset_deg: float = 0.0) -> np.ndarray:
    """Rotate inertial positions into the Earth-fixed frame.

    The frame angle is ``-omega*t`` plus a per-layer longitude offset.
    """
    theta = -omega * t + math.radians(offset_deg)
    c, s = math.cos(theta), math.sin(theta)
    x = eci_km[:, 0] * c - eci_km[:, 1] * s
    y = eci_km[:, 0] * s + eci_km[:, 1] * c
    return np.column_stack([x, y, eci_km[:, 2]])


def ecef_to_geodetic(ecef_km: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Spherical-Earth latitude/longitude (degrees) and radius (km)."""
    r = np.linalg.norm(ecef_km, axis=1)
    lat = np.degrees(np.arcsin(np.clip(ecef_km[:, 2] / r, -1.0, 1.0)))
    lon = wrap_longitude(np.degrees(np.arctan2(ecef_km[:, 1], ecef_km[:, 0])))
    return lat, lon, r


def propagate_arrays(const: Constellation, t: float) -> SatelliteArrays:
    """Propagate every satellite to ``t`` seconds after the epoch."""
    if t < 0:
        raise ValueError("t must be >= 0")
    layers, planes, sats, ecef, alts = [], [], [], [], []
    for layer in const.layers:
        eci, p_idx, s_idx = _layer_eci(layer, t, const)
        ecef.append(eci_to_ecef(eci, t, const.earth_rotation_rad_s, layer.longitude_offset_deg))
        layers.append(np.full(layer.n_sats, layer.layer_id))
        planes.append(p_idx)
        sats.append(s_idx)
        alts.append(np.full(layer.n_sats, float(layer.altitude_km)))
    if not ecef:
        empty = np.zeros(0)
        return SatelliteArrays(np.zeros(0, dtype="<U1"), empty.astype(int), empty.astype(int),
                               empty, empty, empty, np.zeros((0, 3)))
    ecef_all = np.vstack(ecef)
    lat, lon, _ = ecef_to_geodetic(ecef_all)
    return SatelliteArrays(
        layer=np.concatenate(layers),
        plane=np.concatenate(planes),
        sat=np.concatenate(sats),
        lat_deg=lat,
        lon_deg=lon,
        altitude_km=np.concatenate(alts),
        ecef_km=ecef_all,
    )


def propagate(const: Constellation, t: float) -> list[SatelliteSnapshot]:
    return propagate_arrays(const, t).snapshots()
