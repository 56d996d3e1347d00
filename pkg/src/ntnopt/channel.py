"""Geometry, link budget, interference and SINR.

Power bookkeeping is done in dBm for budgets and in mW for sums.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .orbital import R_EARTH, SatelliteArrays

BOLTZMANN = 1.380649e-23  # J/K

SLANT_MODES = ("geometric", "surface")


@dataclass(frozen=True)
class ChannelParams:
    frequency_ghz: float = 2.2
    bandwidth_hz: float = 20e6
    tx_power_dbm: float = 40.0
    sat_gain_dbi: float = 30.0
    user_gain_dbi: float = 0.0
    noise_figure_db: float = 2.0
    temperature_k: float = 290.0
    sidelobe_atten_db: float = 20.0
    rain_db: float = 0.3
    cloud_db: float = 0.2
    vapor_db: float = 0.1
    min_elevation_deg: float = 10.0
    slant_mode: str = "geometric"

    def __post_init__(self):
        if not self.bandwidth_hz > 0 or not self.temperature_k > 0:
            raise ValueError("bandwidth_hz and temperature_k must be > 0")
        if self.sidelobe_atten_db < 0:
            raise ValueError("sidelobe_atten_db must be >= 0")
        if min(self.rain_db, self.cloud_db, self.vapor_db) < 0:
            raise ValueError("atmospheric losses must be >= 0")
        if self.slant_mode not in SLANT_MODES:
            raise ValueError(f"slant_mode must be one of {SLANT_MODES}")

    @property
    def excess_loss_db(self) -> float:
        return self.rain_db + self.cloud_db + self.vapor_db

    @property
    def effective_interferer_gain_dbi(self) -> float:
        return self.sat_gain_dbi - self.sidelobe_atten_db

    @property
    def noise_dbm(self) -> float:
        return noise_power_dbm(self.bandwidth_hz, self.temperature_k, self.noise_figure_db)


@dataclass
class LinkRecord:
    user_id: int
    beam_id: int
    slant_range_km: float
    fspl_db: float
    path_loss_db: float
    rx_power_dbm: float
    i_intra_mw: float
    i_inter_mw: float
    sinr: float
    rate_bps: float = 0.0

    @property
    def i_total_mw(self) -> float:
        return self.i_intra_mw + self.i_inter_mw


def dbm_to_mw(dbm):
    return np.power(10.0, np.asarray(dbm, dtype=float) / 10.0)


def mw_to_dbm(mw):
    return 10.0 * np.log10(np.asarray(mw, dtype=float))


def haversine_km(lat1, lon1, lat2, lon2, earth_radius_km: float = R_EARTH):
    """Great-circle distance between points given in degrees."""
    phi1, phi2 = np.radians(lat1), np.radians(lat2)
    dphi = phi2 - phi1
    dlam = np.radians(np.asarray(lon2, dtype=float) - np.asarray(lon1, dtype=float))
    h = np.sin(dphi / 2) ** 2 + np.cos(phi1) * np.cos(phi2) * np.sin(dlam / 2) ** 2
    return 2.0 * earth_radius_km * np.arcsin(np.sqrt(np.clip(h, 0.0, 1.0)))


def central_angle_rad(lat1, lon1, lat2, lon2):
    return haversine_km(lat1, lon1, lat2, lon2, 1.0)


def geodetic_to_ecef(lat, lon, radius_km):
    lat_r, lon_r = np.radians(lat), np.radians(lon)
    radius_km = np.asarray(radius_km, dtype=float)
    return np.stack(
        [radius_km * np.cos(lat_r) * np.cos(lon_r),
         radius_km * np.cos(lat_r) * np.sin(lon_r),
         radius_km * np.sin(lat_r) * np.ones_like(lon_r)],
        axis=-1,
    )


def slant_range_km(user_lat, user_lon, sat_lat, sat_lon, altitude_km,
                   mode: str = "geometric", earth_radius_km: float = R_EARTH):
    """User-to-satellite distance.

    ``geometric`` is the 3-D chord between the user on the sphere and the
    satellite at radius ``R + h``. ``surface`` is the Haversine ground
    distance to the sub-satellite point, which is 0 at nadir.
    """
    if mode == "surface":
        return haversine_km(user_lat, user_lon, sat_lat, sat_lon, earth_radius_km)
    if mode != "geometric":
        raise ValueError(f"unknown slant mode {mode!r}")
    psi = central_angle_rad(user_lat, user_lon, sat_lat, sat_lon)
    r_sat = earth_radius_km + np.asarray(altitude_km, dtype=float)
    d2 = earth_radius_km**2 + r_sat**2 - 2.0 * earth_radius_km * r_sat * np.cos(psi)
    return np.sqrt(np.maximum(d2, 0.0))


def elevation_deg(user_lat, user_lon, sat_lat, sat_lon, altitude_km,
                  earth_radius_km: float = R_EARTH):
    psi = central_angle_rad(user_lat, user_lon, sat_lat, sat_lon)
    ratio = earth_radius_km / (earth_radius_km + np.asarray(altitude_km, dtype=float))
    return np.degrees(np.arctan2(np.cos(psi) - ratio, np.sin(psi)))


def visible(user_lat, user_lon, sat_lat, sat_lon, altitude_km, min_elevation_deg: float,
            earth_radius_km: float = R_EARTH):
    return elevation_deg(user_lat, user_lon, sat_lat, sat_lon, altitude_km,
                         earth_radius_km) >= min_elevation_deg


def fspl_db(d_km, f_ghz):
    d_km = np.asarray(d_km, dtype=float)
    if np.any(d_km <= 0) or np.any(np.asarray(f_ghz) <= 0):
        raise ValueError("distance and frequency must be > 0")
    return 20.0 * np.log10(d_km) + 20.0 * np.log10(f_ghz) + 92.45


def noise_power_dbm(bandwidth_hz: float, temperature_k: float = 290.0, noise_figure_db: float = 0.0) -> float:
    return 10.0 * math.log10(BOLTZMANN * temperature_k * bandwidth_hz * 1e3) + noise_figure_db


def received_power_dbm(params: ChannelParams, path_loss_db):
    """``P_t + G_t + G_r - PL_tot`` where ``PL_tot`` already includes excess loss."""
    return params.tx_power_dbm + params.sat_gain_dbi + params.user_gain_dbi - np.asarray(path_loss_db)


def total_path_loss_db(params: ChannelParams, d_km):
    return fspl_db(d_km, params.frequency_ghz) + params.excess_loss_db


def interference_power_dbm(params: ChannelParams, fspl_int_db):
    return (params.tx_power_dbm + params.effective_interferer_gain_dbi + params.user_gain_dbi
            - np.asarray(fspl_int_db))


def _range(params, user_lat, user_lon, sats: SatelliteArrays, idx, earth_radius_km):
    d = slant_range_km(user_lat, user_lon, sats.lat_deg[idx], sats.lon_deg[idx],
                       sats.altitude_km[idx], params.slant_mode, earth_radius_km)
    # surface range is 0 at nadir; keep FSPL finite
    return np.maximum(d, 1e-3)


def total_interference_mw(user_lat: float, user_lon: float, serving_beam, active_beams: Sequence,
                          sats: SatelliteArrays, params: ChannelParams,
                          earth_radius_km: float = R_EARTH) -> tuple[float, float]:
    """Intra- and inter-satellite interference in mW for one user.

    Beams are objects with ``beam_id`` and ``sat`` (row in ``sats``). Only
    beams of the serving satellite's layer contribute; beams on other
    satellites count only if that satellite is above the elevation mask.
    """
    serving_sat = serving_beam.sat
    layer = sats.layer[serving_sat]
    intra = inter = 0.0
    for beam in active_beams:
        if beam.beam_id == serving_beam.beam_id or sats.layer[beam.sat] != layer:
            continue
        if beam.sat != serving_sat and not visible(
            user_lat, user_lon, sats.lat_deg[beam.sat], sats.lon_deg[beam.sat],
            sats.altitude_km[beam.sat], params.min_elevation_deg, earth_radius_km,
        ):
            continue
        d = _range(params, user_lat, user_lon, sats, beam.sat, earth_radius_km)
        p_mw = float(dbm_to_mw(interference_power_dbm(params, fspl_db(d, params.frequency_ghz))))
        if beam.sat == serving_sat:
            intra += p_mw
        else:
            inter += p_mw
    return intra, inter


def link_record(user_id: int, user_lat: float, user_lon: float, serving_beam, active_beams,
                sats: SatelliteArrays, params: ChannelParams,
                earth_radius_km: float = R_EARTH) -> LinkRecord:
    s = serving_beam.sat
    d = float(_range(params, user_lat, user_lon, sats, s, earth_radius_km))
    fspl = float(fspl_db(d, params.frequency_ghz))
    pl = fspl + params.excess_loss_db
    pr = float(received_power_dbm(params, pl))
    intra, inter = total_interference_mw(user_lat, user_lon, serving_beam, active_beams, sats,
                                         params, earth_radius_km)
    ratio = float(dbm_to_mw(pr)) / (intra + inter + float(dbm_to_mw(params.noise_dbm)))
    return LinkRecord(user_id, serving_beam.beam_id, d, fspl, pl, pr, intra, inter, ratio)


def sinr(user_lat: float, user_lon: float, serving_beam, active_beams, sats: SatelliteArrays,
         params: ChannelParams, earth_radius_km: float = R_EARTH) -> float:
    return link_record(-1, user_lat, user_lon, serving_beam, active_beams, sats, params,
                       earth_radius_km).sinr


def sinr_from_powers(rx_mw, interference_mw, noise_mw):
    return np.asarray(rx_mw) / (np.asarray(interference_mw) + noise_mw)


class LayerLinks:
    """Dense user x satellite link table for one layer at one instant.

    Every pairwise quantity the association loop needs is computed once per
    step; SINR for a given beam layout then reduces to a weighted sum over
    per-satellite beam counts.
    """

    def __init__(self, user_lat, user_lon, sats: SatelliteArrays, sat_idx: np.ndarray,
                 params: ChannelParams, earth_radius_km: float = R_EARTH):
        self.sat_idx = np.asarray(sat_idx, dtype=int)
        self.params = params
        ulat = np.asarray(user_lat, dtype=float)[:, None]
        ulon = np.asarray(user_lon, dtype=float)[:, None]
        slat = sats.lat_deg[self.sat_idx][None, :]
        slon = sats.lon_deg[self.sat_idx][None, :]
        alt = sats.altitude_km[self.sat_idx][None, :]
        d = slant_range_km(ulat, ulon, slat, slon, alt, params.slant_mode, earth_radius_km)
        self.range_km = np.maximum(d, 1e-3)
        self.fspl_db = fspl_db(self.range_km, params.frequency_ghz)
        self.visible = elevation_deg(ulat, ulon, slat, slon, alt, earth_radius_km) >= params.min_elevation_deg
        self.rx_dbm = received_power_dbm(params, self.fspl_db + params.excess_loss_db)
        self.rx_mw = dbm_to_mw(self.rx_dbm)
        self.int_mw = dbm_to_mw(interference_power_dbm(params, self.fspl_db))
        self.noise_mw = float(dbm_to_mw(params.noise_dbm))

    def interference(self, users: np.ndarray, serving: np.ndarray, counts: np.ndarray):
        """(intra, inter) mW for ``users`` served by local satellite ``serving``.

        ``counts[j]`` is the number of active beams on local satellite ``j``,
        including the serving beam.
        """
        users = np.asarray(users, dtype=int)
        serving = np.broadcast_to(np.asarray(serving, dtype=int), users.shape)
        counts = np.asarray(counts, dtype=float)
        pint = self.int_mw[users]
        intra = (counts[serving] - 1.0) * pint[np.arange(len(users)), serving]
        weights = counts[None, :] * self.visible[users]
        weights[np.arange(len(users)), serving] = 0.0
        inter = np.sum(weights * pint, axis=1)
        return intra, inter

    def sinr(self, users, serving, counts):
        users = np.asarray(users, dtype=int)
        serving = np.broadcast_to(np.asarray(serving, dtype=int), users.shape)
        intra, inter = self.interference(users, serving, counts)
        return sinr_from_powers(self.rx_mw[users, serving], intra + inter, self.noise_mw)
