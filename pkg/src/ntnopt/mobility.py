"""Land-constrained user placement and kinematic mobility.

Users live in (lat, lon) degree space. Velocities and accelerations are in
degrees per step and degrees per step squared.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np
import shapely
from shapely.geometry import MultiPolygon, Polygon, shape

MAX_PLACEMENT_ATTEMPTS = 10**6
MAX_REFLECT_ATTEMPTS = 8
_BATCH = 256


class DegenerateRegionError(RuntimeError):
    pass


@dataclass(frozen=True)
class MobilityParams:
    v_max: float = 0.05
    sigma_a: float = 0.005
    sigma_eta: float = 0.01
    v_clamp: float = 0.1


class RegionModel:
    """Permitted land area as one or more lon/lat polygons."""

    def __init__(self, geometry):
        if isinstance(geometry, Polygon):
            geometry = MultiPolygon([geometry])
        if not isinstance(geometry, MultiPolygon) or geometry.is_empty:
            raise ValueError("region must be a non-empty Polygon or MultiPolygon")
        for poly in geometry.geoms:
            if len(poly.exterior.coords) < 4:  # closed ring of >= 3 vertices
                raise ValueError("every polygon needs at least 3 vertices")
        if geometry.area <= 0:
            raise ValueError("region has zero area")
        self.geometry = geometry
        shapely.prepare(self.geometry)
        lon_min, lat_min, lon_max, lat_max = geometry.bounds
        self.bbox = (lat_min, lat_max, lon_min, lon_max)

    @classmethod
    def from_geojson(cls, path) -> "RegionModel":
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        return cls.from_geojson_dict(doc)

    @classmethod
    def from_geojson_dict(cls, doc: dict) -> "RegionModel":
        if doc.get("type") == "FeatureCollection":
            geoms = [shape(f["geometry"]) for f in doc["features"]]
        elif doc.get("type") == "Feature":
            geoms = [shape(doc["geometry"])]
        else:
            geoms = [shape(doc)]
        polys = []
        for g in geoms:
            if isinstance(g, Polygon):
                polys.append(g)
            elif isinstance(g, MultiPolygon):
                polys.extend(g.geoms)
            else:
                raise ValueError(f"unsupported geometry type {g.geom_type}")
        return cls(MultiPolygon(polys))

    @classmethod
    def canada(cls) -> "RegionModel":
        """Bundled coarse outline of the Canadian landmass."""
        ref = resources.files("ntnopt").joinpath("data/canada.geojson")
        return cls.from_geojson_dict(json.loads(ref.read_text(encoding="utf-8")))

    @classmethod
    def box(cls, lat_min, lat_max, lon_min, lon_max) -> "RegionModel":
        return cls(Polygon([(lon_min, lat_min), (lon_max, lat_min), (lon_max, lat_max),
                            (lon_min, lat_max)]))

    def contains(self, lat, lon) -> np.ndarray:
        """Vectorized point-in-polygon test (boundary counts as inside)."""
        lat = np.asarray(lat, dtype=float)
        lon = np.asarray(lon, dtype=float)
        return shapely.intersects_xy(self.geometry, lon, lat)


@dataclass
class UserState:
    user_id: int
    lat: float
    lon: float
    velocity: tuple[float, float]
    acceleration: tuple[float, float]


@dataclass
class UserPopulation:
    """All users at one step; row ``i`` is user ``ids[i]``."""

    ids: np.ndarray
    pos: np.ndarray  # (n, 2) lat, lon
    vel: np.ndarray  # (n, 2)
    acc: np.ndarray  # (n, 2), fixed after initialization

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def lat(self) -> np.ndarray:
        return self.pos[:, 0]

    @property
    def lon(self) -> np.ndarray:
        return self.pos[:, 1]

    def copy(self) -> "UserPopulation":
        return UserPopulation(self.ids.copy(), self.pos.copy(), self.vel.copy(), self.acc.copy())

    def states(self) -> list[UserState]:
        return [
            UserState(int(self.ids[i]), float(self.pos[i, 0]), float(self.pos[i, 1]),
                      tuple(self.vel[i]), tuple(self.acc[i]))
            for i in range(len(self))
        ]


def user_streams(seed: int, n: int) -> list[np.random.Generator]:
    """Independent generator per user, keyed on (seed, user_id)."""
    return [np.random.default_rng([seed, 0, uid]) for uid in range(n)]


def _sample_inside(region: RegionModel, rng: np.random.Generator) -> tuple[float, float]:
    lat_min, lat_max, lon_min, lon_max = region.bbox
    tried = 0
    while tried < MAX_PLACEMENT_ATTEMPTS:
        m = min(_BATCH, MAX_PLACEMENT_ATTEMPTS - tried)
        lat = rng.uniform(lat_min, lat_max, m)
        lon = rng.uniform(lon_min, lon_max, m)
        inside = np.flatnonzero(region.contains(lat, lon))
        if inside.size:
            return float(lat[inside[0]]), float(lon[inside[0]])
        tried += m
    raise DegenerateRegionError(
        f"no in-region point after {MAX_PLACEMENT_ATTEMPTS} attempts"
    )


def init_users(n: int, region: RegionModel, params: MobilityParams = MobilityParams(),
               rngs: Sequence[np.random.Generator] | int = 0) -> UserPopulation:
    """Place ``n`` users uniformly over the region by rejection sampling.

    ``rngs`` is either a per-user list of generators or an integer seed from
    which per-user streams are derived.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if isinstance(rngs, (int, np.integer)):
        rngs = user_streams(int(rngs), n)
    if len(rngs) != n:
        raise ValueError("need exactly one generator per user")
    pos = np.empty((n, 2))
    vel = np.empty((n, 2))
    acc = np.empty((n, 2))
    for i, rng in enumerate(rngs):
        pos[i] = _sample_inside(region, rng)
        vel[i] = rng.uniform(-params.v_max, params.v_max, 2)
        acc[i] = rng.normal(0.0, params.sigma_a, 2)
    return UserPopulation(np.arange(n), pos, vel, acc)


# Sign patterns tried in order when a step leaves the region; the velocity is
# halved after each full cycle.
_REFLECTIONS = ((-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0))


def step_users(users: UserPopulation, params: MobilityParams, region: RegionModel,
               rngs: Sequence[np.random.Generator]) -> UserPopulation:
    """Advance every user by one step.

    ``v <- clip(v + a + eta)``, ``x <- x + v``. A user that would leave the
    region has its velocity reflected and retried; after
    ``MAX_REFLECT_ATTEMPTS`` failures the position is held.
    """
    n = len(users)
    eta = np.empty((n, 2))
    for i, rng in enumerate(rngs):
        eta[i] = rng.normal(0.0, params.sigma_eta, 2) if params.sigma_eta > 0 else 0.0
    vel = np.clip(users.vel + users.acc + eta, -params.v_clamp, params.v_clamp)
    pos = users.pos + vel
    ok = region.contains(pos[:, 0], pos[:, 1])
    for i in np.flatnonzero(~ok):
        held = True
        for attempt in range(MAX_REFLECT_ATTEMPTS):
            sign = np.asarray(_REFLECTIONS[attempt % len(_REFLECTIONS)])
            cand_v = vel[i] * sign * 0.5 ** (attempt // len(_REFLECTIONS))
            cand_x = users.pos[i] + cand_v
            if region.contains(cand_x[0], cand_x[1]):
                vel[i], pos[i] = cand_v, cand_x
                held = False
                break
        if held:
            pos[i] = users.pos[i]
            vel[i] = -vel[i]
    return UserPopulation(users.ids.copy(), pos, vel, users.acc.copy())


def load_region(path: str | Path | None) -> RegionModel:
    return RegionModel.canada() if path is None else RegionModel.from_geojson(path)
