"""Scenario configuration: JSON in, validated dataclasses out.

Every omitted field takes its default. Unknown keys and out-of-range values
raise ConfigError carrying the dotted path of the offending field.
"""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .association import AssociationParams
from .channel import SLANT_MODES, ChannelParams
from .metrics import BANDWIDTH_POLICIES
from .mobility import MobilityParams
from .optimizer import STRATEGIES, SearchSpace
from .orbital import LayerConfig

SEARCH_DIMS = ("P_L", "S_L", "P_M", "S_M")
MAX_PLANES = 100
MAX_SATS_PER_PLANE = 100


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


@dataclass
class GlobalSection:
    n_users: int = 500
    steps: int = 24
    step_seconds: float = 3600.0
    realizations: int = 50
    seed: int = 0
    omega: float = 0.5
    r_ref_bps: float = 20e9
    workers: int = 1


@dataclass
class RadioSection:
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
    bandwidth_policy: str = "full"


@dataclass
class CapacitySection:
    beams_per_sat: int = 15
    users_per_beam: int = 20


@dataclass
class LayerSection:
    planes: int
    sats_per_plane: int
    altitude_km: float
    inclination_deg: float
    longitude_offset_deg: float = 0.0


def _leo():
    return LayerSection(9, 15, 600.0, 53.0)


def _meo():
    return LayerSection(7, 3, 20200.0, 56.0)


def _geo():
    return LayerSection(1, 3, 35786.0, 0.0, -100.0)


@dataclass
class LayersSection:
    L: LayerSection = field(default_factory=_leo)
    M: LayerSection = field(default_factory=_meo)
    G: LayerSection = field(default_factory=_geo)


@dataclass
class MobilitySection:
    v_max: float = 0.05
    sigma_a: float = 0.005
    sigma_eta: float = 0.01
    v_clamp: float = 0.1


@dataclass
class RegionSection:
    path: str | None = None  # None selects the bundled Canada outline


@dataclass
class AssociationSection:
    persist_covered: bool = False
    kmeans_max_iters: int = 50


def _default_bounds():
    return {"P_L": [2, 10], "S_L": [2, 15], "P_M": [2, 10], "S_M": [2, 15]}


@dataclass
class OptimizerSection:
    strategy: str = "gp-ei"
    budget: int = 40
    n_init: int = 10
    realizations_per_trial: int = 3
    final_evaluation: bool = True


@dataclass
class ScenarioConfig:
    global_: GlobalSection = field(default_factory=GlobalSection)
    radio: RadioSection = field(default_factory=RadioSection)
    capacity: CapacitySection = field(default_factory=CapacitySection)
    layers: LayersSection = field(default_factory=LayersSection)
    mobility: MobilitySection = field(default_factory=MobilitySection)
    region: RegionSection = field(default_factory=RegionSection)
    association: AssociationSection = field(default_factory=AssociationSection)
    search: dict[str, list[int]] = field(default_factory=_default_bounds)
    optimizer: OptimizerSection = field(default_factory=OptimizerSection)

    # --- derived runtime objects -------------------------------------------------

    def channel_params(self) -> ChannelParams:
        r = self.radio
        return ChannelParams(**{f.name: getattr(r, f.name) for f in dataclasses.fields(ChannelParams)})

    def association_params(self) -> AssociationParams:
        return AssociationParams(
            beams_per_sat=self.capacity.beams_per_sat,
            users_per_beam=self.capacity.users_per_beam,
            kmeans_max_iters=self.association.kmeans_max_iters,
            bandwidth_policy=self.radio.bandwidth_policy,
            persist_covered=self.association.persist_covered,
        )

    def mobility_params(self) -> MobilityParams:
        return MobilityParams(**dataclasses.asdict(self.mobility))

    def layer_configs(self, configuration: tuple[int, int, int, int] | None = None) -> tuple[LayerConfig, ...]:
        """LEO/MEO/GEO layers, with LEO and MEO sizes optionally overridden."""
        out = []
        for lid in ("L", "M", "G"):
            sec: LayerSection = getattr(self.layers, lid)
            planes, sats = sec.planes, sec.sats_per_plane
            if configuration is not None and lid in ("L", "M"):
                off = 0 if lid == "L" else 2
                planes, sats = configuration[off], configuration[off + 1]
            out.append(LayerConfig(lid, int(planes), int(sats), sec.altitude_km,
                                   sec.inclination_deg, sec.longitude_offset_deg))
        return tuple(out)

    def default_configuration(self) -> tuple[int, int, int, int]:
        return (self.layers.L.planes, self.layers.L.sats_per_plane,
                self.layers.M.planes, self.layers.M.sats_per_plane)

    def search_space(self) -> SearchSpace:
        return SearchSpace.from_bounds({k: self.search[k] for k in SEARCH_DIMS})

    def to_dict(self) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        d["global"] = d.pop("global_")
        return {k: d[k] for k in _TOP_KEYS}


_TOP_KEYS = ("global", "radio", "capacity", "layers", "mobility", "region", "association",
             "search", "optimizer")


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _coerce(value, default, path):
    """Type-check a scalar against the type of the field's default."""
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(path, f"expected boolean, got {value!r}")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not (isinstance(value, int) or (isinstance(value, float) and value.is_integer())):
            raise ConfigError(path, f"expected integer, got {value!r}")
        return int(value)
    if isinstance(default, float):
        if not _is_number(value):
            raise ConfigError(path, f"expected number, got {value!r}")
        return float(value)
    return value


def _build(cls, data, path):
    """Flat section: every field has a scalar default."""
    if not isinstance(data, dict):
        raise ConfigError(path, "expected an object")
    defaults = cls()
    known = {f.name for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in data.items():
        if key not in known:
            raise ConfigError(f"{path}.{key}", "unknown key")
        current = getattr(defaults, key)
        if current is None:
            if value is not None and not isinstance(value, str):
                raise ConfigError(f"{path}.{key}", "expected string or null")
            kwargs[key] = value
        elif isinstance(current, str):
            if not isinstance(value, str):
                raise ConfigError(f"{path}.{key}", f"expected string, got {value!r}")
            kwargs[key] = value
        else:
            kwargs[key] = _coerce(value, current, f"{path}.{key}")
    return cls(**kwargs)


def _build_layer(data, default: LayerSection, path) -> LayerSection:
    merged = dataclasses.asdict(default)
    if not isinstance(data, dict):
        raise ConfigError(path, "expected an object")
    for key, value in data.items():
        if key not in merged:
            raise ConfigError(f"{path}.{key}", "unknown key")
        merged[key] = _coerce(value, merged[key], f"{path}.{key}")
    return LayerSection(**merged)


def _build_search(data, path):
    if not isinstance(data, dict):
        raise ConfigError(path, "expected an object")
    out = _default_bounds()
    for key, value in data.items():
        if key not in out:
            raise ConfigError(f"{path}.{key}", "unknown key")
        if (not isinstance(value, list) or len(value) != 2
                or not all(isinstance(v, int) and not isinstance(v, bool) for v in value)):
            raise ConfigError(f"{path}.{key}", "expected [lower, upper] integers")
        out[key] = list(value)
    return out


def config_from_dict(data: dict) -> ScenarioConfig:
    if not isinstance(data, dict):
        raise ConfigError("", "config root must be a JSON object")
    unknown = sorted(set(data) - set(_TOP_KEYS))
    if unknown:
        raise ConfigError(unknown[0], "unknown key")
    cfg = ScenarioConfig()
    sections = {"global": ("global_", GlobalSection), "radio": ("radio", RadioSection),
                "capacity": ("capacity", CapacitySection), "mobility": ("mobility", MobilitySection),
                "region": ("region", RegionSection), "association": ("association", AssociationSection),
                "optimizer": ("optimizer", OptimizerSection)}
    for key, (attr, cls) in sections.items():
        if key in data:
            setattr(cfg, attr, _build(cls, data[key], key))
    if "layers" in data:
        layers = data["layers"]
        if not isinstance(layers, dict):
            raise ConfigError("layers", "expected an object")
        for lid in layers:
            if lid not in ("L", "M", "G"):
                raise ConfigError(f"layers.{lid}", "unknown key")
        cfg.layers = LayersSection(*(
            _build_layer(layers[lid], getattr(cfg.layers, lid), f"layers.{lid}") if lid in layers
            else getattr(cfg.layers, lid) for lid in ("L", "M", "G")))
    if "search" in data:
        cfg.search = _build_search(data["search"], "search")
    validate(cfg)
    return cfg


def _check(cond, path, message):
    if not cond:
        raise ConfigError(path, message)


def validate(cfg: ScenarioConfig) -> None:
    g = cfg.global_
    _check(g.n_users >= 1, "global.n_users", "must be >= 1")
    _check(g.steps >= 1, "global.steps", "must be >= 1")
    _check(g.step_seconds > 0, "global.step_seconds", "must be > 0")
    _check(g.realizations >= 1, "global.realizations", "must be >= 1")
    _check(0.0 <= g.omega <= 1.0, "global.omega", "must lie in [0, 1]")
    _check(g.r_ref_bps > 0, "global.r_ref_bps", "must be > 0")
    _check(g.workers >= 1, "global.workers", "must be >= 1")
    r = cfg.radio
    for name in ("frequency_ghz", "bandwidth_hz", "temperature_k"):
        _check(getattr(r, name) > 0, f"radio.{name}", "must be > 0")
    for name in ("sidelobe_atten_db", "rain_db", "cloud_db", "vapor_db"):
        _check(getattr(r, name) >= 0, f"radio.{name}", "must be >= 0")
    _check(0.0 <= r.min_elevation_deg <= 90.0, "radio.min_elevation_deg", "must lie in [0, 90]")
    _check(r.slant_mode in SLANT_MODES, "radio.slant_mode", f"must be one of {SLANT_MODES}")
    _check(r.bandwidth_policy in BANDWIDTH_POLICIES, "radio.bandwidth_policy",
           f"must be one of {BANDWIDTH_POLICIES}")
    _check(cfg.capacity.beams_per_sat >= 1, "capacity.beams_per_sat", "must be >= 1")
    _check(cfg.capacity.users_per_beam >= 1, "capacity.users_per_beam", "must be >= 1")
    for lid in ("L", "M", "G"):
        sec: LayerSection = getattr(cfg.layers, lid)
        p = f"layers.{lid}"
        _check(1 <= sec.planes <= MAX_PLANES, f"{p}.planes", f"must lie in [1, {MAX_PLANES}]")
        _check(1 <= sec.sats_per_plane <= MAX_SATS_PER_PLANE, f"{p}.sats_per_plane",
               f"must lie in [1, {MAX_SATS_PER_PLANE}]")
        _check(sec.altitude_km > 0, f"{p}.altitude_km", "must be > 0")
        _check(0 <= sec.inclination_deg <= 180, f"{p}.inclination_deg", "must lie in [0, 180]")
    m = cfg.mobility
    for name in ("v_max", "sigma_a", "sigma_eta", "v_clamp"):
        _check(getattr(m, name) >= 0, f"mobility.{name}", "must be >= 0")
    _check(cfg.association.kmeans_max_iters >= 1, "association.kmeans_max_iters", "must be >= 1")
    for dim in SEARCH_DIMS:
        lo, hi = cfg.search[dim]
        limit = MAX_PLANES if dim.startswith("P") else MAX_SATS_PER_PLANE
        _check(1 <= lo <= hi <= limit, f"search.{dim}", f"need 1 <= lower <= upper <= {limit}")
    o = cfg.optimizer
    _check(o.strategy in STRATEGIES, "optimizer.strategy", f"must be one of {STRATEGIES}")
    _check(o.budget >= 1, "optimizer.budget", "must be >= 1")
    _check(o.n_init >= 1, "optimizer.n_init", "must be >= 1")
    _check(o.realizations_per_trial >= 1, "optimizer.realizations_per_trial", "must be >= 1")


def load_config(path: str | Path) -> ScenarioConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"{path}: invalid JSON ({exc})") from exc
    return config_from_dict(data)
