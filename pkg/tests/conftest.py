import numpy as np
import pytest

from ntnopt.channel import geodetic_to_ecef
from ntnopt.orbital import R_EARTH, SatelliteArrays


def make_sats(layer, lat, lon, alt):
    """SatelliteArrays from explicit sub-satellite points."""
    lat = np.atleast_1d(np.asarray(lat, dtype=float))
    lon = np.atleast_1d(np.asarray(lon, dtype=float))
    alt = np.broadcast_to(np.asarray(alt, dtype=float), lat.shape).copy()
    layer = np.broadcast_to(np.asarray(layer), lat.shape).copy()
    n = len(lat)
    return SatelliteArrays(layer, np.arange(n), np.zeros(n, dtype=int), lat, lon, alt,
                           geodetic_to_ecef(lat, lon, R_EARTH + alt))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
