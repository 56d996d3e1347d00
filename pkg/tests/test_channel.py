import math
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_sats
from ntnopt.channel import (
    ChannelParams,
    LayerLinks,
    dbm_to_mw,
    elevation_deg,
    fspl_db,
    haversine_km,
    interference_power_dbm,
    mw_to_dbm,
    noise_power_dbm,
    received_power_dbm,
    sinr,
    slant_range_km,
    total_interference_mw,
    visible,
)
from ntnopt.orbital import R_EARTH

lat_st = st.floats(-90, 90)
lon_st = st.floats(-180, 180)


def test_haversine_examples():
    assert haversine_km(10.0, 20.0, 10.0, 20.0) == 0.0
    assert haversine_km(0, 0, 0, 180) == pytest.approx(20015.1, abs=0.1)
    assert haversine_km(0, 0, 0, 1) == pytest.approx(111.19, abs=0.01)


@settings(max_examples=200, deadline=None)
@given(lat_st, lon_st, lat_st, lon_st, lat_st, lon_st)
def test_haversine_symmetry_and_triangle(a1, o1, a2, o2, a3, o3):
    ab = haversine_km(a1, o1, a2, o2)
    assert ab == pytest.approx(haversine_km(a2, o2, a1, o1), abs=1e-6)
    assert haversine_km(a1, o1, a3, o3) <= ab + haversine_km(a2, o2, a3, o3) + 1e-6


def test_slant_range_nadir():
    assert slant_range_km(40.0, -90.0, 40.0, -90.0, 600.0) == pytest.approx(600.0, abs=1e-9)
    assert slant_range_km(40.0, -90.0, 40.0, -90.0, 600.0, mode="surface") == 0.0


@pytest.mark.parametrize("psi_deg,h", [(1.0, 600.0), (10.0, 600.0), (30.0, 20200.0), (60.0, 35786.0)])
def test_slant_range_law_of_cosines(psi_deg, h):
    psi = math.radians(psi_deg)
    expected = math.sqrt(R_EARTH**2 + (R_EARTH + h) ** 2 - 2 * R_EARTH * (R_EARTH + h) * math.cos(psi))
    # along a meridian the central angle equals the latitude difference
    assert slant_range_km(0.0, 0.0, psi_deg, 0.0, h) == pytest.approx(expected, rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(lat_st, lon_st, lat_st, lon_st, st.floats(200, 40000))
def test_geometric_range_at_least_altitude(a1, o1, a2, o2, h):
    assert slant_range_km(a1, o1, a2, o2, h) >= h - 1e-9


def test_fspl_golden_and_doubling():
    assert fspl_db(600, 2.2) == pytest.approx(154.86, abs=0.01)
    assert fspl_db(1200, 2.2) - fspl_db(600, 2.2) == pytest.approx(6.0206, abs=1e-3)
    assert fspl_db(600, 4.4) - fspl_db(600, 2.2) == pytest.approx(6.0206, abs=1e-3)
    with pytest.raises(ValueError):
        fspl_db(0.0, 2.2)


@settings(max_examples=100, deadline=None)
@given(st.floats(1, 1e5), st.floats(1.001, 10), st.floats(0.1, 100))
def test_fspl_strictly_increasing(d, k, f):
    assert fspl_db(d * k, f) > fspl_db(d, f)
    assert fspl_db(d, f * k) > fspl_db(d, f)


def test_noise_floor():
    assert noise_power_dbm(20e6, 290, 2) == pytest.approx(-98.97, abs=0.01)
    assert noise_power_dbm(20e6, 290, 3) - noise_power_dbm(20e6, 290, 0) == pytest.approx(3.0, abs=1e-12)
    assert noise_power_dbm(200e6, 290, 2) - noise_power_dbm(20e6, 290, 2) == pytest.approx(10.0, abs=1e-12)


def test_received_power_ledger():
    p = ChannelParams(rain_db=0, cloud_db=0, vapor_db=0)
    pl = float(fspl_db(600, 2.2)) + p.excess_loss_db
    assert received_power_dbm(p, pl) == pytest.approx(-84.86, abs=0.01)
    assert received_power_dbm(p, pl + 1) == pytest.approx(received_power_dbm(p, pl) - 1, abs=1e-12)


def test_interference_power_sidelobe():
    loss = float(fspl_db(800, 2.2))
    p0 = ChannelParams(sidelobe_atten_db=0, rain_db=0, cloud_db=0, vapor_db=0)
    assert interference_power_dbm(p0, loss) == pytest.approx(received_power_dbm(p0, loss), abs=1e-12)
    p20 = ChannelParams(sidelobe_atten_db=20)
    assert interference_power_dbm(p0, loss) - interference_power_dbm(p20, loss) == pytest.approx(20.0, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.floats(-200, 100))
def test_db_mw_roundtrip(x):
    assert float(mw_to_dbm(dbm_to_mw(x))) == pytest.approx(x, abs=1e-9)


def test_sinr_golden_without_interference():
    p = ChannelParams(rain_db=0, cloud_db=0, vapor_db=0)
    sats = make_sats("L", [50.0], [-100.0], 600.0)
    serving = SimpleNamespace(beam_id=0, sat=0)
    value = sinr(50.0, -100.0, serving, [serving], sats, p)
    assert 10 * math.log10(value) == pytest.approx(14.11, abs=0.05)


def test_visibility():
    assert elevation_deg(10.0, 10.0, 10.0, 10.0, 600.0) == pytest.approx(90.0)
    assert visible(10.0, 10.0, 10.0, 10.0, 600.0, 90.0)
    horizon = math.degrees(math.acos(R_EARTH / (R_EARTH + 600.0)))
    assert not visible(0.0, 0.0, horizon + 0.5, 0.0, 600.0, 0.0)
    assert visible(0.0, 0.0, horizon - 0.5, 0.0, 600.0, 0.0)
    assert not visible(0.0, 0.0, 0.5, 0.0, 600.0, 90.0)


def _beams(sat_of_beam):
    return [SimpleNamespace(beam_id=i, sat=s) for i, s in enumerate(sat_of_beam)]


def test_interference_partition():
    p = ChannelParams()
    sats = make_sats("L", [50.0, 52.0], [-100.0, -98.0], 600.0)
    one = _beams([0])
    assert total_interference_mw(50.0, -100.0, one[0], one, sats, p) == (0.0, 0.0)
    two = _beams([0, 0])
    intra, inter = total_interference_mw(50.0, -100.0, two[0], two, sats, p)
    assert intra > 0 and inter == 0


def test_cross_layer_beams_ignored():
    p = ChannelParams()
    sats = make_sats(np.array(["L", "M"]), [50.0, 50.5], [-100.0, -100.0], [600.0, 20200.0])
    beams = _beams([0, 1])
    assert total_interference_mw(50.0, -100.0, beams[0], beams, sats, p) == (0.0, 0.0)


def brute_force_interference(user, serving, beams, sat_pos, p):
    """Independent per-beam mW sum: ECEF chord, own FSPL, own elevation test."""
    ulat, ulon = map(math.radians, user)
    u = np.array([R_EARTH * math.cos(ulat) * math.cos(ulon), R_EARTH * math.cos(ulat) * math.sin(ulon),
                  R_EARTH * math.sin(ulat)])
    intra = inter = 0.0
    for bid, sat in beams:
        if bid == serving[0]:
            continue
        lat, lon, h = sat_pos[sat]
        la, lo = math.radians(lat), math.radians(lon)
        r = R_EARTH + h
        s = np.array([r * math.cos(la) * math.cos(lo), r * math.cos(la) * math.sin(lo), r * math.sin(la)])
        d = float(np.linalg.norm(s - u))
        # elevation from the local vertical
        el = math.degrees(math.asin(float(np.dot(s - u, u)) / (d * R_EARTH)))
        power = p.tx_power_dbm + p.sat_gain_dbi - p.sidelobe_atten_db + p.user_gain_dbi - (
            20 * math.log10(d) + 20 * math.log10(p.frequency_ghz) + 92.45)
        mw = 10 ** (power / 10)
        if sat == serving[1]:
            intra += mw
        elif el >= p.min_elevation_deg:
            inter += mw
    return intra, inter


def _random_layout(rng, n_sats, n_beams):
    user = (rng.uniform(42, 70), rng.uniform(-140, -55))
    lat = user[0] + rng.uniform(-15, 15, n_sats)
    lon = user[1] + rng.uniform(-20, 20, n_sats)
    lat = np.clip(lat, -89, 89)
    sat_of_beam = rng.integers(0, n_sats, n_beams)
    return user, lat, lon, sat_of_beam


def test_interference_matches_brute_force(rng):
    p = ChannelParams()
    for _ in range(60):
        n_sats = int(rng.integers(1, 6))
        user, lat, lon, sob = _random_layout(rng, n_sats, int(rng.integers(1, 11)))
        sats = make_sats("L", lat, lon, 600.0)
        beams = _beams(sob)
        sat_pos = {i: (lat[i], lon[i], 600.0) for i in range(n_sats)}
        for serving in beams:
            got = total_interference_mw(user[0], user[1], serving, beams, sats, p)
            want = brute_force_interference(user, (serving.beam_id, serving.sat),
                                             [(b.beam_id, b.sat) for b in beams], sat_pos, p)
            np.testing.assert_allclose(got, want, rtol=1e-9, atol=1e-300)
            # the dense table gives the same sums
            table = LayerLinks([user[0]], [user[1]], sats, np.arange(n_sats), p)
            counts = np.bincount(sob, minlength=n_sats)
            intra, inter = table.interference(np.array([0]), serving.sat, counts)
            np.testing.assert_allclose([intra[0], inter[0]], want, rtol=1e-9, atol=1e-300)


def test_adding_beam_never_raises_sinr(rng):
    p = ChannelParams()
    for _ in range(60):
        n_sats = int(rng.integers(1, 6))
        user, lat, lon, sob = _random_layout(rng, n_sats, int(rng.integers(1, 10)))
        sats = make_sats("L", lat, lon, 600.0)
        beams = _beams(sob)
        base = sinr(user[0], user[1], beams[0], beams, sats, p)
        extra = beams + [SimpleNamespace(beam_id=len(beams), sat=int(rng.integers(0, n_sats)))]
        assert sinr(user[0], user[1], beams[0], extra, sats, p) <= base


def test_sinr_vanishes_with_interference():
    p = ChannelParams()
    sats = make_sats("L", [50.0], [-100.0], 600.0)
    values = []
    for n in (1, 10, 100, 10000):
        beams = _beams([0] * n)
        values.append(sinr(50.0, -100.0, beams[0], beams, sats, p))
    assert all(b < a for a, b in zip(values, values[1:]))
    assert values[-1] < 0.02
