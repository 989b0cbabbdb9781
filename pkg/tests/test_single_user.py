import math

import numpy as np
import pytest

from ttdbf.channel import los_channel
from ttdbf.config import UserLocation, desk_config, paper_config
from ttdbf.single_user import (Monotonicity, array_gain, classify_monotonicity,
                               conventional_design, design, finite_range_design,
                               infinite_range_design, location_functional, rate_from_gain,
                               single_user_rate, subarray_geometry)
from ttdbf.topology import HYBRID, PARALLEL, SERIAL_B, SERIAL_F, cumulative_delays

CFG = paper_config()


def _profile(r, deg, cfg=CFG):
    loc = UserLocation.from_degrees(r, deg)
    return loc, infinite_range_design(subarray_geometry(loc, cfg), loc, cfg)


def test_geometry_symmetric_at_broadside():
    g = subarray_geometry(UserLocation.from_degrees(10, 90), CFG)
    assert np.allclose(g.r_sub, g.r_sub[::-1], rtol=0, atol=1e-12)


def test_geometry_degenerate_subarrays():
    cfg = desk_config(n_ttd_per_chain=128)
    loc = UserLocation.from_degrees(6, 33)
    g = subarray_geometry(loc, cfg)
    assert np.allclose(g.r_sub, g.r_elem[:, 0])


def test_adjacent_centre_distances_bounded():
    g = subarray_geometry(UserLocation.from_degrees(10, 60), CFG)
    assert np.all(np.abs(np.diff(g.r_sub)) <= CFG.n_sub * CFG.antenna_spacing)
    # element distances agree with the centre distances at the middle of each subarray
    mid = g.r_elem[:, CFG.n_sub // 2 - 1:CFG.n_sub // 2 + 1].mean(axis=1)
    assert np.allclose(mid, g.r_sub, atol=1e-6)


def test_infinite_profile_normalised():
    for deg in (20, 60, 90, 135):
        _, p = _profile(10, deg)
        assert p.t_inf.min() == 0.0 and np.all(p.t_inf >= 0)
        assert p.mu == pytest.approx(p.geometry.r_max / CFG.speed_of_light)


def test_endfire_delay_span():
    # approaching the array axis the span tends to (N - N_sub) d / c = 2480 ps
    _, p = _profile(10, 1e-4)
    assert p.t_inf.max() == pytest.approx(2480e-12, rel=1e-4)


def test_infinite_design_gain_at_broadside():
    loc = UserLocation.from_degrees(10, 90)
    g = array_gain(loc, design(loc, CFG, PARALLEL, math.inf), CFG)
    assert g.min() >= 0.95 * CFG.n_antennas


def test_approx_phase_close_to_exact():
    loc, p = _profile(10, 60)
    ph = p.approx_phase(np.array([CFG.center_freq]))[0]
    exact = CFG.center_freq * p.geometry.r_elem / CFG.speed_of_light
    assert np.allclose(ph, exact)


def test_broadside_is_unimodal_at_centre():
    reg = classify_monotonicity(UserLocation.from_degrees(10, 90), CFG)
    assert reg.kind is Monotonicity.UNIMODAL
    assert reg.q_c == CFG.n_ttd_per_chain // 2 + 1
    assert reg.J == pytest.approx(0.0, abs=1e-12)


def test_boundary_is_inclusive(monkeypatch):
    import ttdbf.single_user as su
    unit = CFG.n_sub * CFG.antenna_spacing
    thr = (CFG.n_ttd_per_chain - 2) * unit
    loc = UserLocation.from_degrees(10, 60)
    monkeypatch.setattr(su, "location_functional", lambda _: thr)
    assert classify_monotonicity(loc, CFG).kind is Monotonicity.INCREASING
    monkeypatch.setattr(su, "location_functional", lambda _: -thr)
    assert classify_monotonicity(loc, CFG).kind is Monotonicity.DECREASING
    monkeypatch.setattr(su, "location_functional", lambda _: np.nextafter(thr, 0))
    assert classify_monotonicity(loc, CFG).kind is Monotonicity.UNIMODAL


def test_regions_by_side():
    assert classify_monotonicity(UserLocation.from_degrees(10, 30), CFG).kind \
        is Monotonicity.INCREASING
    assert classify_monotonicity(UserLocation.from_degrees(10, 150), CFG).kind \
        is Monotonicity.DECREASING


def test_endfire_handling():
    with pytest.raises(ValueError):
        classify_monotonicity(UserLocation(10.0, 0.0), CFG)
    with pytest.raises(ValueError):
        classify_monotonicity(UserLocation(10.0, math.pi), CFG)
    a = classify_monotonicity(UserLocation(10.0, 0.0), CFG, endfire="limit")
    b = classify_monotonicity(UserLocation(10.0, math.pi), CFG, endfire="limit")
    assert a.kind is Monotonicity.INCREASING and b.kind is Monotonicity.DECREASING


def test_sign_pattern_small_sample():
    rng = np.random.default_rng(3)
    unit = CFG.n_sub * CFG.antenna_spacing
    thr = (CFG.n_ttd_per_chain - 2) * unit
    hits = total = 0
    while total < 300:
        loc = UserLocation(rng.uniform(5, 15), math.radians(rng.uniform(5, 175)))
        J = location_functional(loc)
        if abs(abs(J) - thr) < 0.1 * thr:
            continue
        total += 1
        reg = classify_monotonicity(loc, CFG)
        d = np.diff(infinite_range_design(subarray_geometry(loc, CFG), loc, CFG).t_inf)
        if reg.kind is Monotonicity.INCREASING:
            hits += np.all(d >= 0)
        elif reg.kind is Monotonicity.DECREASING:
            hits += np.all(d <= 0)
        else:
            peak = int(np.argmax(np.concatenate([[0.0], np.cumsum(d)]))) + 1
            hits += abs(peak - reg.q_c) <= 1
    assert hits / total >= 0.95


def test_serial_reproduces_monotone_profile_without_cap():
    _, p = _profile(10, 40)
    assert np.all(np.diff(p.t_inf) >= 0)
    raw = finite_range_design(p, SERIAL_F, math.inf)
    assert np.allclose(cumulative_delays(raw, SERIAL_F), p.t_inf, atol=1e-18)
    _, p = _profile(10, 140)
    raw = finite_range_design(p, SERIAL_B, math.inf)
    assert np.allclose(cumulative_delays(raw, SERIAL_B), p.t_inf, atol=1e-18)


def test_wrong_half_space_gets_no_delay():
    _, p = _profile(10, 140)
    assert np.all(finite_range_design(p, SERIAL_F, 80e-12) == 0)


def test_hybrid_reproduces_broadside_profile():
    _, p = _profile(10, 90)
    raw = finite_range_design(p, HYBRID, math.inf)
    assert np.allclose(cumulative_delays(raw, HYBRID), p.t_inf, atol=1e-18)


def test_finite_designs_respect_cap():
    for deg in (25, 70, 90, 120):
        _, p = _profile(8, deg)
        for topo in (PARALLEL, SERIAL_F, SERIAL_B, HYBRID):
            raw = finite_range_design(p, topo, 80e-12)
            assert np.all((raw >= 0) & (raw <= 80e-12))
        assert np.allclose(finite_range_design(p, PARALLEL, 80e-12),
                           np.minimum(p.t_inf, 80e-12))


def test_rate_matches_gain_shortcut():
    cfg = desk_config(n_rf=1, n_users=1)
    loc = UserLocation.from_degrees(9, 75)
    sud = design(loc, cfg, SERIAL_F)
    ch = los_channel([loc], cfg)
    rates, se = single_user_rate(ch.h, sud, cfg)
    g = array_gain(loc, sud, cfg)
    ref = rate_from_gain(g, np.abs(ch.los_gain[:, 0]) ** 2, cfg)
    assert np.allclose(rates, ref)
    assert se == pytest.approx(rates.sum() / (cfg.n_subcarriers + cfg.cp_length))


def test_conventional_is_exact_at_centre_frequency():
    cfg = desk_config(n_rf=1, n_users=1)
    loc = UserLocation.from_degrees(9, 75)
    g = array_gain(loc, conventional_design(loc, cfg), cfg, np.array([cfg.center_freq]))
    assert g[0] == pytest.approx(cfg.n_antennas)
