import math

import numpy as np
import pytest

from ttdbf.channel import (array_response, los_channel, pathloss, propagation_distances,
                           random_channel, subcarrier_frequencies)
from ttdbf.config import (SystemConfig, UserLocation, db_to_linear, dbm_to_watts, desk_config,
                          paper_config)


def test_paper_defaults():
    cfg = paper_config()
    assert (cfg.n_antennas, cfg.n_ttd_per_chain, cfg.n_sub, cfg.n_subcarriers) == (512, 32, 16, 10)
    assert cfg.antenna_spacing == pytest.approx(1.49896229e-3)
    assert cfg.transmit_power == pytest.approx(0.1)
    # -174 dBm/Hz over 1 GHz
    assert cfg.noise_power == pytest.approx(dbm_to_watts(-174) * 1e9)
    assert cfg.n_sub * cfg.antenna_spacing / cfg.speed_of_light == pytest.approx(80e-12)


def test_desk_keeps_subarray_size():
    cfg = desk_config()
    assert cfg.n_sub == 16
    assert cfg.n_antennas == 128 and cfg.n_rf == cfg.n_users == 2


@pytest.mark.parametrize("bad", [dict(n_ttd_per_chain=30), dict(n_ttd_per_chain=7, n_antennas=7 * 16),
                                 dict(eta_ttd=0.5), dict(bandwidth=-1.0), dict(n_antennas=0)])
def test_config_validation(bad):
    with pytest.raises(ValueError):
        SystemConfig(**bad)


def test_subcarrier_grid():
    cfg = paper_config()
    f = subcarrier_frequencies(cfg)
    assert f[0] == pytest.approx(95.5e9) and f[-1] == pytest.approx(104.5e9)
    assert np.allclose(np.diff(f), 1e9)
    assert f.mean() == pytest.approx(cfg.center_freq)


def test_distances_match_cartesian():
    cfg = paper_config()
    loc = UserLocation.from_degrees(7.3, 41.0)
    d = cfg.antenna_spacing
    x = (np.arange(cfg.n_antennas) - (cfg.n_antennas - 1) / 2) * d
    ux, uy = loc.r * math.cos(loc.theta), loc.r * math.sin(loc.theta)
    ref = np.hypot(ux - x, uy)
    assert np.allclose(propagation_distances(loc, cfg), ref, rtol=0, atol=1e-12)


def test_los_channel_is_scaled_conjugate_response():
    cfg = desk_config(n_paths=0)
    loc = UserLocation.from_degrees(10.0, 70.0)
    ch = los_channel([loc], cfg)
    for m, f in enumerate(ch.freqs):
        beta = math.sqrt(cfg.tx_gain * cfg.rx_gain) * cfg.speed_of_light / (4 * math.pi * f * loc.r)
        assert np.allclose(ch.h[m, 0], beta * array_response(f, loc, cfg).conj())
    assert np.all(np.abs(np.abs(ch.h[0, 0]) - np.abs(ch.h[0, 0, 0])) < 1e-15)


def test_pathloss_free_space():
    cfg = paper_config()
    # 100 GHz at 10 m is about 92.4 dB
    assert 10 * math.log10(pathloss(100e9, 10.0, cfg)) == pytest.approx(92.44, abs=0.01)
    assert pathloss(100e9, 10.0, cfg.with_(absorption_coeff=0.01)) > pathloss(100e9, 10.0, cfg)


def test_random_channel_reproducible_and_bounded():
    cfg = desk_config()
    a = random_channel(cfg, 7)
    b = random_channel(cfg, 7)
    c = random_channel(cfg, 8)
    assert np.array_equal(a.h, b.h)
    assert not np.array_equal(a.h, c.h)
    assert a.h.shape == (cfg.n_subcarriers, cfg.n_users, cfg.n_antennas)
    for u in a.users:
        assert 5 <= u.r <= 15 and 0 < u.theta < math.pi
    # NLoS paths are 15 dB down and longer, so LoS dominates the energy
    nlos = a.h - a.h_los
    assert np.linalg.norm(nlos) < np.linalg.norm(a.h_los)
    assert np.allclose(a.los_only().h, a.h_los)


def test_db_helpers():
    assert db_to_linear(3.0) == pytest.approx(1.9953, rel=1e-4)
    assert dbm_to_watts(20) == pytest.approx(0.1)
