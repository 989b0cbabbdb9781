"""Near-field wideband channel model for a uniform linear array."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import SystemConfig, UserLocation


def subcarrier_frequencies(cfg: SystemConfig) -> np.ndarray:
    """Centre frequency of every OFDM subcarrier, ``f_c + B(2m-1-M)/(2M)``."""
    M = cfg.n_subcarriers
    m = np.arange(1, M + 1)
    return cfg.center_freq + cfg.bandwidth * (2 * m - 1 - M) / (2 * M)


def element_offsets(n: int) -> np.ndarray:
    """Element index offsets from the array centre, in units of spacing."""
    return np.arange(n) - (n - 1) / 2.0


def _distances(r, theta, offsets, spacing):
    r = np.asarray(r, dtype=float)[..., None]
    theta = np.asarray(theta, dtype=float)[..., None]
    x = offsets * spacing
    return np.sqrt(r ** 2 + x ** 2 - 2.0 * r * x * np.cos(theta))


def propagation_distances(loc: UserLocation, cfg: SystemConfig) -> np.ndarray:
    """Exact spherical-wave distance from each antenna to ``loc``."""
    return _distances(loc.r, loc.theta, element_offsets(cfg.n_antennas), cfg.antenna_spacing)


def array_response(f: float, loc: UserLocation, cfg: SystemConfig) -> np.ndarray:
    """Near-field array response ``exp(-j 2 pi f r_n / c)``."""
    dist = propagation_distances(loc, cfg)
    return np.exp(-2j * np.pi * f * dist / cfg.speed_of_light)


def pathloss(f, r, cfg: SystemConfig):
    """Free-space spreading times molecular absorption, linear power factor."""
    f = np.asarray(f, dtype=float)
    r = np.asarray(r, dtype=float)
    out = (4.0 * np.pi * f * r / cfg.speed_of_light) ** 2 * np.exp(cfg.absorption_coeff * r)
    return out if out.ndim else float(out)


@dataclass
class NearFieldChannel:
    """Per-subcarrier channel vectors.

    ``h`` has shape ``(M, K, N)``; ``h[m, k]`` is the column ``h_{m,k}`` so the
    received signal is ``h[m, k].conj() @ x``.
    """

    h: np.ndarray
    freqs: np.ndarray
    users: list
    los_gain: np.ndarray          # (M, K) complex beta
    nlos_gain: np.ndarray         # (M, K, L) complex beta tilde
    scatterers: list              # per user list of UserLocation
    path_lengths: np.ndarray      # (K, L) BS -> scatterer -> user distance
    h_los: np.ndarray             # (M, K, N) LoS term alone

    @property
    def n_users(self) -> int:
        return self.h.shape[1]

    def los_only(self) -> "NearFieldChannel":
        """Copy with the NLoS components removed."""
        M, K, _ = self.h.shape
        return NearFieldChannel(
            h=self.h_los.copy(), freqs=self.freqs, users=self.users,
            los_gain=self.los_gain, nlos_gain=np.zeros((M, K, 0), complex),
            scatterers=[[] for _ in range(K)], path_lengths=np.zeros((K, 0)),
            h_los=self.h_los)


def generate_channel(locs: Sequence[UserLocation], scatterers: Sequence[Sequence[UserLocation]],
                     cfg: SystemConfig, rng_seed=None) -> NearFieldChannel:
    """Draw the LoS + NLoS channel of every user on every subcarrier.

    The LoS gain is real and positive (its carrier phase lives in the array
    response). Each NLoS path gets one uniform random phase, plus the
    frequency-dependent phase of the scatterer-to-user leg so the path stays
    a physical delay across the band.
    """
    locs = list(locs)
    scatterers = [list(s) for s in scatterers]
    if len(scatterers) != len(locs):
        raise ValueError(f"got scatterer lists for {len(scatterers)} users, expected {len(locs)}")
    for k, s in enumerate(scatterers):
        if len(s) != cfg.n_paths:
            raise ValueError(f"user {k}: {len(s)} scatterers given, n_paths={cfg.n_paths}")

    rng = np.random.default_rng(rng_seed)
    freqs = subcarrier_frequencies(cfg)
    M, K, L, N = len(freqs), len(locs), cfg.n_paths, cfg.n_antennas
    c = cfg.speed_of_light
    gain = cfg.tx_gain * cfg.rx_gain
    offsets = element_offsets(N)

    h = np.zeros((M, K, N), dtype=complex)
    h_los = np.zeros_like(h)
    beta = np.zeros((M, K), dtype=complex)
    beta_nlos = np.zeros((M, K, L), dtype=complex)
    lengths = np.zeros((K, L))
    phases = rng.uniform(0.0, 2 * np.pi, size=(K, L))

    for k, user in enumerate(locs):
        dist = _distances(user.r, user.theta, offsets, cfg.antenna_spacing)
        beta[:, k] = np.sqrt(gain / pathloss(freqs, user.r, cfg))
        # h = beta * conj(alpha)
        h[:, k] = beta[:, k, None] * np.exp(2j * np.pi * freqs[:, None] * dist[None, :] / c)
        h_los[:, k] = h[:, k]
        ux, uy = user.r * np.cos(user.theta), user.r * np.sin(user.theta)
        for l, sc in enumerate(scatterers[k]):
            sx, sy = sc.r * np.cos(sc.theta), sc.r * np.sin(sc.theta)
            hop = float(np.hypot(ux - sx, uy - sy))
            lengths[k, l] = sc.r + hop
            mag = np.sqrt(cfg.scatter_loss * gain / pathloss(freqs, lengths[k, l], cfg))
            beta_nlos[:, k, l] = mag * np.exp(1j * phases[k, l] - 2j * np.pi * freqs * hop / c)
            sdist = _distances(sc.r, sc.theta, offsets, cfg.antenna_spacing)
            h[:, k] += beta_nlos[:, k, l, None] * np.exp(
                2j * np.pi * freqs[:, None] * sdist[None, :] / c)

    return NearFieldChannel(h=h, freqs=freqs, users=locs, los_gain=beta, nlos_gain=beta_nlos,
                            scatterers=scatterers, path_lengths=lengths, h_los=h_los)


def los_channel(locs: Sequence[UserLocation], cfg: SystemConfig) -> NearFieldChannel:
    """Deterministic LoS-only channel (no scatterers, no randomness)."""
    return generate_channel(locs, [[] for _ in locs], cfg.with_(n_paths=0))


def sample_locations(rng: np.random.Generator, n: int, r_range=(5.0, 15.0),
                     theta_range=(0.0, np.pi)) -> list[UserLocation]:
    """Points uniform by area in the half-annulus ``r_range`` x ``theta_range``."""
    r2 = rng.uniform(r_range[0] ** 2, r_range[1] ** 2, size=n)
    th = rng.uniform(*theta_range, size=n)
    # keep strictly inside (0, pi)
    th = np.clip(th, 1e-9, np.pi - 1e-9)
    return [UserLocation(float(np.sqrt(a)), float(b)) for a, b in zip(r2, th)]


def random_channel(cfg: SystemConfig, seed, r_range=(5.0, 15.0),
                   theta_range=(0.0, np.pi), n_users: int | None = None) -> NearFieldChannel:
    """Random users and scatterers in the same annulus, reproducible from ``seed``."""
    K = cfg.n_users if n_users is None else n_users
    ss = np.random.SeedSequence(seed)
    geo_seed, gain_seed = ss.spawn(2)
    rng = np.random.default_rng(geo_seed)
    users = sample_locations(rng, K, r_range, theta_range)
    scat = [sample_locations(rng, cfg.n_paths, r_range, theta_range) for _ in range(K)]
    return generate_channel(users, scat, cfg, np.random.default_rng(gain_seed))
