"""Closed-form single-user (K = N_RF = 1) beamforming designs.

The array is cut into Q subarrays, one per TTD. Inside a subarray the phase
shifters undo the curvature of the wavefront at the centre frequency; the
TTDs then align the subarray centres in time, which is frequency-flat.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
import math

import numpy as np

from .channel import element_offsets, _distances, subcarrier_frequencies
from .config import SystemConfig, UserLocation
from .topology import (TtdTopology, TopologyKind, cumulative_delays, PARALLEL)


@dataclass(frozen=True)
class SubarrayGeometry:
    chi: np.ndarray          # subarray centre offsets, in element spacings
    r_sub: np.ndarray        # (Q,) user distance to each subarray centre
    r_elem: np.ndarray       # (Q, N_sub) user distance to each element

    @property
    def r_max(self) -> float:
        return float(self.r_sub.max())

    @property
    def r_min(self) -> float:
        return float(self.r_sub.min())


def subarray_geometry(loc: UserLocation, cfg: SystemConfig) -> SubarrayGeometry:
    Q, Ns = cfg.n_ttd_per_chain, cfg.n_sub
    chi = element_offsets(Q) * Ns
    r_sub = _distances(loc.r, loc.theta, chi, cfg.antenna_spacing)
    r_elem = _distances(loc.r, loc.theta, element_offsets(cfg.n_antennas),
                        cfg.antenna_spacing).reshape(Q, Ns)
    return SubarrayGeometry(chi=chi, r_sub=r_sub, r_elem=r_elem)


@dataclass(frozen=True)
class InfiniteDelayProfile:
    t_inf: np.ndarray        # (Q,) seconds, min is 0
    mu: float                # alignment offset r_max/c
    psi: np.ndarray          # (Q, N_sub) PS phases in cycles
    geometry: SubarrayGeometry
    center_freq: float
    speed_of_light: float

    @property
    def dt(self) -> np.ndarray:
        """Adjacent differences ``t_q - t_{q-1}`` for q = 2..Q."""
        return np.diff(self.t_inf)

    @property
    def ps(self) -> np.ndarray:
        """Unit-modulus PS coefficients, flattened to length N."""
        return np.exp(2j * np.pi * self.psi).ravel()

    def approx_phase(self, freqs) -> np.ndarray:
        """Piecewise-near-field phase ``f_c(r_qi - r_q)/c + f_m r_q/c`` in cycles, (M, Q, N_sub)."""
        g, c = self.geometry, self.speed_of_light
        freqs = np.atleast_1d(freqs)
        intra = self.center_freq * (g.r_elem - g.r_sub[:, None]) / c
        return intra[None] + freqs[:, None, None] * g.r_sub[None, :, None] / c


def infinite_range_design(geo: SubarrayGeometry, loc: UserLocation,
                          cfg: SystemConfig) -> InfiniteDelayProfile:
    """PS phases and unbounded TTD delays that align every subarray on every subcarrier.

    Phases match the intra-subarray path difference at the centre frequency;
    delays pad every subarray up to the longest centre path.
    """
    c = cfg.speed_of_light
    psi = cfg.center_freq * (geo.r_elem - geo.r_sub[:, None]) / c
    mu = geo.r_max / c
    t_inf = (geo.r_max - geo.r_sub) / c
    return InfiniteDelayProfile(t_inf=t_inf, mu=mu, psi=psi, geometry=geo,
                                center_freq=cfg.center_freq, speed_of_light=c)


class Monotonicity(str, Enum):
    INCREASING = "increasing"
    DECREASING = "decreasing"
    UNIMODAL = "unimodal"


@dataclass(frozen=True)
class MonotonicityRegion:
    J: float
    kind: Monotonicity
    q_c: int | None          # 1-based peak index for unimodal profiles
    threshold: float         # (Q-2) N_sub d
    unit: float              # N_sub d

    @property
    def j_normalized(self) -> float:
        """``J / (N_sub d)``."""
        return self.J / self.unit


def location_functional(loc: UserLocation) -> float:
    """``J(r, theta) = 2 r cos(theta) / sin^2(theta)``."""
    s = math.sin(loc.theta)
    return 2.0 * loc.r * math.cos(loc.theta) / (s * s)


def classify_monotonicity(loc: UserLocation, cfg: SystemConfig,
                          endfire: str = "reject") -> MonotonicityRegion:
    """Predict how the unbounded delays vary along the array (Fresnel analysis).

    Increasing when ``J >= (Q-2) N_sub d``, decreasing when ``J <= -(Q-2) N_sub d``,
    otherwise rising up to ``q_c`` and falling after it. The analysis needs
    ``sin(theta) != 0``; at the endfire directions ``endfire="limit"`` returns the
    ``theta -> 0`` / ``theta -> pi`` limits (J = +inf / -inf) instead of raising.
    """
    Q, Ns, d = cfg.n_ttd_per_chain, cfg.n_sub, cfg.antenna_spacing
    unit = Ns * d
    if not 0.0 < loc.theta < math.pi:
        if endfire != "limit" or loc.theta not in (0.0, math.pi):
            raise ValueError(f"theta must lie strictly inside (0, pi), got {loc.theta}")
        J = math.inf if loc.theta == 0.0 else -math.inf
        kind = Monotonicity.INCREASING if J > 0 else Monotonicity.DECREASING
        return MonotonicityRegion(J=J, kind=kind, q_c=None, threshold=(Q - 2) * unit, unit=unit)
    J = location_functional(loc)
    thr = (Q - 2) * unit
    if J >= thr:
        kind, q_c = Monotonicity.INCREASING, None
    elif J <= -thr:
        kind, q_c = Monotonicity.DECREASING, None
    else:
        kind = Monotonicity.UNIMODAL
        q_c = Q // 2 + 1 + math.floor(J / (2 * unit))
        q_c = min(max(q_c, 2), Q)
    return MonotonicityRegion(J=J, kind=kind, q_c=q_c, threshold=thr, unit=unit)


def _forward_rule(dt, t_max):
    # dt[i] = t_{i+2} - t_{i+1}; first TTD of the group carries no delay
    return np.concatenate([[0.0], np.where(dt >= 0, np.minimum(t_max, dt), 0.0)])


def _backward_rule(dt, t_max):
    # mirror image: the last TTD carries no delay, t_q follows t_q - t_{q+1}
    return np.concatenate([np.where(dt <= 0, np.minimum(t_max, -dt), 0.0), [0.0]])


def finite_range_design(profile: InfiniteDelayProfile, topo: TtdTopology,
                        t_max: float) -> np.ndarray:
    """Raw TTD delays for one chain under a delay cap ``t_max``.

    Parallel clips the unbounded delays; serial wiring follows the positive
    (forward) or negative (backward) steps of the unbounded profile and zeroes
    the rest; hybrid applies the forward rule to the first half and the
    backward rule to the second.
    """
    topo = TtdTopology.parse(topo)
    t_inf = profile.t_inf
    Q = t_inf.shape[0]
    k = topo.kind
    if k is TopologyKind.PARALLEL:
        raw = np.minimum(t_max, t_inf)
    elif k is TopologyKind.SERIAL_F:
        raw = _forward_rule(np.diff(t_inf), t_max)
    elif k is TopologyKind.SERIAL_B:
        raw = _backward_rule(np.diff(t_inf), t_max)
    elif k is TopologyKind.HYBRID:
        if Q % 2:
            raise ValueError("hybrid topology needs an even Q")
        h = Q // 2
        raw = np.concatenate([_forward_rule(np.diff(t_inf[:h]), t_max),
                              _backward_rule(np.diff(t_inf[h:]), t_max)])
    else:
        raise ValueError(f"{topo.tag} needs several RF chains; single-user designs use one")
    return np.clip(raw, 0.0, t_max)


@dataclass(frozen=True)
class SingleUserDesign:
    """PS vector (length N), raw delays and the wiring they are meant for."""

    ps: np.ndarray
    raw: np.ndarray
    topology: TtdTopology

    @property
    def t_cum(self) -> np.ndarray:
        return cumulative_delays(self.raw, self.topology)


def design(loc: UserLocation, cfg: SystemConfig, topo: TtdTopology | str,
           t_max: float | None = None) -> SingleUserDesign:
    """Closed-form design for ``topo``; ``t_max=inf`` gives the unbounded optimum."""
    t_max = cfg.t_max if t_max is None else t_max
    topo = TtdTopology.parse(topo)
    prof = infinite_range_design(subarray_geometry(loc, cfg), loc, cfg)
    if math.isinf(t_max):
        return SingleUserDesign(prof.ps, prof.t_inf.copy(), PARALLEL)
    return SingleUserDesign(prof.ps, finite_range_design(prof, topo, t_max), topo)


def conventional_design(loc: UserLocation, cfg: SystemConfig) -> SingleUserDesign:
    """PS-only beam matched to the array response at the centre frequency."""
    dist = _distances(loc.r, loc.theta, element_offsets(cfg.n_antennas), cfg.antenna_spacing)
    ps = np.exp(2j * np.pi * cfg.center_freq * dist / cfg.speed_of_light)
    return SingleUserDesign(ps, np.zeros(cfg.n_ttd_per_chain), PARALLEL)


def analog_weights(ps, t_cum, freqs, n_sub: int) -> np.ndarray:
    """Unnormalised per-antenna analog weights ``a_i exp(-j 2 pi f_m t~_q)``, (M, N)."""
    ph = np.exp(-2j * np.pi * np.asarray(freqs)[:, None] * np.asarray(t_cum)[None, :])
    return np.asarray(ps)[None, :] * np.repeat(ph, n_sub, axis=1)


def array_gain(loc: UserLocation, sud: SingleUserDesign, cfg: SystemConfig,
               freqs=None) -> np.ndarray:
    """``G_m = |alpha_m^T A exp(-j 2 pi f_m t)|`` per subcarrier (at most N)."""
    freqs = subcarrier_frequencies(cfg) if freqs is None else np.asarray(freqs)
    dist = _distances(loc.r, loc.theta, element_offsets(cfg.n_antennas), cfg.antenna_spacing)
    alpha = np.exp(-2j * np.pi * freqs[:, None] * dist[None, :] / cfg.speed_of_light)
    w = analog_weights(sud.ps, sud.t_cum, freqs, cfg.n_sub)
    return np.abs(np.sum(alpha * w, axis=1))


def single_user_rate(h: np.ndarray, sud: SingleUserDesign, cfg: SystemConfig,
                     freqs=None) -> tuple[np.ndarray, float]:
    """Per-subcarrier rate with the digital coefficient at full power.

    ``h`` is ``(M, N)`` (or ``(M, 1, N)``). Returns the rates in bit/s/Hz and the
    cyclic-prefix-weighted spectral efficiency.
    """
    h = np.asarray(h)
    if h.ndim == 3:
        if h.shape[1] != 1:
            raise ValueError(f"single-user rate needs one user, channel has {h.shape[1]}")
        h = h[:, 0]
    M, N = h.shape
    if N != cfg.n_antennas or sud.ps.shape != (N,):
        raise ValueError(f"shape mismatch: channel {h.shape}, PS {sud.ps.shape}")
    freqs = subcarrier_frequencies(cfg) if freqs is None else np.asarray(freqs)
    w = analog_weights(sud.ps, sud.t_cum, freqs, cfg.n_sub)
    g2 = np.abs(np.sum(h.conj() * w, axis=1)) ** 2
    rates = np.log2(1.0 + cfg.transmit_power * g2 / (cfg.noise_power * N))
    return rates, float(rates.sum() / (M + cfg.cp_length))


def rate_from_gain(gain, beta2, cfg: SystemConfig) -> np.ndarray:
    """Shortcut ``log2(1 + |beta|^2 P_t G^2 / (sigma^2 N))``."""
    return np.log2(1.0 + np.asarray(beta2) * cfg.transmit_power * np.asarray(gain) ** 2
                   / (cfg.noise_power * cfg.n_antennas))
