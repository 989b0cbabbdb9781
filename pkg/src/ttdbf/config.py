"""System parameters, user locations and scale presets."""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
import math

SPEED_OF_LIGHT = 299_792_458.0


def db_to_linear(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


def linear_to_db(value: float) -> float:
    return 10.0 * math.log10(value)


def dbm_to_watts(value_dbm: float) -> float:
    return 10.0 ** ((value_dbm - 30.0) / 10.0)


def watts_to_dbm(value_w: float) -> float:
    return 10.0 * math.log10(value_w) + 30.0


@dataclass(frozen=True)
class SystemConfig:
    """Array geometry, OFDM grid, link budget and TTD hardware limits.

    All quantities are SI / linear. ``antenna_spacing`` defaults to half a
    wavelength at the centre frequency. ``n_paths`` counts the NLoS scatterers
    per user; the LoS path is always present on top of them.
    """

    n_antennas: int = 512
    n_rf: int = 1
    n_ttd_per_chain: int = 32
    n_subcarriers: int = 10
    cp_length: int = 4
    center_freq: float = 100e9
    bandwidth: float = 10e9
    transmit_power: float = 0.1
    noise_density: float = dbm_to_watts(-174.0)
    antenna_spacing: float | None = None
    tx_gain: float = db_to_linear(15.0)
    rx_gain: float = db_to_linear(5.0)
    absorption_coeff: float = 0.0
    n_paths: int = 3
    scatter_loss: float = db_to_linear(-15.0)
    n_users: int = 1
    t_max: float = 80e-12
    eta_ttd: float = 1.0
    eta_splitter: float = 1.0
    speed_of_light: float = field(default=SPEED_OF_LIGHT, repr=False)

    def __post_init__(self):
        if self.antenna_spacing is None:
            object.__setattr__(self, "antenna_spacing",
                               self.speed_of_light / (2.0 * self.center_freq))
        errors = self.validate()
        if errors:
            raise ValueError("; ".join(f"{k}: {v}" for k, v in errors))

    def validate(self) -> list[tuple[str, str]]:
        """Return ``(field, message)`` pairs for every violated invariant."""
        errs = []
        for name in ("n_antennas", "n_rf", "n_ttd_per_chain", "n_subcarriers", "n_users"):
            if int(getattr(self, name)) < 1:
                errs.append((name, "must be a positive integer"))
        for name in ("cp_length", "n_paths"):
            if int(getattr(self, name)) < 0:
                errs.append((name, "must be non-negative"))
        if errs:
            return errs
        if self.n_antennas % self.n_ttd_per_chain:
            errs.append(("n_ttd_per_chain",
                         f"{self.n_ttd_per_chain} does not divide n_antennas={self.n_antennas}"))
        if self.n_ttd_per_chain % 2:
            errs.append(("n_ttd_per_chain", "must be even (hybrid topology splits at Q/2)"))
        if self.bandwidth <= 0:
            errs.append(("bandwidth", "must be positive"))
        if self.center_freq <= self.bandwidth / 2:
            errs.append(("center_freq", "must exceed bandwidth/2"))
        for name in ("transmit_power", "noise_density", "tx_gain", "rx_gain",
                     "scatter_loss", "antenna_spacing"):
            if not getattr(self, name) > 0:
                errs.append((name, "must be positive"))
        if self.absorption_coeff < 0:
            errs.append(("absorption_coeff", "must be non-negative"))
        if not self.t_max >= 0:
            errs.append(("t_max", "must be non-negative"))
        for name in ("eta_ttd", "eta_splitter"):
            if getattr(self, name) < 1:
                errs.append((name, "insertion loss must be >= 1 (>= 0 dB)"))
        return errs

    @property
    def n_sub(self) -> int:
        """Antennas behind one TTD."""
        return self.n_antennas // self.n_ttd_per_chain

    @property
    def noise_power(self) -> float:
        """Noise power in one subcarrier (density times B/M)."""
        return self.noise_density * self.bandwidth / self.n_subcarriers

    @property
    def eta(self) -> float:
        """Combined per-stage insertion loss of a TTD and its splitter."""
        return self.eta_ttd * self.eta_splitter

    def with_(self, **changes) -> "SystemConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class UserLocation:
    """Polar position relative to the array centre (angle from the array axis)."""

    r: float
    theta: float

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError(f"distance must be positive, got {self.r}")

    @classmethod
    def from_degrees(cls, r: float, theta_deg: float) -> "UserLocation":
        return cls(r, math.radians(theta_deg))


def paper_config(**changes) -> SystemConfig:
    """Full-scale parameter set (N=512, Q=32, M=10)."""
    return SystemConfig(**changes)


def desk_config(**changes) -> SystemConfig:
    """Reduced set for laptop-scale Monte Carlo.

    N=128 with Q=8 keeps 16 antennas per TTD, so N_sub*d/c stays at 80 ps.
    """
    base = dict(n_antennas=128, n_ttd_per_chain=8, n_subcarriers=5, n_rf=2, n_users=2)
    base.update(changes)
    return SystemConfig(**base)


PRESETS = {"paper": paper_config, "desk": desk_config}
