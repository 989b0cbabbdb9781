"""Spectral-efficiency accounting and the reference schemes.

Insertion loss never enters the design; it is applied when rates are
computed, as a power weight per TTD branch relative to a parallel network.
With equalised splitters every branch gets the same weight, so the effect is
a flat transmit-power derating. Without equalisation later branches of a
serial group are progressively weaker.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np

from .channel import NearFieldChannel
from .config import SystemConfig
from .solver import (BeamformerSet, SolverParams, SolveResult, penalty_solve,
                     full_digital_solve, sum_rates)
from .single_user import SingleUserDesign
from .topology import SplitterPlan, TtdTopology, branch_power_weights, PARALLEL


@dataclass
class EvaluationReport:
    scheme: str
    topology: str
    rates: np.ndarray              # (M, K) bits/s/Hz
    spectral_efficiency: float
    gain_fractions: np.ndarray     # (M, K) normalised beamforming gain in [0, 1]
    derating: float                # mean branch power relative to parallel
    converged: bool = True
    xi: float = 0.0
    diagnostics: dict = field(default_factory=dict)

    def row(self, **extra) -> dict:
        out = dict(extra)
        out.update(scheme=self.scheme, topology=self.topology,
                   K=int(self.rates.shape[1]), rate_bps_hz=self.spectral_efficiency,
                   converged=self.converged)
        return out


def aggregate(rates, cfg: SystemConfig) -> float:
    """``(1/(M + L_cp)) sum_{m,k} R_{m,k}``."""
    return float(np.sum(rates) / (cfg.n_subcarriers + cfg.cp_length))


def gain_fractions(F, h) -> np.ndarray:
    """``|h_k^H f_k| / (||h_k|| ||f_k||)`` per subcarrier and user.

    For one user on a LoS channel this equals the array gain divided by N.
    """
    num = np.abs(np.einsum("mkn,mnk->mk", h.conj(), F))
    den = np.linalg.norm(h, axis=2) * np.linalg.norm(F, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)


def _eta_of(insertion, cfg: SystemConfig) -> float:
    if insertion is None:
        return cfg.eta
    if isinstance(insertion, SplitterPlan):
        return insertion.eta
    return float(insertion)


def spectral_efficiency(bf: BeamformerSet, channel: NearFieldChannel, cfg: SystemConfig,
                        insertion: SplitterPlan | float | None = None, equalized: bool = True,
                        scheme: str = "hybrid_bf") -> EvaluationReport:
    """Rates of a hybrid beamformer with the topology's insertion loss applied.

    ``insertion`` is a splitter plan or a linear per-stage loss; ``None`` uses
    ``cfg.eta``. The transmit power constraint is met before the network, so
    losses reduce the radiated power.
    """
    eta = _eta_of(insertion, cfg)
    n_rf, Q = bf.raw.shape
    w = branch_power_weights(bf.topology, n_rf, Q, eta, equalized)
    F = bf.precoders(channel.freqs, None if np.all(w == 1.0) else w)
    rates = sum_rates(F, channel.h, cfg)
    return EvaluationReport(scheme=scheme, topology=bf.topology.tag, rates=rates,
                            spectral_efficiency=aggregate(rates, cfg),
                            gain_fractions=gain_fractions(F, channel.h),
                            derating=float(w.mean()))


def single_user_beamformer(sud: SingleUserDesign, cfg: SystemConfig) -> BeamformerSet:
    """Wrap a closed-form design with the full-power digital scalar."""
    Q, ns = cfg.n_ttd_per_chain, cfg.n_sub
    D = np.full((cfg.n_subcarriers, 1, 1), math.sqrt(cfg.transmit_power), dtype=complex)
    return BeamformerSet(sud.ps.reshape(1, Q, ns).copy(), sud.raw.reshape(1, Q).copy(), D,
                         sud.topology, float(np.max(sud.raw, initial=0.0)))


def report_from_solve(res: SolveResult, channel: NearFieldChannel, cfg: SystemConfig,
                      scheme: str, insertion=None, equalized: bool = True) -> EvaluationReport:
    rep = spectral_efficiency(res.beamformer, channel, cfg, insertion, equalized, scheme)
    rep.converged = res.converged
    rep.xi = res.xi
    rep.diagnostics = res.diagnostics
    return rep


def evaluate_scheme(channel: NearFieldChannel, topo, cfg: SystemConfig,
                    params: SolverParams = SolverParams(), t_max: float | None = None,
                    insertion=None, equalized: bool = True) -> EvaluationReport:
    """Optimise a TTD hybrid beamformer and evaluate it."""
    topo = TtdTopology.parse(topo)
    res = penalty_solve(channel, topo, cfg, params, t_max=t_max)
    return report_from_solve(res, channel, cfg, "hybrid_bf", insertion, equalized)


def unbounded_delay(cfg: SystemConfig) -> float:
    """``(N - N_sub) d / c``: enough delay range for any user location."""
    return (cfg.n_antennas - cfg.n_sub) * cfg.antenna_spacing / cfg.speed_of_light


def benchmark_full_digital(channel: NearFieldChannel, cfg: SystemConfig) -> EvaluationReport:
    """Unconstrained fully-digital WMMSE; an upper bound for every hybrid scheme."""
    res = full_digital_solve(channel, cfg)
    return EvaluationReport(scheme="full_digital", topology="none", rates=res.rates,
                            spectral_efficiency=res.spectral_efficiency,
                            gain_fractions=gain_fractions(res.P, channel.h), derating=1.0,
                            diagnostics={"iterations": res.inner_iterations})


def benchmark_optimal_ttd(channel: NearFieldChannel, cfg: SystemConfig,
                          params: SolverParams = SolverParams()) -> EvaluationReport:
    """Parallel TTDs with an unconstrained delay range."""
    res = penalty_solve(channel, PARALLEL, cfg, params, t_max=unbounded_delay(cfg))
    return report_from_solve(res, channel, cfg, "optimal_ttd")


def benchmark_conventional(channel: NearFieldChannel, cfg: SystemConfig,
                           params: SolverParams = SolverParams()) -> EvaluationReport:
    """Phase shifters only: every delay held at zero."""
    res = penalty_solve(channel, PARALLEL, cfg, params.with_(freeze_delays=True))
    return report_from_solve(res, channel, cfg, "conventional")
