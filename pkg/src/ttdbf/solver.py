"""Penalty-based block coordinate descent for multi-user TTD hybrid beamforming.

The hybrid precoder ``A T_m D_m`` is relaxed to a free fully-digital ``P_m``
tied to it by the penalty ``(1/rho) ||P_m D_m^+ - A T_m||_F^2``. Each inner
sweep updates, in turn, the WMMSE scalars, ``P_m`` (a Sylvester equation),
the phase shifters, the TTD delays (grid coordinate descent) and ``D_m``.
The outer loop shrinks ``rho`` until the factorisation holds.

Shapes used throughout: ``h`` is ``(M, K, N)``, ``P`` is ``(M, N, K)``,
phase shifters ``ps`` are ``(N_RF, Q, N_sub)``, raw delays ``(N_RF, Q)`` and
``D`` is ``(M, N_RF, K)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
import math
import warnings

import numpy as np

from . import kernels
from .channel import NearFieldChannel
from .config import SystemConfig
from .linalg import pinv, sylvester_lowrank, lowrank_apply, sylvester_residual
from .single_user import (subarray_geometry, infinite_range_design, finite_range_design,
                          location_functional)
from .topology import TtdTopology, TopologyKind, cumulative_delays, PAR, FWD, BWD, HYB

_WIRING_TOPO = {PAR: "parallel", FWD: "serial_f", BWD: "serial_b", HYB: "hybrid"}


@dataclass(frozen=True)
class SolverParams:
    rho0: float = 1e4
    shrink: float = 0.1            # rho <- shrink * rho
    inner_tol: float = 1e-4
    xi_tol: float = 1e-4
    n_grid: int = 1000
    cd_tol: float = 1e-4
    cd_max_sweeps: int = 100
    ttd_method: str = "exact"      # "exact" grid optimum per chain, or "cd"
    max_outer: int = 30
    max_inner: int = 200
    freeze_delays: bool = False    # PS-only network, delays held at zero
    check_residuals: bool = True

    def __post_init__(self):
        if not self.rho0 > 0:
            raise ValueError("rho0 must be positive")
        if not 0 < self.shrink < 1:
            raise ValueError("shrink factor must lie in (0, 1)")
        if self.n_grid < 2:
            raise ValueError("n_grid must be at least 2")
        if self.ttd_method not in ("exact", "cd"):
            raise ValueError(f"unknown TTD search method {self.ttd_method!r}")
        if self.max_outer < 1 or self.max_inner < 1:
            raise ValueError("iteration caps must be positive")

    def with_(self, **changes) -> "SolverParams":
        return replace(self, **changes)


@dataclass
class BeamformerSet:
    """Hybrid precoder: phase shifters, raw TTD delays and digital matrices."""

    ps: np.ndarray
    raw: np.ndarray
    D: np.ndarray
    topology: TtdTopology
    t_max: float

    @property
    def n_rf(self) -> int:
        return self.ps.shape[0]

    @property
    def t_cum(self) -> np.ndarray:
        return cumulative_delays(self.raw, self.topology)

    def analog(self, freqs, weights=None) -> np.ndarray:
        """``A T_m`` for every subcarrier, ``(M, N, N_RF)``.

        ``weights`` (N_RF, Q) scales the power of each TTD branch.
        """
        n_rf, Q, ns = self.ps.shape
        ph = np.exp(-2j * np.pi * np.asarray(freqs)[:, None, None] * self.t_cum[None])
        if weights is not None:
            ph = ph * np.sqrt(weights)[None]
        cols = self.ps[None] * ph[..., None]                 # (M, N_RF, Q, N_sub)
        return cols.reshape(len(freqs), n_rf, Q * ns).transpose(0, 2, 1) / math.sqrt(Q * ns)

    def analog_matrix(self) -> np.ndarray:
        """The block-structured PS matrix ``A`` of shape ``(N, Q N_RF)``."""
        n_rf, Q, ns = self.ps.shape
        A = np.zeros((Q * ns, Q * n_rf), dtype=complex)
        for n in range(n_rf):
            for q in range(Q):
                A[q * ns:(q + 1) * ns, n * Q + q] = self.ps[n, q]
        return A / math.sqrt(Q * ns)

    def precoders(self, freqs, weights=None) -> np.ndarray:
        """``F_m = A T_m D_m``, shape ``(M, N, K)``."""
        return self.analog(freqs, weights) @ self.D

    def copy(self) -> "BeamformerSet":
        return BeamformerSet(self.ps.copy(), self.raw.copy(), self.D.copy(),
                             self.topology, self.t_max)


@dataclass
class PenaltyState:
    P: np.ndarray
    w: np.ndarray
    v: np.ndarray
    rho: float
    xi: float = math.inf


@dataclass
class SolveResult:
    beamformer: BeamformerSet
    spectral_efficiency: float
    rates: np.ndarray              # (M, K) bits/s/Hz after power scaling
    P: np.ndarray                  # auxiliary beamformers scaled to P_t
    converged: bool
    xi: float
    outer_iterations: int
    inner_iterations: int
    max_residual: float
    objective_drops: list          # (outer, inner, decrease) for every inner-loop decrease
    trace: list = field(default_factory=list)

    @property
    def diagnostics(self) -> dict:
        worst = max((d for _, _, d in self.objective_drops), default=0.0)
        return {"converged": self.converged, "xi": self.xi,
                "outer_iterations": self.outer_iterations,
                "inner_iterations": self.inner_iterations,
                "max_sylvester_residual": self.max_residual,
                "max_objective_drop": worst}


# ---------------------------------------------------------------------------
# rates and WMMSE scalars

def _gram(P_m, h_m):
    # g[k, i] = h_k^H p_i
    return h_m.conj() @ P_m


def rate_mk(P_m, h_m, cfg: SystemConfig, surrogate: bool = False) -> np.ndarray:
    """Per-user rate on one subcarrier, bits/s/Hz.

    ``surrogate=True`` replaces the noise power by ``(sigma^2/P_t) ||P_m||_F^2``,
    which makes the rate invariant to the scale of ``P_m``.
    """
    g = _gram(P_m, h_m)
    sig = np.abs(np.diag(g)) ** 2
    total = np.sum(np.abs(g) ** 2, axis=1)
    if surrogate:
        noise = cfg.noise_power / cfg.transmit_power * float(np.sum(np.abs(P_m) ** 2))
    else:
        noise = cfg.noise_power
    den = total - sig + noise
    with np.errstate(divide="ignore", invalid="ignore"):
        sinr = np.where(den > 0, sig / np.where(den > 0, den, 1.0), 0.0)
    return np.log2(1.0 + sinr)


def sum_rates(F, h, cfg: SystemConfig) -> np.ndarray:
    """``(M, K)`` rates for precoders ``F`` of shape ``(M, N, K)``."""
    return np.stack([rate_mk(F[m], h[m], cfg) for m in range(h.shape[0])])


def wmmse_update(P_m, h_m, cfg: SystemConfig) -> tuple[np.ndarray, np.ndarray]:
    """Optimal MSE weights ``w = 2^R~`` and receive scalars ``v`` for one subcarrier."""
    K = h_m.shape[0]
    p2 = float(np.sum(np.abs(P_m) ** 2))
    if p2 == 0.0:
        return np.ones(K), np.zeros(K, dtype=complex)
    g = _gram(P_m, h_m)
    sig = np.abs(np.diag(g)) ** 2
    den = np.sum(np.abs(g) ** 2, axis=1) + cfg.noise_power / cfg.transmit_power * p2
    v = np.diag(g) / den
    w = den / (den - sig)
    return w, v


def mse(P_m, h_m, v, cfg: SystemConfig) -> np.ndarray:
    """Surrogate MSE ``e_k`` of every user for given receive scalars."""
    g = _gram(P_m, h_m)
    p2 = float(np.sum(np.abs(P_m) ** 2))
    tot = np.sum(np.abs(g) ** 2, axis=1) + cfg.noise_power / cfg.transmit_power * p2
    return np.abs(v) ** 2 * tot - 2.0 * np.real(v.conj() * np.diag(g)) + 1.0


# ---------------------------------------------------------------------------
# block updates

def _sylvester_terms(w, v, h_m, at_m, D_m, rho, cfg):
    Dp = pinv(D_m)                                      # K x N_RF
    psi = Dp @ Dp.conj().T / rho
    g = w * np.abs(v) ** 2
    c = cfg.noise_power / cfg.transmit_power * float(g.sum())
    H = h_m.T                                           # N x K
    ups = (w * v.conj())[:, None] * h_m.conj() + Dp @ at_m.conj().T / rho
    return psi, H, g, c, ups


def solve_p_update(w, v, h_m, at_m, D_m, rho, cfg: SystemConfig,
                   return_residual: bool = False):
    """Maximise the penalised WMMSE objective over ``P_m`` for one subcarrier.

    Solves ``Psi X + X Phi = Upsilon`` for ``X = P_m^H`` with
    ``Psi = D^+ D^+^H / rho``, ``Phi = sum_k w|v|^2 (h h^H + sigma^2/P_t I)``
    and ``Upsilon = sum_k w v* e_k h^H + D^+ (A T)^H / rho``.
    """
    psi, H, g, c, ups = _sylvester_terms(w, v, h_m, at_m, D_m, rho, cfg)
    X = sylvester_lowrank(psi, H, g, c, ups)
    P = X.conj().T
    if return_residual:
        res = sylvester_residual(psi, X, lambda x: lowrank_apply(x, H, g, c), ups)
        return P, res
    return P


def sylvester_coefficients(w, v, h_m, at_m, D_m, rho, cfg: SystemConfig):
    """Dense ``(Psi, Phi, Upsilon)`` of the P-update, for checks on small instances."""
    psi, H, g, c, ups = _sylvester_terms(w, v, h_m, at_m, D_m, rho, cfg)
    phi = (H * g) @ H.conj().T + c * np.eye(H.shape[0])
    return psi, phi, ups


def _split(X, n_rf, Q, ns):
    # (M, N, N_RF) -> (M, N_RF, Q, N_sub)
    return X.transpose(0, 2, 1).reshape(X.shape[0], n_rf, Q, ns)


def ps_update(p_tilde, t_cum, freqs) -> np.ndarray:
    """Closed-form phase shifters from the targets ``p~ = P_m D_m^+`` (split per TTD).

    ``p_tilde`` is ``(M, N_RF, Q, N_sub)``; returns unit-modulus ``(N_RF, Q, N_sub)``.
    """
    ph = np.exp(2j * np.pi * np.asarray(freqs)[:, None, None] * np.atleast_2d(t_cum)[None])
    s = np.sum(p_tilde * ph[..., None], axis=0)
    return np.exp(1j * np.angle(s))


def delay_coefficients(p_tilde, ps) -> np.ndarray:
    """``psi[m, n, q] = p~_{m,n,q}^H a_{n,q}``."""
    return np.einsum("mnqs,nqs->mnq", p_tilde.conj(), ps)


def ttd_update(psi, freqs, topo: TtdTopology, t_max: float, raw, n_grid: int = 1000,
               tol: float = 1e-4, max_sweeps: int = 100, method: str = "exact") -> np.ndarray:
    """Grid search over raw delays maximising ``sum Re{psi e^{-j 2 pi f t~}}``.

    Parallel coordinates decouple and one pass finds the grid optimum. For
    serial and hybrid wiring ``method="cd"`` runs cyclic coordinate descent
    from ``raw`` snapped to the grid, which can stall in a local optimum;
    ``"exact"`` solves each serial group by dynamic programming over the
    cumulative delay. Both only move when the objective strictly improves
    and return on-grid delays.
    """
    topo = TtdTopology.parse(topo)
    raw = np.atleast_2d(np.asarray(raw, dtype=float))
    n_rf, Q = raw.shape
    if t_max <= 0:
        return np.zeros_like(raw)
    step = t_max / (n_grid - 1)
    out = np.empty_like(raw)
    freqs = np.ascontiguousarray(freqs, dtype=float)
    for n, wiring in enumerate(topo.chain_wiring(n_rf)):
        idx = np.clip(np.rint(raw[n] / step), 0, n_grid - 1).astype(np.int64)
        code = kernels.WIRING_CODES[wiring]
        coef = np.ascontiguousarray(psi[:, n, :])
        if method == "exact":
            kernels.chain_optimum(coef, freqs, idx, step, n_grid, code)
        else:
            kernels.coordinate_descent(coef, freqs, idx, step, n_grid, code, tol, max_sweeps)
        out[n] = idx * step
    return out


def digital_update(P_m, at_m) -> np.ndarray:
    """Least-squares ``D_m = (A T_m)^+ P_m``."""
    return pinv(at_m) @ P_m


def _penalty_terms(P, D, AT):
    # per-subcarrier ||P D^+ - A T||_F^2 and max-abs entry
    pens, xis = [], []
    for m in range(P.shape[0]):
        r = P[m] @ pinv(D[m]) - AT[m]
        pens.append(float(np.sum(np.abs(r) ** 2)))
        xis.append(float(np.max(np.abs(r))))
    return np.array(pens), max(xis)


def penalized_objective(P, D, AT, h, rho, cfg: SystemConfig) -> float:
    """``sum_{m,k} ln(1 + SINR~) - (1/rho) sum_m ||P_m D_m^+ - A T_m||^2``."""
    rates = sum(np.sum(rate_mk(P[m], h[m], cfg, surrogate=True)) for m in range(h.shape[0]))
    pens, _ = _penalty_terms(P, D, AT)
    return float(rates * math.log(2.0) - pens.sum() / rho)


def violation(P, D, AT) -> float:
    """``xi = max_m max_ij |P_m D_m^+ - A T_m|``."""
    return _penalty_terms(P, D, AT)[1]


# ---------------------------------------------------------------------------
# initialisation and the main loop

def chain_assignment(channel: NearFieldChannel, topo: TtdTopology, n_rf: int) -> list[int]:
    """User served by each RF chain at start-up.

    Chains cycle through the users; for HFB the users with the largest
    location functional J (delays growing along the array) go to the
    forward-wired chains.
    """
    K = channel.n_users
    order = list(range(K))
    if topo.kind is TopologyKind.HFB:
        order.sort(key=lambda k: -location_functional(channel.users[k]))
    return [order[n % K] for n in range(n_rf)]


def initial_beamformer(channel: NearFieldChannel, topo: TtdTopology, cfg: SystemConfig,
                       t_max: float, params: SolverParams = SolverParams()) -> BeamformerSet:
    """Closed-form single-user analog beams per chain plus a zero-forcing digital part."""
    topo = TtdTopology.parse(topo)
    n_rf, Q, ns = cfg.n_rf, cfg.n_ttd_per_chain, cfg.n_sub
    topo.check(n_rf, Q)
    wiring = topo.chain_wiring(n_rf)
    users = chain_assignment(channel, topo, n_rf)
    step = t_max / (params.n_grid - 1) if t_max > 0 else 0.0
    ps = np.empty((n_rf, Q, ns), dtype=complex)
    raw = np.zeros((n_rf, Q))
    for n, k in enumerate(users):
        loc = channel.users[k]
        prof = infinite_range_design(subarray_geometry(loc, cfg), loc, cfg)
        if not params.freeze_delays and t_max > 0:
            r = finite_range_design(prof, _WIRING_TOPO[wiring[n]], t_max)
            raw[n] = np.clip(np.rint(r / step), 0, params.n_grid - 1) * step
        t_cum = cumulative_delays(raw[n], _WIRING_TOPO[wiring[n]])
        # re-centre the PS phases so the beam stays focused at f_c whatever
        # part of the ideal delay profile the TTDs could not realise
        corr = cfg.center_freq * (t_cum - prof.t_inf)
        ps[n] = np.exp(2j * np.pi * (prof.psi + corr[:, None]))
    bf = BeamformerSet(ps, raw, np.zeros((cfg.n_subcarriers, n_rf, channel.n_users), complex),
                       topo, t_max)
    AT = bf.analog(channel.freqs)
    for m in range(cfg.n_subcarriers):
        eff = channel.h[m].conj() @ AT[m]                   # K x N_RF
        bf.D[m] = pinv(eff, warn=False)
    _scale_power(bf, AT, cfg)
    return bf


def _scale_power(bf: BeamformerSet, AT, cfg: SystemConfig) -> None:
    for m in range(AT.shape[0]):
        p = float(np.sum(np.abs(AT[m] @ bf.D[m]) ** 2))
        if p > 0:
            bf.D[m] *= math.sqrt(cfg.transmit_power / p)


def _pack_delays(p_tilde, bf, freqs, params):
    psi = delay_coefficients(p_tilde, bf.ps)
    return ttd_update(psi, freqs, bf.topology, bf.t_max, bf.raw, params.n_grid,
                      params.cd_tol, params.cd_max_sweeps, params.ttd_method)


def penalty_solve(channel: NearFieldChannel, topo: TtdTopology | str, cfg: SystemConfig,
                  params: SolverParams = SolverParams(), t_max: float | None = None,
                  init: BeamformerSet | None = None, trace: bool = False) -> SolveResult:
    """Maximise the OFDM sum rate over ``A``, TTD delays and ``D_m``.

    Returns the scaled beamformer (``||A T_m D_m||_F^2 = P_t`` on every
    subcarrier), its rates and convergence diagnostics. If ``xi`` is still
    above tolerance after ``max_outer`` outer iterations the iterate with the
    smallest ``xi`` is returned and ``converged`` is False.
    """
    topo = TtdTopology.parse(topo)
    t_max = cfg.t_max if t_max is None else float(t_max)
    if params.freeze_delays:
        t_max = 0.0
    h, freqs = channel.h, channel.freqs
    M, K, N = h.shape
    n_rf, Q, ns = cfg.n_rf, cfg.n_ttd_per_chain, cfg.n_sub
    if N != cfg.n_antennas or M != cfg.n_subcarriers:
        raise ValueError(f"channel shape {h.shape} does not match the configuration")

    bf = init.copy() if init is not None else initial_beamformer(channel, topo, cfg, t_max, params)
    AT = bf.analog(freqs)
    st = PenaltyState(P=AT @ bf.D, w=np.ones((M, K)), v=np.zeros((M, K), complex),
                      rho=params.rho0)
    st.xi = violation(st.P, bf.D, AT)

    drops, rows = [], []
    best = (math.inf, None)
    max_res = 0.0
    inner_total = 0
    converged = False
    outer = 0
    for outer in range(1, params.max_outer + 1):
        obj = penalized_objective(st.P, bf.D, AT, h, st.rho, cfg)
        for inner in range(1, params.max_inner + 1):
            inner_total += 1
            for m in range(M):
                st.w[m], st.v[m] = wmmse_update(st.P[m], h[m], cfg)
                if params.check_residuals:
                    st.P[m], res = solve_p_update(st.w[m], st.v[m], h[m], AT[m], bf.D[m],
                                                  st.rho, cfg, return_residual=True)
                    max_res = max(max_res, res)
                else:
                    st.P[m] = solve_p_update(st.w[m], st.v[m], h[m], AT[m], bf.D[m], st.rho, cfg)

            Dp = np.stack([pinv(bf.D[m]) for m in range(M)])
            p_tilde = _split(st.P @ Dp, n_rf, Q, ns)
            bf.ps = ps_update(p_tilde, bf.t_cum, freqs)
            if t_max > 0:
                bf.raw = _pack_delays(p_tilde, bf, freqs, params)
            AT = bf.analog(freqs)
            _update_digital(st.P, bf, AT)

            new = penalized_objective(st.P, bf.D, AT, h, st.rho, cfg)
            if new < obj:
                drops.append((outer, inner, obj - new))
            change = abs(new - obj)
            obj = new
            if change <= params.inner_tol * abs(obj):
                break
        st.xi = violation(st.P, bf.D, AT)
        if trace:
            rows.append(_trace_row(outer, inner, st, obj, bf, AT, h, cfg))
        if st.xi < best[0]:
            best = (st.xi, (bf.copy(), st.P.copy()))
        if st.xi < params.xi_tol:
            converged = True
            break
        st.rho *= params.shrink

    if not converged:
        bf, P = best[1]
        bf = bf.copy()
        xi = best[0]
    else:
        P, xi = st.P, st.xi
    AT = bf.analog(freqs)
    _scale_power(bf, AT, cfg)
    P = P * np.sqrt(cfg.transmit_power / np.sum(np.abs(P) ** 2, axis=(1, 2)))[:, None, None]
    rates = sum_rates(AT @ bf.D, h, cfg)
    se = float(rates.sum() / (M + cfg.cp_length))
    if not converged:
        warnings.warn(f"penalty loop stopped at xi={xi:.3g} after {outer} outer iterations",
                      RuntimeWarning, stacklevel=2)
    return SolveResult(beamformer=bf, spectral_efficiency=se, rates=rates, P=P,
                       converged=converged, xi=xi, outer_iterations=outer,
                       inner_iterations=inner_total, max_residual=max_res,
                       objective_drops=drops, trace=rows)


def _trace_row(outer, inner, st, obj, bf, AT, h, cfg) -> dict:
    F = AT @ bf.D
    F = F * np.sqrt(cfg.transmit_power / np.sum(np.abs(F) ** 2, axis=(1, 2)))[:, None, None]
    se = float(sum_rates(F, h, cfg).sum() / (h.shape[0] + cfg.cp_length))
    # distance between P and the hybrid precoder it stands for, after matching scale
    fit = max(float(np.linalg.norm(st.P[m] - AT[m] @ bf.D[m]) / np.linalg.norm(st.P[m]))
              for m in range(h.shape[0]))
    cond = max(float(np.linalg.cond(bf.D[m])) for m in range(h.shape[0]))
    return {"outer": outer, "inner": inner, "rho": st.rho, "objective": obj, "xi": st.xi,
            "rate": se, "factorization_error": fit, "cond_digital": cond}


def _update_digital(P, bf: BeamformerSet, AT, backtracks: int = 8) -> None:
    """Least-squares digital update, damped so the penalty never increases.

    ``(A T)^+ P`` fits ``A T D`` to ``P``, which is not exactly the penalty's
    criterion ``||P D^+ - A T||``. When the full step raises the penalty the
    step towards it is halved up to ``backtracks`` times, then ``D`` is kept.
    (The exact minimiser ``(P^+ A T)^+`` is monotone too but lets ``D`` become
    ill-conditioned, after which a small penalty no longer means
    ``P ~ A T D``.)
    """
    for m in range(P.shape[0]):
        cur = float(np.sum(np.abs(P[m] @ pinv(bf.D[m], warn=False) - AT[m]) ** 2))
        target = digital_update(P[m], AT[m])
        step = 1.0
        for _ in range(backtracks + 1):
            cand = bf.D[m] + step * (target - bf.D[m])
            val = float(np.sum(np.abs(P[m] @ pinv(cand, warn=False) - AT[m]) ** 2))
            if val <= cur:
                bf.D[m] = cand
                break
            step *= 0.5


# ---------------------------------------------------------------------------
# fully-digital reference

def _reduced_surrogate(C, Rh, snr_inv):
    # per-subcarrier surrogate sum rate (nats) of unit-power C in channel coordinates
    G = np.conj(Rh) @ C
    diag = np.diagonal(G, axis1=1, axis2=2)
    den = np.sum(np.abs(G) ** 2, axis=2) + snr_inv
    return diag, den, np.sum(np.log(den / (den - np.abs(diag) ** 2)), axis=1)


def _unit_power(C):
    return C / np.sqrt(np.sum(np.abs(C) ** 2, axis=(1, 2)))[:, None, None]


def full_digital_solve(channel: NearFieldChannel, cfg: SystemConfig, tol: float = 1e-12,
                       max_iter: int = 100000) -> SolveResult:
    """WMMSE with no analog constraint (one RF chain per antenna).

    The WMMSE precoder update keeps every column in the span of the user
    channels, so the iteration runs on K x K coordinates ``P_m = Q_m C_m``
    with ``h_m^T = Q_m R_m`` (thin QR). Iterates are identical to the
    N-dimensional ones. Convergence is slow at high SNR, so each step also
    tries an extrapolated point along the WMMSE direction and keeps it only
    when the surrogate is at least as good; the step length grows while
    that keeps working and resets otherwise. Started from maximum-ratio
    transmission.
    """
    h = channel.h
    M, K, N = h.shape
    Qb, R = np.linalg.qr(np.transpose(h, (0, 2, 1)))
    Rh = np.transpose(R, (0, 2, 1))
    s = cfg.noise_power / cfg.transmit_power
    eye = np.eye(K)
    C = _unit_power(R.copy())
    diag, den, obj = _reduced_surrogate(C, Rh, s)
    beta = np.ones(M)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        v = diag / den
        w = den / (den - np.abs(diag) ** 2)
        g = w * np.abs(v) ** 2
        phi = np.einsum("mk,mki,mkj->mij", g, Rh, np.conj(Rh)) + (s * g.sum(1))[:, None, None] * eye
        Cw = _unit_power(np.linalg.solve(phi, R * (w * v)[:, None, :]))
        Cx = _unit_power(C + 2 * beta[:, None, None] * (Cw - C))
        dw, nw, ow = _reduced_surrogate(Cw, Rh, s)
        dx, nx, ox = _reduced_surrogate(Cx, Rh, s)
        take = ox >= ow
        beta = np.where(take, np.minimum(1.5 * beta, 1e4), 1.0)
        C = np.where(take[:, None, None], Cx, Cw)
        diag = np.where(take[:, None], dx, dw)
        den = np.where(take[:, None], nx, nw)
        new = np.where(take, ox, ow)
        done = np.all(np.abs(new - obj) <= tol * np.abs(new))
        obj = new
        if done:
            converged = True
            break
    P = (Qb @ C) * math.sqrt(cfg.transmit_power)
    rates = sum_rates(P, h, cfg)
    eye = BeamformerSet(np.ones((1, 1, N), complex), np.zeros((1, 1)), np.zeros((M, 1, K)),
                        TtdTopology.parse("parallel"), 0.0)
    return SolveResult(beamformer=eye, spectral_efficiency=float(rates.sum() / (M + cfg.cp_length)),
                       rates=rates, P=P, converged=converged, xi=0.0, outer_iterations=1,
                       inner_iterations=it, max_residual=0.0, objective_drops=[])
