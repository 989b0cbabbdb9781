"""TTD network topologies: delay accumulation, phase matrices and power splitters.

Raw delays ``t[n, q]`` are what each physical TTD applies. The delay seen at
the output of TTD ``q`` on chain ``n`` depends on how the TTDs are wired:

* parallel: each output sees only its own TTD,
* serial forward / backward: prefix / suffix sums along the chain,
* hybrid: forward prefix sums over the first half, suffix sums over the second,
* hfb: forward serial on the first half of the RF chains, backward on the rest.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np


class TopologyKind(str, Enum):
    PARALLEL = "parallel"
    SERIAL_F = "serial_f"
    SERIAL_B = "serial_b"
    HYBRID = "hybrid"
    HFB = "hfb"


# per-chain wiring
PAR, FWD, BWD, HYB = "parallel", "forward", "backward", "hybrid"


@dataclass(frozen=True)
class TtdTopology:
    kind: TopologyKind

    @classmethod
    def parse(cls, tag) -> "TtdTopology":
        if isinstance(tag, TtdTopology):
            return tag
        try:
            return cls(TopologyKind(str(tag).lower()))
        except ValueError:
            valid = ", ".join(k.value for k in TopologyKind)
            raise ValueError(f"unknown topology {tag!r} (expected one of {valid})") from None

    @property
    def tag(self) -> str:
        return self.kind.value

    @property
    def is_serial_family(self) -> bool:
        return self.kind is not TopologyKind.PARALLEL

    def chain_wiring(self, n_rf: int) -> list[str]:
        """Wiring of every RF chain's TTD group."""
        k = self.kind
        if k is TopologyKind.HFB:
            if n_rf % 2:
                raise ValueError(f"HFB needs an even number of RF chains, got {n_rf}")
            return [FWD if n < n_rf // 2 else BWD for n in range(n_rf)]
        wiring = {TopologyKind.PARALLEL: PAR, TopologyKind.SERIAL_F: FWD,
                  TopologyKind.SERIAL_B: BWD, TopologyKind.HYBRID: HYB}[k]
        return [wiring] * n_rf

    def check(self, n_rf: int, Q: int) -> None:
        if self.kind is TopologyKind.HYBRID and Q % 2:
            raise ValueError(f"hybrid topology needs an even number of TTDs per chain, got {Q}")
        self.chain_wiring(n_rf)


PARALLEL = TtdTopology(TopologyKind.PARALLEL)
SERIAL_F = TtdTopology(TopologyKind.SERIAL_F)
SERIAL_B = TtdTopology(TopologyKind.SERIAL_B)
HYBRID = TtdTopology(TopologyKind.HYBRID)
HFB = TtdTopology(TopologyKind.HFB)
ALL_TOPOLOGIES = (PARALLEL, SERIAL_F, SERIAL_B, HYBRID, HFB)


def _accumulate(raw: np.ndarray, wiring: str) -> np.ndarray:
    if wiring == PAR:
        return raw.copy()
    if wiring == FWD:
        return np.cumsum(raw)
    if wiring == BWD:
        return np.cumsum(raw[::-1])[::-1]
    Q = raw.shape[0]
    if Q % 2:
        raise ValueError(f"hybrid topology needs an even number of TTDs per chain, got {Q}")
    h = Q // 2
    return np.concatenate([np.cumsum(raw[:h]), np.cumsum(raw[h:][::-1])[::-1]])


def cumulative_delays(raw, topo: TtdTopology) -> np.ndarray:
    """Output delays ``t~[n, q]`` from raw TTD delays.

    ``raw`` is ``(N_RF, Q)``; a 1-D array is treated as a single chain.
    """
    topo = TtdTopology.parse(topo)
    raw = np.asarray(raw, dtype=float)
    single = raw.ndim == 1
    raw2 = np.atleast_2d(raw)
    topo.check(raw2.shape[0], raw2.shape[1])
    out = np.stack([_accumulate(row, w) for row, w in zip(raw2, topo.chain_wiring(raw2.shape[0]))])
    return out[0] if single else out


def _difference(target: np.ndarray, wiring: str) -> np.ndarray:
    if wiring == PAR:
        return target.copy()
    if wiring == FWD:
        return np.diff(target, prepend=0.0)
    if wiring == BWD:
        return np.diff(target[::-1], prepend=0.0)[::-1]
    h = target.shape[0] // 2
    return np.concatenate([_difference(target[:h], FWD), _difference(target[h:], BWD)])


def raw_from_cumulative(target, topo: TtdTopology) -> np.ndarray:
    """Invert :func:`cumulative_delays` by differencing.

    The result is only a valid raw vector (all entries >= 0) when ``target``
    has the monotonicity the wiring can produce.
    """
    topo = TtdTopology.parse(topo)
    target = np.asarray(target, dtype=float)
    single = target.ndim == 1
    t2 = np.atleast_2d(target)
    out = np.stack([_difference(row, w) for row, w in zip(t2, topo.chain_wiring(t2.shape[0]))])
    return out[0] if single else out


def ttd_phases(t_cum, freqs) -> np.ndarray:
    """``exp(-j 2 pi f_m t~[n, q])`` with shape ``(M, N_RF, Q)``."""
    t_cum = np.atleast_2d(np.asarray(t_cum, dtype=float))
    freqs = np.atleast_1d(np.asarray(freqs, dtype=float))
    return np.exp(-2j * np.pi * freqs[:, None, None] * t_cum[None])


def ttd_phase_matrix(t_cum, f: float) -> np.ndarray:
    """Block-diagonal ``T_m`` of shape ``(Q N_RF, N_RF)``; block ``n`` is a column."""
    t_cum = np.atleast_2d(np.asarray(t_cum, dtype=float))
    n_rf, Q = t_cum.shape
    T = np.zeros((Q * n_rf, n_rf), dtype=complex)
    ph = np.exp(-2j * np.pi * f * t_cum)
    for n in range(n_rf):
        T[n * Q:(n + 1) * Q, n] = ph[n]
    return T


# ---------------------------------------------------------------------------
# power splitters and insertion loss

@dataclass(frozen=True)
class SplitterPlan:
    """Splitter coefficients of one serial group, in wiring order.

    ``nu[q]`` is the fraction the ``q``-th splitter sends to its TTD output,
    ``nu_cum[q]`` the fraction of the group input that ends up there.
    """

    nu: np.ndarray
    nu_cum: np.ndarray
    eta: float
    eta_eff: float


def _geometric(eta: float, n: int) -> float:
    # sum_{i<n} eta^i, exact at eta == 1 where the closed form is 0/0
    return float(np.sum(eta ** np.arange(n)))


def _check_eta(eta):
    if eta < 1:
        raise ValueError(f"insertion loss must be >= 1 (linear), got {eta}")


def splitter_equal_power(Q: int) -> SplitterPlan:
    """Lossless design ``nu_q = 1/(Q-q+1)``: every TTD gets ``P_in/Q``."""
    if Q < 1:
        raise ValueError("Q must be positive")
    q = np.arange(1, Q + 1)
    nu = 1.0 / (Q - q + 1)
    return SplitterPlan(nu=nu, nu_cum=np.full(Q, 1.0 / Q), eta=1.0, eta_eff=1.0)


def splitter_equalized(Q: int, eta: float) -> SplitterPlan:
    """Coefficients that equalise output power under a per-stage loss ``eta``.

    ``nu_q = (1-eta)/(1-eta^(Q-q+1))``, evaluated as the reciprocal of a
    geometric sum so ``eta = 1`` reduces to :func:`splitter_equal_power`.
    """
    _check_eta(eta)
    if Q < 1:
        raise ValueError("Q must be positive")
    q = np.arange(1, Q + 1)
    nu = np.array([1.0 / _geometric(eta, Q - qq + 1) for qq in q])
    nu_cum = eta ** (q - 1.0) / _geometric(eta, Q)
    return SplitterPlan(nu=nu, nu_cum=nu_cum, eta=float(eta),
                        eta_eff=float(eta * _geometric(eta, Q) / Q))


def cascade_output_powers(nu, eta: float = 1.0, p_in: float = 1.0) -> np.ndarray:
    """Simulate a serial splitter chain, each stage losing a factor ``eta``."""
    nu = np.asarray(nu, dtype=float)
    out = np.empty_like(nu)
    remaining = p_in
    for i, v in enumerate(nu):
        out[i] = v * remaining / eta ** (i + 1)
        remaining *= 1.0 - v
    return out


def effective_insertion_loss(Q: int, eta: float, topo: TtdTopology) -> float:
    """Per-TTD loss after equalisation: ``eta`` for parallel, a geometric mean
    over the serial group length (``Q``, or ``Q/2`` for hybrid) otherwise."""
    _check_eta(eta)
    topo = TtdTopology.parse(topo)
    if topo.kind is TopologyKind.PARALLEL:
        return float(eta)
    group = Q // 2 if topo.kind is TopologyKind.HYBRID else Q
    return float(eta * _geometric(eta, group) / group)


def _chain_depth(wiring: str, Q: int) -> np.ndarray:
    q = np.arange(1, Q + 1)
    if wiring == PAR:
        return np.ones(Q)
    if wiring == FWD:
        return q.astype(float)
    if wiring == BWD:
        return (Q - q + 1).astype(float)
    h = Q // 2
    return np.concatenate([np.arange(1, h + 1), np.arange(h, 0, -1)]).astype(float)


def branch_power_weights(topo: TtdTopology, n_rf: int, Q: int, eta: float,
                         equalized: bool = True) -> np.ndarray:
    """Per-branch output power relative to a parallel network, shape ``(N_RF, Q)``.

    Equalized splitters give a flat ``eta / eta_eff``. Without equalization the
    lossless ``1/(Q-q+1)`` split is used and branch ``q`` keeps ``eta^(1-depth)``.
    Parallel is the reference and always gets 1.
    """
    _check_eta(eta)
    topo = TtdTopology.parse(topo)
    w = np.ones((n_rf, Q))
    if topo.kind is TopologyKind.PARALLEL:
        return w
    if equalized:
        return w * (eta / effective_insertion_loss(Q, eta, topo))
    for n, wiring in enumerate(topo.chain_wiring(n_rf)):
        w[n] = eta ** (1.0 - _chain_depth(wiring, Q))
    return w
