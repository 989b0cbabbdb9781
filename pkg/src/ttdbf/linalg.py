"""Small dense linear-algebra helpers used by the solver."""

from __future__ import annotations

import warnings

import numpy as np

PINV_RCOND = 1e-12


class RankDeficiencyWarning(RuntimeWarning):
    pass


def pinv(x: np.ndarray, rcond: float = PINV_RCOND, warn: bool = True) -> np.ndarray:
    """Moore-Penrose inverse with singular values below ``rcond * s_max`` dropped."""
    u, s, vh = np.linalg.svd(x, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros(x.shape[::-1], dtype=np.result_type(x, float))
    keep = s > rcond * s[0]
    if warn and not keep.all():
        warnings.warn(f"pseudo-inverse dropped {int((~keep).sum())} of {s.size} singular values",
                      RankDeficiencyWarning, stacklevel=2)
    inv = np.where(keep, 1.0 / np.where(keep, s, 1.0), 0.0)
    return (vh.conj().T * inv) @ u.conj().T


def sylvester_hermitian(psi: np.ndarray, phi: np.ndarray, ups: np.ndarray) -> np.ndarray:
    """Solve ``psi X + X phi = ups`` for Hermitian PSD ``psi`` and positive definite ``phi``.

    With Hermitian coefficients the Schur forms are eigendecompositions, so the
    Bartels-Stewart back-substitution collapses to an elementwise division.
    """
    lam, u = np.linalg.eigh(psi)
    mu, v = np.linalg.eigh(phi)
    rhs = u.conj().T @ ups @ v
    return u @ (rhs / (lam[:, None] + mu[None, :])) @ v.conj().T


def sylvester_lowrank(psi: np.ndarray, h: np.ndarray, g: np.ndarray, c: float,
                      ups: np.ndarray) -> np.ndarray:
    """Solve ``psi X + X phi = ups`` with ``phi = h diag(g) h^H + c I``.

    ``psi`` is K x K Hermitian PSD, ``h`` is N x K, ``g >= 0`` and ``c > 0``.
    After diagonalising ``psi`` each row of the transformed unknown solves a
    shifted low-rank system, handled with the Woodbury identity in O(N K^2).
    """
    lam, u = np.linalg.eigh(psi)
    b = u.conj().T @ ups                      # K x N, rows b_k
    hg = h * g[None, :]                       # N x K
    gram = h.conj().T @ hg                    # K x K, h^H h diag(g)
    z = b.conj().T                            # N x K, column k is b_k^H
    hz = h.conj().T @ z                       # K x K
    y = np.empty_like(z)
    eye = np.eye(h.shape[1])
    for k, l in enumerate(lam):
        alpha = l + c
        w = np.linalg.solve(alpha * eye + gram, hz[:, k])
        y[:, k] = (z[:, k] - hg @ w) / alpha
    return u @ y.conj().T


def lowrank_apply(x: np.ndarray, h: np.ndarray, g: np.ndarray, c: float) -> np.ndarray:
    """``x @ (h diag(g) h^H + c I)`` without forming the N x N matrix."""
    return ((x @ h) * g[None, :]) @ h.conj().T + c * x


def sylvester_residual(psi, x, phi_apply, ups) -> float:
    """Relative residual ``||psi X + X phi - ups|| / ||ups||``."""
    r = psi @ x + phi_apply(x) - ups
    den = np.linalg.norm(ups)
    return float(np.linalg.norm(r) / den) if den > 0 else float(np.linalg.norm(r))


def sylvester_kron(psi: np.ndarray, phi: np.ndarray, ups: np.ndarray) -> np.ndarray:
    """Reference solve via the vectorised form ``(I kron psi + phi^T kron I) vec X = vec ups``.

    O((NK)^3); only for checking the fast solvers on small instances.
    """
    k, n = ups.shape
    big = np.kron(np.eye(n), psi) + np.kron(phi.T, np.eye(k))
    vec = np.linalg.solve(big, ups.reshape(-1, order="F"))
    return vec.reshape((k, n), order="F")
