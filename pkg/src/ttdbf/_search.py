"""Reference (numpy) implementation of the TTD grid coordinate descent.

The Cython module ``_search_ext`` implements the same functions with the same
signatures; :mod:`ttdbf.kernels` picks one at import time.
"""

import numpy as np

WIRING_CODES = {"parallel": 0, "forward": 1, "backward": 2, "hybrid": 3}


def affected(q: int, Q: int, wiring: int) -> slice:
    """Outputs whose delay changes when raw TTD ``q`` changes."""
    if wiring == 0:
        return slice(q, q + 1)
    if wiring == 1:
        return slice(q, Q)
    if wiring == 2:
        return slice(0, q + 1)
    h = Q // 2
    return slice(q, h) if q < h else slice(h, q + 1)


def cumulate(raw: np.ndarray, wiring: int) -> np.ndarray:
    if wiring == 0:
        return raw.copy()
    if wiring == 1:
        return np.cumsum(raw)
    if wiring == 2:
        return np.cumsum(raw[::-1])[::-1]
    h = raw.shape[0] // 2
    return np.concatenate([np.cumsum(raw[:h]), np.cumsum(raw[h:][::-1])[::-1]])


def delay_objective(psi, freqs, idx, step, wiring) -> float:
    """``sum_m sum_q Re{psi[m, q] exp(-j 2 pi f_m t~_q)}`` for grid indices ``idx``."""
    t = cumulate(np.asarray(idx, dtype=float) * step, wiring)
    return float(np.real(np.sum(psi * np.exp(-2j * np.pi * np.outer(freqs, t)))))


def coordinate_descent(psi, freqs, idx, step, n_grid, wiring, tol, max_sweeps):
    """Maximise :func:`delay_objective` one raw delay at a time over the grid.

    ``idx`` (int64, length Q) is updated in place. A coordinate moves only to a
    strictly better grid point, so the objective never decreases. Stops once a
    sweep improves it by at most ``tol`` relative, or nothing moved.
    Returns ``(sweeps, objective)``.
    """
    psi = np.asarray(psi, dtype=complex)
    freqs = np.asarray(freqs, dtype=float)
    Q = idx.shape[0]
    # (U, M) grid phasors, shared by every coordinate
    grid = np.exp(-2j * np.pi * np.outer(np.arange(n_grid) * step, freqs))
    obj = delay_objective(psi, freqs, idx, step, wiring)
    sweeps = 0
    while sweeps < max_sweeps:
        sweeps += 1
        moved = False
        for q in range(Q):
            sl = affected(q, Q, wiring)
            t = cumulate(idx.astype(float) * step, wiring)
            # strip t_q out of the affected outputs
            base = t[sl] - idx[q] * step
            coef = np.sum(psi[:, sl] * np.exp(-2j * np.pi * np.outer(freqs, base)), axis=1)
            vals = (grid @ coef).real
            u = int(np.argmax(vals))
            if vals[u] > vals[idx[q]]:
                idx[q] = u
                moved = True
        new = delay_objective(psi, freqs, idx, step, wiring)
        gain = new - obj
        obj = new
        if not moved or gain <= tol * abs(obj):
            break
    return sweeps, obj


def _sliding_max(x: np.ndarray, w: int) -> np.ndarray:
    """``out[s] = max(x[max(0, s-w+1) : s+1])`` for ``s < len(x) + w - 1`` (van Herk / Gil-Werman)."""
    n = x.shape[0]
    total = n + w - 1
    nb = -(-(total + w - 1) // w)
    pad = np.full(nb * w, -np.inf)
    pad[w - 1:w - 1 + n] = x
    blocks = pad.reshape(nb, w)
    pre = np.maximum.accumulate(blocks, axis=1).ravel()
    suf = np.maximum.accumulate(blocks[:, ::-1], axis=1)[:, ::-1].ravel()
    start = np.arange(total)
    return np.maximum(suf[start], pre[start + w - 1])


def _chain_dp(psi, freqs, step, n_grid):
    # forward-wired chain: exact maximiser over cumulative grid indices
    M, Q = psi.shape
    span = Q * (n_grid - 1) + 1
    ph = np.exp(-2j * np.pi * np.outer(np.arange(span) * step, freqs))   # (span, M)
    vals = []
    V = (ph[:n_grid] @ psi[:, 0]).real
    vals.append(V)
    for q in range(1, Q):
        S = (q + 1) * (n_grid - 1) + 1
        V = (ph[:S] @ psi[:, q]).real + _sliding_max(V, n_grid)
        vals.append(V)
    s = np.empty(Q, dtype=np.int64)
    s[-1] = int(np.argmax(vals[-1]))
    for q in range(Q - 1, 0, -1):
        lo = max(0, s[q] - n_grid + 1)
        hi = min(s[q], vals[q - 1].shape[0] - 1)
        s[q - 1] = lo + int(np.argmax(vals[q - 1][lo:hi + 1]))
    return np.diff(s, prepend=0)


def chain_optimum(psi, freqs, idx, step, n_grid, wiring):
    """Global grid maximiser of :func:`delay_objective` for one chain.

    Serial groups are solved by dynamic programming over the cumulative
    delay index, parallel TTDs one by one. ``idx`` is overwritten only when
    the optimum strictly beats the current point. Returns the objective.
    """
    psi = np.asarray(psi, dtype=complex)
    freqs = np.asarray(freqs, dtype=float)
    Q = idx.shape[0]
    cur = delay_objective(psi, freqs, idx, step, wiring)
    if wiring == 0:
        grid = np.exp(-2j * np.pi * np.outer(np.arange(n_grid) * step, freqs))
        new = np.argmax((grid @ psi).real, axis=0)
    elif wiring == 1:
        new = _chain_dp(psi, freqs, step, n_grid)
    elif wiring == 2:
        new = _chain_dp(psi[:, ::-1], freqs, step, n_grid)[::-1]
    else:
        h = Q // 2
        new = np.concatenate([_chain_dp(psi[:, :h], freqs, step, n_grid),
                              _chain_dp(psi[:, h:][:, ::-1], freqs, step, n_grid)[::-1]])
    val = delay_objective(psi, freqs, new, step, wiring)
    if val > cur:
        idx[:] = new
        return val
    return cur
