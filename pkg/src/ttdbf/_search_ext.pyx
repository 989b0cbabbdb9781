# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled TTD grid coordinate descent, same interface as ``ttdbf._search``.

The grid scan walks each subcarrier phasor by a fixed rotation per step
instead of calling exp for every (grid point, subcarrier) pair.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport M_PI, fabs, cos, sin

cnp.import_array()


cdef inline double complex _expj(double x) noexcept nogil:
    return cos(x) + 1j * sin(x)


cdef inline void _bounds(int q, int Q, int wiring, int* lo, int* hi) noexcept nogil:
    cdef int h
    if wiring == 0:
        lo[0] = q; hi[0] = q + 1
    elif wiring == 1:
        lo[0] = q; hi[0] = Q
    elif wiring == 2:
        lo[0] = 0; hi[0] = q + 1
    else:
        h = Q // 2
        if q < h:
            lo[0] = q; hi[0] = h
        else:
            lo[0] = h; hi[0] = q + 1


cdef void _cumulate(const long long[:] idx, double step, int wiring, double[:] out) noexcept nogil:
    cdef int Q = idx.shape[0]
    cdef int q, h
    cdef double acc
    if wiring == 0:
        for q in range(Q):
            out[q] = idx[q] * step
    elif wiring == 1:
        acc = 0.0
        for q in range(Q):
            acc += idx[q] * step
            out[q] = acc
    elif wiring == 2:
        acc = 0.0
        for q in range(Q - 1, -1, -1):
            acc += idx[q] * step
            out[q] = acc
    else:
        h = Q // 2
        acc = 0.0
        for q in range(h):
            acc += idx[q] * step
            out[q] = acc
        acc = 0.0
        for q in range(Q - 1, h - 1, -1):
            acc += idx[q] * step
            out[q] = acc


cdef double _objective(const double complex[:, :] psi, const double[:] freqs,
                       double[:] t) noexcept nogil:
    cdef int M = psi.shape[0], Q = psi.shape[1]
    cdef int m, q
    cdef double s = 0.0
    for m in range(M):
        for q in range(Q):
            s += (psi[m, q] * _expj(-2 * M_PI * freqs[m] * t[q])).real
    return s


def delay_objective(psi, freqs, idx, double step, int wiring):
    cdef double complex[:, :] p = np.ascontiguousarray(psi, dtype=np.complex128)
    cdef double[:] f = np.ascontiguousarray(freqs, dtype=np.float64)
    cdef long long[:] ix = np.ascontiguousarray(idx, dtype=np.int64)
    cdef double[:] t = np.empty(ix.shape[0])
    _cumulate(ix, step, wiring, t)
    return _objective(p, f, t)


def coordinate_descent(psi, freqs, long long[:] idx, double step, int n_grid,
                       int wiring, double tol, int max_sweeps):
    cdef double complex[:, :] p = np.ascontiguousarray(psi, dtype=np.complex128)
    cdef double[:] f = np.ascontiguousarray(freqs, dtype=np.float64)
    cdef int M = p.shape[0], Q = p.shape[1]
    cdef double[:] t = np.empty(Q)
    cdef double complex[:] rot = np.empty(M, dtype=np.complex128)
    cdef double complex[:] z = np.empty(M, dtype=np.complex128)
    cdef int m, q, qq, u, lo = 0, hi = 0, best_u, sweeps = 0
    cdef double val, best, cur, obj, new, tq
    cdef bint moved
    cdef double complex acc

    for m in range(M):
        rot[m] = _expj(-2 * M_PI * f[m] * step)
    _cumulate(idx, step, wiring, t)
    obj = _objective(p, f, t)

    with nogil:
        while sweeps < max_sweeps:
            sweeps += 1
            moved = False
            for q in range(Q):
                _bounds(q, Q, wiring, &lo, &hi)
                _cumulate(idx, step, wiring, t)
                tq = idx[q] * step
                for m in range(M):
                    acc = 0.0
                    for qq in range(lo, hi):
                        acc = acc + p[m, qq] * _expj(-2 * M_PI * f[m] * (t[qq] - tq))
                    z[m] = acc
                # exact value at the current grid point
                cur = 0.0
                for m in range(M):
                    cur += (z[m] * _expj(-2 * M_PI * f[m] * tq)).real
                best = cur
                best_u = idx[q]
                for u in range(n_grid):
                    val = 0.0
                    for m in range(M):
                        val += z[m].real
                        z[m] = z[m] * rot[m]
                    if val > best and u != idx[q]:
                        best = val
                        best_u = u
                if best_u != idx[q]:
                    idx[q] = best_u
                    moved = True
            _cumulate(idx, step, wiring, t)
            new = _objective(p, f, t)
            val = new - obj
            obj = new
            if not moved or val <= tol * fabs(obj):
                break
    return sweeps, obj


cdef void _tone_values(const double complex[:, :] p, int q, const double[:] f, double step,
                       int count, double[:] out) noexcept nogil:
    # out[s] = Re sum_m p[m, q] exp(-j 2 pi f_m s step), rotated in place and
    # re-seeded exactly every 256 steps to bound the drift
    cdef int M = p.shape[0]
    cdef int m, s
    cdef double acc
    cdef double complex z, r
    for s in range(count):
        out[s] = 0.0
    for m in range(M):
        r = _expj(-2 * M_PI * f[m] * step)
        z = p[m, q]
        for s in range(count):
            if (s & 255) == 0:
                z = p[m, q] * _expj(-2 * M_PI * f[m] * s * step)
            out[s] += z.real
            z = z * r


cdef void _chain_dp(const double complex[:, :] p, const double[:] f, double step, int U,
                    int q0, int n, int reverse, double[:, :] V, long long[:] dq,
                    long long[:] raw) noexcept nogil:
    # exact forward-chain maximiser over the n columns starting at q0
    # (visited back to front when reverse is set); raw delays written to raw[q0:q0+n]
    cdef int j, col, s, S, prevS, head, tail, lo, hi, k
    cdef long long best_s, cur_s, nxt
    cdef double best
    for j in range(n):
        col = q0 + (n - 1 - j if reverse else j)
        S = (j + 1) * (U - 1) + 1
        _tone_values(p, col, f, step, S, V[j])
        if j == 0:
            continue
        prevS = j * (U - 1) + 1
        # monotone deque of indices into V[j-1] with decreasing values
        head = 0
        tail = 0
        k = 0
        for s in range(S):
            if k <= s and k < prevS:
                while tail > head and V[j - 1, dq[tail - 1]] <= V[j - 1, k]:
                    tail -= 1
                dq[tail] = k
                tail += 1
                k += 1
            while dq[head] < s - U + 1:
                head += 1
            V[j, s] += V[j - 1, dq[head]]
    S = n * (U - 1) + 1
    best_s = 0
    best = V[n - 1, 0]
    for s in range(1, S):
        if V[n - 1, s] > best:
            best = V[n - 1, s]
            best_s = s
    cur_s = best_s
    for j in range(n - 1, 0, -1):
        lo = cur_s - U + 1
        if lo < 0:
            lo = 0
        hi = cur_s
        if hi > j * (U - 1):
            hi = j * (U - 1)
        nxt = lo
        best = V[j - 1, lo]
        for s in range(lo + 1, hi + 1):
            if V[j - 1, s] > best:
                best = V[j - 1, s]
                nxt = s
        col = q0 + (n - 1 - j if reverse else j)
        raw[col] = cur_s - nxt
        cur_s = nxt
    col = q0 + (n - 1 if reverse else 0)
    raw[col] = cur_s


def chain_optimum(psi, freqs, long long[:] idx, double step, int n_grid, int wiring):
    cdef double complex[:, :] p = np.ascontiguousarray(psi, dtype=np.complex128)
    cdef double[:] f = np.ascontiguousarray(freqs, dtype=np.float64)
    cdef int M = p.shape[0], Q = p.shape[1]
    cdef int q, u, h
    cdef double[:] t = np.empty(Q)
    cdef double[:] row
    cdef long long[:] new = np.zeros(Q, dtype=np.int64)
    cdef double[:, :] V
    cdef long long[:] dq
    cdef double cur, val, best
    _cumulate(idx, step, wiring, t)
    cur = _objective(p, f, t)
    if wiring == 0:
        row = np.empty(n_grid)
        for q in range(Q):
            _tone_values(p, q, f, step, n_grid, row)
            best = row[0]
            new[q] = 0
            for u in range(1, n_grid):
                if row[u] > best:
                    best = row[u]
                    new[q] = u
    else:
        V = np.empty((Q, Q * (n_grid - 1) + 1))
        dq = np.empty(Q * (n_grid - 1) + 1, dtype=np.int64)
        with nogil:
            if wiring == 1:
                _chain_dp(p, f, step, n_grid, 0, Q, 0, V, dq, new)
            elif wiring == 2:
                _chain_dp(p, f, step, n_grid, 0, Q, 1, V, dq, new)
            else:
                h = Q // 2
                _chain_dp(p, f, step, n_grid, 0, h, 0, V, dq, new)
                _chain_dp(p, f, step, n_grid, h, Q - h, 1, V, dq, new)
    _cumulate(new, step, wiring, t)
    val = _objective(p, f, t)
    if val > cur:
        for q in range(Q):
            idx[q] = new[q]
        return val
    return cur
