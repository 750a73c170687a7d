# cython: language_level=3
"""Compiled inner loops.

Signatures mirror ``sist._pykernels``. Squared differences are accumulated
left to right starting from 0.0, exactly as the numpy fallback does, so both
backends produce bitwise identical distances.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, INFINITY

cnp.import_array()

cdef double TAU = 1e-12


cdef inline double _window_sq(const double* s, const double* x, Py_ssize_t k,
                              double cutoff) noexcept nogil:
    cdef double acc = 0.0, d
    cdef Py_ssize_t p
    for p in range(k):
        d = s[p] - x[p]
        acc = acc + d * d
        if acc > cutoff:
            return acc
    return acc


cdef double _shifted(const double* s, Py_ssize_t k, const double* x, Py_ssize_t m,
                     Py_ssize_t j0, Py_ssize_t left, Py_ssize_t right) noexcept nogil:
    cdef Py_ssize_t lo = j0 - left, hi = j0 + right, i
    cdef double best = INFINITY, acc
    if lo < 0:
        lo = 0
    if hi > m - k:
        hi = m - k
    for i in range(lo, hi + 1):
        acc = _window_sq(s, x + i, k, best)
        if acc < best:
            best = acc
    return best


cdef double _subsequence_dp(const double* s, Py_ssize_t k, const double* x, Py_ssize_t m,
                            Py_ssize_t j0, Py_ssize_t left, Py_ssize_t right,
                            double* prev, double* cur) noexcept nogil:
    # prev/cur are scratch rows of length >= k + left + right
    cdef Py_ssize_t lo = j0 - left, hi1 = j0 + right, end = j0 + k - 1 + right
    cdef Py_ssize_t w, width, p
    cdef double run, d, best
    if lo < 0:
        lo = 0
    if hi1 > m - k:
        hi1 = m - k
    if end > m - 1:
        end = m - 1
    width = end - lo + 1
    for w in range(width):
        if lo + w <= hi1:
            d = s[0] - x[lo + w]
            prev[w] = 0.0 + d * d
        else:
            prev[w] = INFINITY
    for p in range(1, k):
        run = INFINITY
        for w in range(width):
            if run < INFINITY:
                d = s[p] - x[lo + w]
                cur[w] = run + d * d
            else:
                cur[w] = INFINITY
            if prev[w] < run:
                run = prev[w]
        for w in range(width):
            prev[w] = cur[w]
    best = INFINITY
    for w in range(width):
        if prev[w] < best:
            best = prev[w]
    return best


def relaxed_matrix(const double[:, ::1] shapelets, const cnp.int64_t[::1] starts,
                   const double[:, ::1] X, Py_ssize_t left, Py_ssize_t right,
                   int mode, Py_ssize_t row_lo=0, Py_ssize_t row_hi=-1, out=None):
    """Distances ``(N, n)`` from each placed shapelet to each series.

    ``mode`` 0 is the contiguous shifted window, 1 the subsequence DP.
    ``left == right == 0`` with mode 0 is the plain fixed distance.
    """
    cdef Py_ssize_t N = shapelets.shape[0], n = X.shape[0], m = X.shape[1]
    cdef Py_ssize_t c, t, k = shapelets.shape[1]
    if row_hi < 0:
        row_hi = N
    if out is None:
        out = np.empty((N, n), dtype=np.float64)
    cdef double[:, ::1] D = out
    cdef double[::1] prev = np.empty(k + left + right + 1, dtype=np.float64)
    cdef double[::1] cur = np.empty(k + left + right + 1, dtype=np.float64)
    cdef const double* S0 = &shapelets[0, 0] if N > 0 and k > 0 else NULL
    cdef const double* X0 = &X[0, 0] if n > 0 and m > 0 else NULL
    with nogil:
        for c in range(row_lo, row_hi):
            for t in range(n):
                if mode == 0:
                    D[c, t] = sqrt(_shifted(S0 + c * k, k, X0 + t * m, m, starts[c], left, right))
                else:
                    D[c, t] = sqrt(_subsequence_dp(S0 + c * k, k, X0 + t * m, m, starts[c],
                                                   left, right, &prev[0], &cur[0]))
    return out


def sliding_min_matrix(const double[:, ::1] shapelets, const double[:, ::1] X,
                       Py_ssize_t row_lo=0, Py_ssize_t row_hi=-1, out=None):
    """Minimum window distance ``(N, n)`` with early abandon."""
    cdef Py_ssize_t N = shapelets.shape[0], n = X.shape[0], m = X.shape[1]
    cdef Py_ssize_t k = shapelets.shape[1], c, t, i
    cdef double best, acc
    if row_hi < 0:
        row_hi = N
    if out is None:
        out = np.empty((N, n), dtype=np.float64)
    cdef double[:, ::1] D = out
    cdef const double* S0 = &shapelets[0, 0] if N > 0 and k > 0 else NULL
    cdef const double* X0 = &X[0, 0] if n > 0 and m > 0 else NULL
    cdef const double* s
    cdef const double* x
    with nogil:
        for c in range(row_lo, row_hi):
            s = S0 + c * k
            for t in range(n):
                x = X0 + t * m
                best = INFINITY
                for i in range(m - k + 1):
                    acc = _window_sq(s, x + i, k, best)
                    if acc < best:
                        best = acc
                D[c, t] = sqrt(best)
    return out


def all_lengths_sliding_min(const double[::1] src, const double[:, ::1] X,
                            Py_ssize_t min_len, Py_ssize_t max_len):
    """Sliding-min distances of every window of ``src`` with length in
    ``[min_len, max_len]`` to every row of ``X``.

    Rows are ordered by (start, length). Window sums for length ``L + 1``
    extend those for ``L`` by one term, so each sum is built left to right
    from 0.0 exactly as in :func:`sliding_min_matrix`, without abandoning.
    """
    cdef Py_ssize_t m = src.shape[0], n = X.shape[0], i, L, j, t, row, rows = 0
    cdef double best, d, sv
    for i in range(m):
        for L in range(min_len, max_len + 1):
            if i + L <= m:
                rows += 1
    out = np.empty((rows, n), dtype=np.float64)
    cdef double[:, ::1] D = out
    cdef double[::1] acc = np.empty(m, dtype=np.float64)
    with nogil:
        for t in range(n):
            row = 0
            for i in range(m):
                for j in range(m):
                    acc[j] = 0.0
                for L in range(1, max_len + 1):
                    if i + L > m:
                        break
                    sv = src[i + L - 1]
                    best = INFINITY
                    for j in range(m - L + 1):
                        d = sv - X[t, j + L - 1]
                        acc[j] = acc[j] + d * d
                        if acc[j] < best:
                            best = acc[j]
                    if L >= min_len:
                        D[row, t] = sqrt(best)
                        row += 1
    return out


def smo(const double[:, ::1] K, const double[::1] y, double C, double tol,
        Py_ssize_t max_epochs):
    """Linear-kernel C-SVC dual by SMO with second-order working-set selection.

    Returns ``(alpha, b, steps, dual_trace)``; ``dual_trace`` holds the dual
    objective ``0.5 a'Qa - sum(a)`` after every epoch of ``n`` steps.
    """
    cdef Py_ssize_t n = K.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] alpha_arr = np.zeros(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] G_arr = -np.ones(n)
    cdef double[::1] a = alpha_arr
    cdef double[::1] G = G_arr
    cdef Py_ssize_t i, j, t, step = 0, max_steps = max_epochs * (n if n > 0 else 1)
    cdef double Gmax, Gmax2, obj_min, grad_diff, quad, obj, yi, yj
    cdef double old_i, old_j, delta, diff, total, Qit, Qjt, dai, daj
    trace = []
    while step < max_steps:
        Gmax = -INFINITY
        i = -1
        for t in range(n):
            if y[t] > 0:
                if a[t] < C and -G[t] >= Gmax:
                    Gmax = -G[t]
                    i = t
            else:
                if a[t] > 0 and G[t] >= Gmax:
                    Gmax = G[t]
                    i = t
        if i < 0:
            break
        yi = y[i]
        Gmax2 = -INFINITY
        obj_min = INFINITY
        j = -1
        for t in range(n):
            if y[t] > 0:
                if a[t] > 0:
                    grad_diff = Gmax + G[t]
                    if G[t] >= Gmax2:
                        Gmax2 = G[t]
                    if grad_diff > 0:
                        quad = K[i, i] + K[t, t] - 2.0 * K[i, t]
                        if quad <= 0:
                            quad = TAU
                        obj = -(grad_diff * grad_diff) / quad
                        if obj <= obj_min:
                            j = t
                            obj_min = obj
            else:
                if a[t] < C:
                    grad_diff = Gmax - G[t]
                    if -G[t] >= Gmax2:
                        Gmax2 = -G[t]
                    if grad_diff > 0:
                        quad = K[i, i] + K[t, t] - 2.0 * K[i, t]
                        if quad <= 0:
                            quad = TAU
                        obj = -(grad_diff * grad_diff) / quad
                        if obj <= obj_min:
                            j = t
                            obj_min = obj
        if Gmax + Gmax2 < tol or j < 0:
            break
        yj = y[j]
        old_i = a[i]
        old_j = a[j]
        if yi != yj:
            quad = K[i, i] + K[j, j] + 2.0 * (yi * yj * K[i, j])
            if quad <= 0:
                quad = TAU
            delta = (-G[i] - G[j]) / quad
            diff = a[i] - a[j]
            a[i] += delta
            a[j] += delta
            if diff > 0:
                if a[j] < 0:
                    a[j] = 0
                    a[i] = diff
            else:
                if a[i] < 0:
                    a[i] = 0
                    a[j] = -diff
            if diff > 0:
                if a[i] > C:
                    a[i] = C
                    a[j] = C - diff
            else:
                if a[j] > C:
                    a[j] = C
                    a[i] = C + diff
        else:
            quad = K[i, i] + K[j, j] - 2.0 * (yi * yj * K[i, j])
            if quad <= 0:
                quad = TAU
            delta = (G[i] - G[j]) / quad
            total = a[i] + a[j]
            a[i] -= delta
            a[j] += delta
            if total > C:
                if a[i] > C:
                    a[i] = C
                    a[j] = total - C
            else:
                if a[j] < 0:
                    a[j] = 0
                    a[i] = total
            if total > C:
                if a[j] > C:
                    a[j] = C
                    a[i] = total - C
            else:
                if a[i] < 0:
                    a[i] = 0
                    a[j] = total
        dai = a[i] - old_i
        daj = a[j] - old_j
        for t in range(n):
            Qit = yi * y[t] * K[i, t]
            Qjt = yj * y[t] * K[j, t]
            G[t] += Qit * dai + Qjt * daj
        step += 1
        if step % n == 0:
            trace.append(_dual(a, G))
    trace.append(_dual(a, G))
    return alpha_arr, _bias(a, G, y, C), step, trace


cdef double _dual(double[::1] a, double[::1] G):
    cdef double s = 0.0
    cdef Py_ssize_t t
    for t in range(a.shape[0]):
        s += a[t] * (G[t] - 1.0)
    return 0.5 * s


cdef double _bias(double[::1] a, double[::1] G, const double[::1] y, double C):
    cdef double ub = INFINITY, lb = -INFINITY, sum_free = 0.0, yG
    cdef Py_ssize_t t, nr_free = 0
    for t in range(a.shape[0]):
        yG = y[t] * G[t]
        if a[t] >= C:
            if y[t] < 0:
                ub = min(ub, yG)
            else:
                lb = max(lb, yG)
        elif a[t] <= 0:
            if y[t] > 0:
                ub = min(ub, yG)
            else:
                lb = max(lb, yG)
        else:
            nr_free += 1
            sum_free += yG
    if nr_free > 0:
        return -(sum_free / nr_free)
    return -((ub + lb) / 2.0)
