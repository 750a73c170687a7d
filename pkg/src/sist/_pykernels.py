"""Numpy implementations of the hot loops.

Same signatures and bitwise-identical results as the compiled
``sist._ckernels``: every squared-difference sum is built left to right
from 0.0, one element position at a time, so no reduction is reassociated.
"""

import numpy as np

TAU = 1e-12
_CHUNK_ELEMS = 1 << 21


def _rows(row_lo, row_hi, N):
    return row_lo, (N if row_hi < 0 else row_hi)


def _chunks(lo, hi, per_row):
    step = max(1, _CHUNK_ELEMS // max(per_row, 1))
    for a in range(lo, hi, step):
        yield a, min(hi, a + step)


def relaxed_matrix(shapelets, starts, X, left, right, mode, row_lo=0, row_hi=-1, out=None):
    S = np.ascontiguousarray(shapelets, dtype=np.float64)
    starts = np.asarray(starts, dtype=np.int64)
    X = np.ascontiguousarray(X, dtype=np.float64)
    N, k = S.shape
    n, m = X.shape
    lo_row, hi_row = _rows(row_lo, row_hi, N)
    if out is None:
        out = np.empty((N, n), dtype=np.float64)
    kernel = _shifted_block if mode == 0 else _dp_block
    for a, b in _chunks(lo_row, hi_row, n * (k + left + right)):
        out[a:b] = np.sqrt(kernel(S[a:b], starts[a:b], X, left, right))
    return out


def _shifted_block(S, starts, X, left, right):
    N, k = S.shape
    m = X.shape[1]
    offs = np.arange(k)
    best = np.full((N, X.shape[0]), np.inf)
    for shift in range(-left, right + 1):
        pos = starts + shift
        ok = (pos >= 0) & (pos <= m - k)
        if not ok.any():
            continue
        idx = np.clip(pos, 0, m - k)[:, None] + offs
        acc = np.zeros_like(best)
        for p in range(k):
            d = S[:, p, None] - X[:, idx[:, p]].T
            acc = acc + d * d
        acc[~ok] = np.inf
        np.minimum(best, acc, out=best)
    return best


def _dp_block(S, starts, X, left, right):
    N, k = S.shape
    n, m = X.shape
    lo = np.maximum(starts - left, 0)
    hi1 = np.minimum(starts + right, m - k)
    end = np.minimum(starts + k - 1 + right, m - 1)
    width = k + left + right
    w = np.arange(width)
    pos = lo[:, None] + w
    valid = pos <= end[:, None]
    pos = np.minimum(pos, m - 1)
    xs = X[:, pos].transpose(1, 0, 2)  # (N, n, width)
    d = S[:, 0, None, None] - xs
    first_ok = (pos <= hi1[:, None]) & valid
    prev = np.where(first_ok[:, None, :], 0.0 + d * d, np.inf)
    for p in range(1, k):
        run = np.minimum.accumulate(prev, axis=2)
        run = np.concatenate([np.full((N, n, 1), np.inf), run[:, :, :-1]], axis=2)
        d = S[:, p, None, None] - xs
        prev = np.where(valid[:, None, :], run + d * d, np.inf)
    return prev.min(axis=2)


def sliding_min_matrix(shapelets, X, row_lo=0, row_hi=-1, out=None):
    S = np.ascontiguousarray(shapelets, dtype=np.float64)
    X = np.ascontiguousarray(X, dtype=np.float64)
    N, k = S.shape
    n, m = X.shape
    P = m - k + 1
    lo_row, hi_row = _rows(row_lo, row_hi, N)
    if out is None:
        out = np.empty((N, n), dtype=np.float64)
    for a, b in _chunks(lo_row, hi_row, n * P):
        acc = np.zeros((b - a, n, P))
        for p in range(k):
            d = S[a:b, p, None, None] - X[None, :, p:p + P]
            acc = acc + d * d
        out[a:b] = np.sqrt(acc.min(axis=2))
    return out


def all_lengths_sliding_min(src, X, min_len, max_len):
    src = np.ascontiguousarray(src, dtype=np.float64)
    X = np.ascontiguousarray(X, dtype=np.float64)
    m, n = src.shape[0], X.shape[0]
    # acc[i, t, j]: running sum for the window of src at i against X[t] at j
    acc = np.zeros((m, n, m))
    blocks = {}
    for L in range(1, max_len + 1):
        P = m - L + 1
        d = src[L - 1:L - 1 + P, None, None] - X[None, :, L - 1:L - 1 + P]
        acc[:P, :, :P] = acc[:P, :, :P] + d * d
        if L >= min_len:
            blocks[L] = np.sqrt(acc[:P, :, :P].min(axis=2))
    rows = [blocks[L][i] for i in range(m) for L in range(min_len, max_len + 1) if i + L <= m]
    return np.array(rows).reshape(len(rows), n)


def smo(K, y, C, tol, max_epochs):
    K = np.ascontiguousarray(K, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    n = K.shape[0]
    a = np.zeros(n)
    G = -np.ones(n)
    diagK = np.diag(K).copy()
    pos = y > 0
    max_steps = max_epochs * max(n, 1)
    step = 0
    trace = []
    while step < max_steps:
        # working-set selection mirrors the compiled loop, including ">=" ties
        up = np.where(pos, a < C, a > 0)
        score_up = np.where(up, -y * G, -np.inf)
        if not up.any():
            break
        i = n - 1 - int(np.argmax(score_up[::-1]))
        Gmax = score_up[i]
        yi = y[i]
        low = np.where(pos, a > 0, a < C)
        yG = y * G
        Gmax2 = np.max(np.where(low, yG, -np.inf)) if low.any() else -np.inf
        grad_diff = Gmax + yG
        cand = low & (grad_diff > 0)
        if Gmax + Gmax2 < tol or not cand.any():
            break
        quad = diagK[i] + diagK - 2.0 * K[i]
        quad = np.where(quad <= 0, TAU, quad)
        obj = np.where(cand, -(grad_diff * grad_diff) / quad, np.inf)
        j = n - 1 - int(np.argmin(obj[::-1]))
        yj = y[j]
        old_i, old_j = a[i], a[j]
        ai, aj = old_i, old_j
        if yi != yj:
            q = K[i, i] + K[j, j] + 2.0 * (yi * yj * K[i, j])
            q = TAU if q <= 0 else q
            delta = (-G[i] - G[j]) / q
            diff = ai - aj
            ai += delta
            aj += delta
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
            elif ai < 0:
                ai, aj = 0.0, -diff
            if diff > 0:
                if ai > C:
                    ai, aj = C, C - diff
            elif aj > C:
                aj, ai = C, C + diff
        else:
            q = K[i, i] + K[j, j] - 2.0 * (yi * yj * K[i, j])
            q = TAU if q <= 0 else q
            delta = (G[i] - G[j]) / q
            total = ai + aj
            ai -= delta
            aj += delta
            if total > C:
                if ai > C:
                    ai, aj = C, total - C
            elif aj < 0:
                aj, ai = 0.0, total
            if total > C:
                if aj > C:
                    aj, ai = C, total - C
            elif ai < 0:
                ai, aj = 0.0, total
        a[i], a[j] = ai, aj
        G += (yi * y * K[i]) * (ai - old_i) + (yj * y * K[j]) * (aj - old_j)
        step += 1
        if step % n == 0:
            trace.append(_dual(a, G))
    trace.append(_dual(a, G))
    return a, _bias(a, G, y, C), step, trace


def _dual(a, G):
    s = 0.0
    for at, gt in zip(a.tolist(), G.tolist()):
        s += at * (gt - 1.0)
    return 0.5 * s


def _bias(a, G, y, C):
    ub, lb, sum_free, nr_free = np.inf, -np.inf, 0.0, 0
    for at, gt, yt in zip(a.tolist(), G.tolist(), y.tolist()):
        yG = yt * gt
        if at >= C:
            if yt < 0:
                ub = min(ub, yG)
            else:
                lb = max(lb, yG)
        elif at <= 0:
            if yt > 0:
                ub = min(ub, yG)
            else:
                lb = max(lb, yG)
        else:
            nr_free += 1
            sum_free += yG
    if nr_free > 0:
        return -(sum_free / nr_free)
    return -((ub + lb) / 2.0)
