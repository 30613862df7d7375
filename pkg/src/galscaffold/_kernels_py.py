"""Pure numpy implementation of the convolution kernels."""

from __future__ import annotations

import numpy as np


def row_spans(A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """First and one-past-last nonzero t-index of every row of a (M, f, N) array."""
    n = A.shape[2]
    if n == 0:
        zeros = np.zeros(A.shape[0], dtype=np.int64)
        return zeros, zeros.copy()
    nz = A.any(axis=1)
    has = nz.any(axis=1)
    start = np.where(has, nz.argmax(axis=1), 0)
    stop = np.where(has, n - nz[:, ::-1].argmax(axis=1), 0)
    return start.astype(np.int64), stop.astype(np.int64)


def reduce_lanes(acc: np.ndarray, p: int, low) -> np.ndarray:
    """Fold (rows, 2f-1, n) product lanes into (rows, f, n) modulo p and the modulus."""
    f = len(low)
    acc %= p
    for k in range(2 * f - 2, f - 1, -1):
        c = acc[:, k, :]
        for l in range(f):
            if low[l]:
                acc[:, k - f + l, :] -= low[l] * c
        acc %= p
    return np.ascontiguousarray(acc[:, :f, :])


def conv_pairs(A, B, ia, ib, io, nrows, nout, p, low):
    """out[io[k]] += A[ia[k]] * B[ib[k]] (t-convolution truncated to nout terms, F_q product)."""
    f = A.shape[1]
    acc = np.zeros((nrows, 2 * f - 1, nout), dtype=np.int64)
    if nout <= 0 or len(ia) == 0:
        return np.zeros((nrows, f, max(nout, 0)), dtype=np.int64)
    sa, ea = row_spans(A)
    sb, eb = row_spans(B)
    for a, b, o in zip(ia.tolist(), ib.tolist(), io.tolist()):
        s = sa[a] + sb[b]
        if s >= nout or ea[a] == 0 or eb[b] == 0:
            continue
        xa = A[a, :, sa[a]:min(ea[a], nout - sb[b])]
        xb = B[b, :, sb[b]:min(eb[b], nout - sa[a])]
        for i in range(f):
            ai = xa[i]
            if not ai.any():
                continue
            for j in range(f):
                c = np.convolve(ai, xb[j])
                m = min(len(c), nout - s)
                acc[o, i + j, s:s + m] += c[:m]
    return reduce_lanes(acc, p, low)
