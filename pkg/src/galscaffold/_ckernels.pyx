# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled convolution kernel; same contract as _kernels_py.conv_pairs."""

import numpy as np
cimport numpy as cnp

from ._kernels_py import row_spans

cnp.import_array()


def conv_pairs(cnp.int64_t[:, :, ::1] A, cnp.int64_t[:, :, ::1] B,
               cnp.int64_t[::1] ia, cnp.int64_t[::1] ib, cnp.int64_t[::1] io,
               Py_ssize_t nrows, Py_ssize_t nout, long long p, low):
    cdef Py_ssize_t f = A.shape[1]
    cdef Py_ssize_t nl = 2 * f - 1
    if nout <= 0 or ia.shape[0] == 0:
        return np.zeros((nrows, f, max(nout, 0)), dtype=np.int64)
    acc_np = np.zeros((nrows, nl, nout), dtype=np.int64)
    cdef cnp.int64_t[:, :, ::1] acc = acc_np
    sa_np, ea_np = row_spans(np.asarray(A))
    sb_np, eb_np = row_spans(np.asarray(B))
    cdef cnp.int64_t[::1] sa = sa_np
    cdef cnp.int64_t[::1] ea = ea_np
    cdef cnp.int64_t[::1] sb = sb_np
    cdef cnp.int64_t[::1] eb = eb_np
    cdef Py_ssize_t k, a, b, o, i, j, u, v, ustop, vstop, s
    cdef long long x
    cdef long long bound = (1LL << 62) // ((p - 1) * (p - 1) + 1)
    cdef long long count
    for k in range(ia.shape[0]):
        a = ia[k]
        b = ib[k]
        o = io[k]
        if ea[a] == 0 or eb[b] == 0 or sa[a] + sb[b] >= nout:
            continue
        for i in range(f):
            for j in range(f):
                ustop = ea[a]
                if ustop > nout - sb[b]:
                    ustop = nout - sb[b]
                for u in range(sa[a], ustop):
                    x = A[a, i, u]
                    if x == 0:
                        continue
                    vstop = eb[b]
                    if vstop > nout - u:
                        vstop = nout - u
                    for v in range(sb[b], vstop):
                        acc[o, i + j, u + v] += x * B[b, j, v]
        # keep accumulators far from overflow on long runs
        if (k & 255) == 255:
            for i in range(nrows):
                for j in range(nl):
                    for u in range(nout):
                        acc[i, j, u] %= p
    from ._kernels_py import reduce_lanes
    return reduce_lanes(acc_np, p, low)
