# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled assembly kernel; see ``_kernels_py`` for the reference semantics."""

import numpy as np
cimport numpy as cnp

cnp.import_array()

TRIPLETS_PER_SEGMENT = 28


def assemble_triplets(Py_ssize_t n_nodes, bint closed, double[::1] lengths,
                      double[:, ::1] mnorm, double[:, :, ::1] B, double coef,
                      double[:, ::1] stencil):
    cdef Py_ssize_t n = n_nodes
    cdef Py_ssize_t nseg = lengths.shape[0]
    cdef Py_ssize_t total = nseg * 28
    rows_arr = np.empty(total, dtype=np.int64)
    cols_arr = np.empty(total, dtype=np.int64)
    vals_arr = np.empty(total, dtype=np.float64)
    rhs_arr = np.zeros(3 * n, dtype=np.float64)
    cdef long long[::1] rows = rows_arr
    cdef long long[::1] cols = cols_arr
    cdef double[::1] vals = vals_arr
    cdef double[::1] rhs = rhs_arr
    cdef Py_ssize_t s, a, b, p, d, e, rd, ce
    cdef double inv, hx, hy, w

    for s in range(nseg):
        a = s
        b = s + 1
        if closed and b == n:
            b = 0
        inv = 1.0 / lengths[s]
        hx = 0.5 * mnorm[s, 0]
        hy = 0.5 * mnorm[s, 1]
        p = s * 28

        rows[p] = a; cols[p] = a; vals[p] = coef * hx
        rows[p + 1] = a; cols[p + 1] = n + a; vals[p + 1] = coef * hy
        rows[p + 2] = b; cols[p + 2] = b; vals[p + 2] = coef * hx
        rows[p + 3] = b; cols[p + 3] = n + b; vals[p + 3] = coef * hy

        rows[p + 4] = a; cols[p + 4] = 2 * n + a; vals[p + 4] = inv
        rows[p + 5] = a; cols[p + 5] = 2 * n + b; vals[p + 5] = -inv
        rows[p + 6] = b; cols[p + 6] = 2 * n + a; vals[p + 6] = -inv
        rows[p + 7] = b; cols[p + 7] = 2 * n + b; vals[p + 7] = inv

        rows[p + 8] = n + a; cols[p + 8] = 2 * n + a; vals[p + 8] = hx
        rows[p + 9] = 2 * n + a; cols[p + 9] = 2 * n + a; vals[p + 9] = hy
        rows[p + 10] = n + b; cols[p + 10] = 2 * n + b; vals[p + 10] = hx
        rows[p + 11] = 2 * n + b; cols[p + 11] = 2 * n + b; vals[p + 11] = hy

        p += 12
        for d in range(2):
            rd = (1 + d) * n
            for e in range(2):
                ce = e * n
                w = B[s, d, e] * inv
                rows[p] = rd + b; cols[p] = ce + b; vals[p] = -w
                rows[p + 1] = rd + b; cols[p + 1] = ce + a; vals[p + 1] = w
                rows[p + 2] = rd + a; cols[p + 2] = ce + b; vals[p + 2] = w
                rows[p + 3] = rd + a; cols[p + 3] = ce + a; vals[p + 3] = -w
                p += 4

        rhs[a] += hx * stencil[a, 0] + hy * stencil[a, 1]
        rhs[b] += hx * stencil[b, 0] + hy * stencil[b, 1]

    return rows_arr, cols_arr, vals_arr, rhs_arr
