"""Pure numpy implementation of the assembly kernel.

Mirrors ``_kernels.pyx`` entry for entry: both emit 28 triplets per segment in
the same order, so the summed sparse matrices agree to rounding.
"""

import numpy as np

TRIPLETS_PER_SEGMENT = 28


def assemble_triplets(n_nodes, closed, lengths, mnorm, B, coef, stencil):
    """COO triplets and right-hand side of the saddle system.

    lengths : (N,) segment lengths of the integration curve
    mnorm   : (N, 2) segment normals premultiplied by segment length
    B       : (N, 2, 2) stiffness tensors
    coef    : alpha / dt
    stencil : (n_nodes, 2) known part of the time derivative, A(X) / dt
    """
    n = n_nodes
    nseg = lengths.shape[0]
    a = np.arange(nseg)
    b = (a + 1) % n if closed else a + 1
    inv = 1.0 / lengths
    hm = 0.5 * mnorm
    rows = np.empty((nseg, TRIPLETS_PER_SEGMENT), dtype=np.int64)
    cols = np.empty_like(rows)
    vals = np.empty((nseg, TRIPLETS_PER_SEGMENT))

    def put(k, r, c, v):
        rows[:, k] = r
        cols[:, k] = c
        vals[:, k] = v

    # position-normal coupling in the transport equation
    put(0, a, a, coef * hm[:, 0])
    put(1, a, n + a, coef * hm[:, 1])
    put(2, b, b, coef * hm[:, 0])
    put(3, b, n + b, coef * hm[:, 1])
    # potential stiffness
    put(4, a, 2 * n + a, inv)
    put(5, a, 2 * n + b, -inv)
    put(6, b, 2 * n + a, -inv)
    put(7, b, 2 * n + b, inv)
    # potential-normal coupling in the curvature equation
    put(8, n + a, 2 * n + a, hm[:, 0])
    put(9, 2 * n + a, 2 * n + a, hm[:, 1])
    put(10, n + b, 2 * n + b, hm[:, 0])
    put(11, 2 * n + b, 2 * n + b, hm[:, 1])
    k = 12
    for d in range(2):
        for e in range(2):
            w = B[:, d, e] * inv
            rd, ce = (1 + d) * n, e * n
            put(k, rd + b, ce + b, -w)
            put(k + 1, rd + b, ce + a, w)
            put(k + 2, rd + a, ce + b, w)
            put(k + 3, rd + a, ce + a, -w)
            k += 4

    rhs = np.zeros(3 * n)
    np.add.at(rhs, a, np.einsum("ij,ij->i", hm, stencil[a]))
    np.add.at(rhs, b, np.einsum("ij,ij->i", hm, stencil[b]))
    return rows.ravel(), cols.ravel(), vals.ravel(), rhs
