"""Z/2 column reduction of the triangle-to-edge boundary matrix (numba kernel).

Columns are bitsets over edge ranks stored in uint64 words. Only columns that
end with a pivot are kept; columns reducing to zero are dropped.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _top_bit(w):
    b = 0
    if w >> np.uint64(32):
        w >>= np.uint64(32)
        b += 32
    if w >> np.uint64(16):
        w >>= np.uint64(16)
        b += 16
    if w >> np.uint64(8):
        w >>= np.uint64(8)
        b += 8
    if w >> np.uint64(4):
        w >>= np.uint64(4)
        b += 4
    if w >> np.uint64(2):
        w >>= np.uint64(2)
        b += 2
    if w >> np.uint64(1):
        b += 1
    return b


@njit(cache=True)
def reduce_triangles(e1, e2, e3, n_edges, n_positive):
    """Reduce triangle columns in filtration order.

    ``e1, e2, e3`` hold the edge ranks of each triangle. Stops once
    ``n_positive`` pairs are found (every positive edge has been killed).
    Returns ``(pivot_edge, triangle)`` index arrays of the persistence pairs.
    """
    W = (n_edges + 63) // 64
    owner = np.full(n_edges, -1, np.int64)
    cap = max(n_positive, 1)
    store = np.zeros((cap, W), np.uint64)
    pair_edge = np.empty(cap, np.int64)
    pair_tri = np.empty(cap, np.int64)
    col = np.zeros(W, np.uint64)
    one = np.uint64(1)
    npairs = 0
    for t in range(len(e1)):
        if npairs >= n_positive:
            break
        col[:] = 0
        col[e1[t] >> 6] ^= one << np.uint64(e1[t] & 63)
        col[e2[t] >> 6] ^= one << np.uint64(e2[t] & 63)
        col[e3[t] >> 6] ^= one << np.uint64(e3[t] & 63)
        top = W - 1
        while True:
            while top >= 0 and col[top] == 0:
                top -= 1
            if top < 0:
                break
            p = top * 64 + _top_bit(col[top])
            s = owner[p]
            if s < 0:
                owner[p] = npairs
                store[npairs, :] = col
                pair_edge[npairs] = p
                pair_tri[npairs] = t
                npairs += 1
                break
            for k in range(top + 1):
                col[k] ^= store[s, k]
    return pair_edge[:npairs], pair_tri[:npairs]
