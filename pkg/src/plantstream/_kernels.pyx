# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled graph kernels (bitmask search, subset DP, sampled density)."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint32_t, uint64_t, int64_t

cnp.import_array()

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil


cdef inline int popc(uint64_t x) noexcept nogil:
    return __builtin_popcountll(x)


cdef struct Search:
    int n
    int best
    uint64_t best_s
    uint64_t best_r


cdef void _dfs(Search* st, const uint64_t* adj, int start, uint64_t smask, int ssize,
               uint64_t common) noexcept nogil:
    cdef int c = popc(common)
    cdef int val = ssize if ssize < c else c
    cdef int v
    cdef uint64_t nc
    if val > st.best:
        st.best = val
        st.best_s = smask
        st.best_r = common
    for v in range(start, st.n):
        if ssize + 1 + (st.n - v - 1) <= st.best:
            break
        nc = common & adj[v]
        if popc(nc) <= st.best:
            continue
        _dfs(st, adj, v + 1, smask | ((<uint64_t>1) << v), ssize + 1, nc)


def max_biclique(adj_masks, int n):
    """Largest k with |S| = |R| = k and S x R inside the adjacency relation."""
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] adj = np.ascontiguousarray(adj_masks, dtype=np.uint64)
    cdef Search st
    st.n = n
    st.best = 0
    st.best_s = 0
    st.best_r = 0
    cdef uint64_t full = ((<uint64_t>1) << n) - 1 if n < 64 else <uint64_t>0xFFFFFFFFFFFFFFFF
    with nogil:
        _dfs(&st, <const uint64_t*> adj.data, 0, 0, 0, full)
    return st.best, int(st.best_s), int(st.best_r)


def densest_subset(adj_masks, loops, int n, int beta):
    """Exact max |E(H)|/|H| over 1 <= |H| <= beta via a DP over all subsets.

    Returns (edges, size, mask) of a maximiser.
    """
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] adj = np.ascontiguousarray(adj_masks, dtype=np.uint64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] lp = np.ascontiguousarray(loops, dtype=np.int64)
    cdef int64_t total = (<int64_t>1) << n
    cdef cnp.ndarray[cnp.int32_t, ndim=1] e = np.zeros(total, dtype=np.int32)
    cdef int64_t m, rest
    cdef int low, size
    cdef int64_t best_e = 0, best_h = 1, best_m = 0
    cdef int first = 1
    with nogil:
        for m in range(1, total):
            low = 0
            while not ((m >> low) & 1):
                low += 1
            rest = m & (m - 1)
            e[m] = e[rest] + popc(adj[low] & <uint64_t>rest) + lp[low]
            size = popc(<uint64_t>m)
            if size > beta:
                continue
            if first or e[m] * best_h > best_e * size:
                best_e = e[m]
                best_h = size
                best_m = m
                first = 0
    return int(best_e), int(best_h), int(best_m)


def sampled_densest(cnp.uint8_t[:, ::1] A, cnp.int64_t[::1] sizes, cnp.float64_t[:, ::1] u):
    """Best density over random vertex subsets.

    Sample s takes ``sizes[s]`` vertices by a partial Fisher-Yates shuffle
    driven by the uniforms ``u[s]``; loops (diagonal ones) count as edges.
    Returns (edges, size, subset) of the best sample.
    """
    cdef int n = A.shape[0]
    cdef int S = sizes.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] perm_arr = np.arange(n, dtype=np.int64)
    cdef cnp.int64_t[::1] perm = perm_arr
    cdef cnp.ndarray[cnp.int64_t, ndim=1] keep_arr = np.zeros(n, dtype=np.int64)
    cdef cnp.int64_t[::1] keep = keep_arr
    cdef int s, i, j, h, a, b, tmp
    cdef int64_t edges, best_e = -1, best_h = 1, best_s = -1
    with nogil:
        for s in range(S):
            h = sizes[s]
            for i in range(h):
                j = i + <int>(u[s, i] * (n - i))
                if j >= n:
                    j = n - 1
                tmp = perm[i]
                perm[i] = perm[j]
                perm[j] = tmp
            edges = 0
            for i in range(h):
                a = perm[i]
                edges += A[a, a]
                for j in range(i + 1, h):
                    b = perm[j]
                    edges += A[a, b]
            if best_s < 0 or edges * best_h > best_e * h:
                best_e = edges
                best_h = h
                best_s = s
                for i in range(h):
                    keep[i] = perm[i]
    return int(best_e), int(best_h), np.sort(keep_arr[:best_h])
