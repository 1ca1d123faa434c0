"""Pure-Python versions of the compiled graph kernels (same signatures)."""

import numpy as np


def max_biclique(adj_masks, n):
    adj = [int(a) for a in adj_masks]
    best = [0, 0, 0]

    def dfs(start, smask, ssize, common):
        c = bin(common).count("1")
        val = min(ssize, c)
        if val > best[0]:
            best[:] = [val, smask, common]
        for v in range(start, n):
            if ssize + 1 + (n - v - 1) <= best[0]:
                break
            nc = common & adj[v]
            if bin(nc).count("1") <= best[0]:
                continue
            dfs(v + 1, smask | (1 << v), ssize + 1, nc)

    dfs(0, 0, 0, (1 << n) - 1)
    return best[0], best[1], best[2]


def densest_subset(adj_masks, loops, n, beta):
    adj = np.asarray(adj_masks, dtype=np.int64)
    lp = np.asarray(loops, dtype=np.int64)
    e = np.zeros(1, dtype=np.int64)
    for b in range(n):
        # subsets whose highest element is b, built from all subsets of {0..b-1}
        prev = np.arange(1 << b, dtype=np.int64)
        add = np.bitwise_count(prev & adj[b]).astype(np.int64) + lp[b]
        e = np.concatenate([e, e + add])
    sizes = np.bitwise_count(np.arange(1 << n, dtype=np.int64)).astype(np.int64)
    best = None
    for h in range(1, min(beta, n) + 1):
        idx = np.flatnonzero(sizes == h)
        m = int(idx[np.argmax(e[idx])])
        if best is None or e[m] * sizes[best] > e[best] * h:
            best = m
    return int(e[best]), int(sizes[best]), int(best)


def sampled_densest(A, sizes, u):
    n = A.shape[0]
    perm = np.arange(n)
    best_e, best_h, best_s, keep = -1, 1, -1, None
    for s in range(len(sizes)):
        h = int(sizes[s])
        for i in range(h):
            j = min(n - 1, i + int(u[s, i] * (n - i)))
            perm[i], perm[j] = perm[j], perm[i]
        H = perm[:h]
        sub = A[np.ix_(H, H)]
        edges = int(np.triu(sub, 1).sum() + np.trace(sub))
        if best_s < 0 or edges * best_h > best_e * h:
            best_e, best_h, best_s, keep = edges, h, s, H.copy()
    return best_e, best_h, np.sort(keep)
