"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``."""

from collections import deque

import numpy as np


def girth(adj):
    adj = np.asarray(adj)
    n = adj.shape[0]
    nbrs = adj.tolist()
    best = np.iinfo(np.int32).max
    for src in range(n):
        dist = [-1] * n
        parent = [-1] * n
        dist[src] = 0
        queue = deque([src])
        while queue:
            u = queue.popleft()
            if 2 * dist[u] + 1 >= best:
                break
            for v in nbrs[u]:
                if dist[v] < 0:
                    dist[v] = dist[u] + 1
                    parent[v] = u
                    queue.append(v)
                elif v != parent[u]:
                    best = min(best, dist[u] + dist[v] + 1)
    return 0 if best == np.iinfo(np.int32).max else int(best)


def nbw_counts(adj, rev, n_max):
    adj = np.asarray(adj)
    rev = np.asarray(rev)
    n, d = adj.shape
    m = n * d
    tails = np.repeat(np.arange(n), d)
    heads = adj.reshape(-1)
    # incidence (directed edge -> head vertex)
    inc = np.zeros((m, n))
    inc[np.arange(m), heads] = 1.0
    out = np.zeros((n_max + 1, n, n))
    out[0] = np.eye(n)
    if n_max == 0:
        return out
    cur = np.zeros((n, m))
    cur[tails, np.arange(m)] = 1.0
    for k in range(1, n_max + 1):
        insum = cur @ inc
        out[k] = insum
        if k < n_max:
            cur = insum[:, tails] - cur[:, rev]
    return out


def legendre(s, x):
    x = np.asarray(x, dtype=np.float64)
    if s == 0:
        return np.ones_like(x)
    p0 = np.ones_like(x)
    p1 = x.copy()
    for l in range(1, s):
        p0, p1 = p1, ((2 * l + 1) * x * p1 - l * p0) / (l + 1)
    return p1


def assoc_legendre_table(s, x):
    x = np.asarray(x, dtype=np.float64)
    st = np.sqrt(np.maximum(0.0, 1.0 - x * x))
    out = np.zeros((x.size, s + 1))
    pmm = np.full(x.size, 1.0 / np.sqrt(4.0 * np.pi))
    for m in range(s + 1):
        if m > 0:
            pmm = -np.sqrt((2.0 * m + 1.0) / (2.0 * m)) * st * pmm
        if m == s:
            out[:, m] = pmm
            break
        p0 = pmm
        p1 = np.sqrt(2.0 * m + 3.0) * x * pmm
        for l in range(m + 2, s + 1):
            a = np.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
            b = np.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1.0) ** 2 - 1.0))
            p0, p1 = p1, a * (x * p1 - b * p0)
        out[:, m] = p1
    return out


def _window(t, a, b):
    if b <= a:
        return (t <= a).astype(np.float64)
    u = np.clip((t - a) / (b - a), 0.0, 1.0)
    return 1.0 - u**3 * (10.0 + u * (-15.0 + 6.0 * u))


def zonal_window_sums(s, X, C, a, b, chunk=1 << 21):
    X = np.ascontiguousarray(X, dtype=np.float64)
    C = np.ascontiguousarray(C, dtype=np.float64)
    out = np.zeros((X.shape[0], 4))
    norm = (2 * s + 1) / (4 * np.pi)
    rows = max(1, chunk // max(1, C.shape[0]))
    for start in range(0, X.shape[0], rows):
        c = np.clip(X[start:start + rows] @ C.T, -1.0, 1.0)
        t = np.arccos(c)
        z = norm * legendre(s, c.ravel()).reshape(c.shape)
        z1 = _window(t, a, b) * z
        z3 = _window(np.pi - t, a, b) * z
        blk = out[start:start + rows]
        blk[:, 0] = z.sum(axis=1)
        blk[:, 1] = z1.sum(axis=1)
        blk[:, 3] = z3.sum(axis=1)
        blk[:, 2] = blk[:, 0] - blk[:, 1] - blk[:, 3]
    return out
