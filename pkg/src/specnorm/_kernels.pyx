# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops.

Every function here has a numpy twin with the same signature in
``_kernels_py``; ``specnorm.kernels`` picks one at import time.
"""

import numpy as np

from libc.math cimport sqrt, acos, M_PI


def girth(const int[:, ::1] adj):
    """Shortest cycle length of a simple graph given as an (n, d) neighbor table.

    Returns 0 when the graph has no cycle.
    """
    cdef Py_ssize_t n = adj.shape[0]
    cdef Py_ssize_t d = adj.shape[1]
    cdef int[::1] dist = np.empty(n, dtype=np.int32)
    cdef int[::1] parent = np.empty(n, dtype=np.int32)
    cdef int[::1] queue = np.empty(n, dtype=np.int32)
    cdef Py_ssize_t src, head, tail, j, i
    cdef int u, v, cyc
    cdef int best = 0x7FFFFFFF
    for src in range(n):
        for i in range(n):
            dist[i] = -1
        dist[src] = 0
        parent[src] = -1
        queue[0] = <int>src
        head = 0
        tail = 1
        while head < tail:
            u = queue[head]
            head += 1
            if 2 * dist[u] + 1 >= best:
                break
            for j in range(d):
                v = adj[u, j]
                if dist[v] < 0:
                    dist[v] = dist[u] + 1
                    parent[v] = u
                    queue[tail] = v
                    tail += 1
                elif v != parent[u]:
                    cyc = dist[u] + dist[v] + 1
                    if cyc < best:
                        best = cyc
    return 0 if best == 0x7FFFFFFF else best


def nbw_counts(const int[:, ::1] adj, const int[::1] rev, int n_max):
    """Non-backtracking walk counts N_k(x, y) for k = 0..n_max.

    ``rev[u*d + j]`` is the flat index of the directed edge reversing
    ``u -> adj[u, j]``. Result has shape (n_max + 1, n, n).
    """
    cdef Py_ssize_t n = adj.shape[0]
    cdef Py_ssize_t d = adj.shape[1]
    cdef Py_ssize_t m = n * d
    out_arr = np.zeros((n_max + 1, n, n), dtype=np.float64)
    cdef double[:, :, ::1] out = out_arr
    cdef double[::1] cur = np.empty(m, dtype=np.float64)
    cdef double[::1] nxt = np.empty(m, dtype=np.float64)
    cdef double[::1] insum = np.empty(n, dtype=np.float64)
    cdef double[::1] tmp
    cdef Py_ssize_t x, e, k, u, j
    for x in range(n):
        out[0, x, x] = 1.0
        if n_max == 0:
            continue
        for e in range(m):
            cur[e] = 0.0
        for j in range(d):
            cur[x * d + j] = 1.0
        for k in range(1, n_max + 1):
            for u in range(n):
                insum[u] = 0.0
            for u in range(n):
                for j in range(d):
                    insum[adj[u, j]] += cur[u * d + j]
            for u in range(n):
                out[k, x, u] = insum[u]
            if k == n_max:
                break
            for u in range(n):
                for j in range(d):
                    e = u * d + j
                    nxt[e] = insum[u] - cur[rev[e]]
            tmp = cur
            cur = nxt
            nxt = tmp
    return out_arr


cdef enum:
    BLOCK = 512


cdef void _legendre_block(int s, const double* x, double* out, double* p0,
                          const double* alpha, const double* beta, Py_ssize_t n) noexcept nogil:
    """out[i] = P_s(x[i]) for i < n; degree loop outside so the point loop vectorizes."""
    cdef Py_ssize_t i
    cdef int l
    cdef double p2
    if s == 0:
        for i in range(n):
            out[i] = 1.0
        return
    for i in range(n):
        p0[i] = 1.0
        out[i] = x[i]
    for l in range(1, s):
        for i in range(n):
            p2 = alpha[l] * x[i] * out[i] - beta[l] * p0[i]
            p0[i] = out[i]
            out[i] = p2


cdef tuple _legendre_coefs(int s):
    l = np.arange(max(s, 1), dtype=np.float64)
    alpha = (2 * l + 1) / (l + 1)
    beta = l / (l + 1)
    return alpha, beta


def legendre(int s, const double[::1] x):
    """Legendre polynomial P_s at each entry of ``x`` (upward recursion)."""
    cdef Py_ssize_t n = x.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    if n == 0:
        return out_arr
    cdef double[::1] out = out_arr
    alpha_arr, beta_arr = _legendre_coefs(s)
    cdef double[::1] alpha = alpha_arr
    cdef double[::1] beta = beta_arr
    cdef double[::1] p0 = np.empty(BLOCK, dtype=np.float64)
    cdef Py_ssize_t i = 0
    with nogil:
        while i < n:
            _legendre_block(s, &x[i], &out[i], &p0[0], &alpha[0], &beta[0], min(<Py_ssize_t>BLOCK, n - i))
            i += BLOCK
    return out_arr


def assoc_legendre_table(int s, const double[::1] x):
    """Fully normalized associated Legendre values at fixed degree.

    Entry (i, m) is the m >= 0 factor of Y_s^m at polar cosine x[i], with the
    Condon-Shortley phase included. Shape (len(x), s + 1).
    """
    cdef Py_ssize_t n = x.shape[0]
    out_arr = np.zeros((n, s + 1), dtype=np.float64)
    if n == 0:
        return out_arr
    cdef double[:, ::1] out = out_arr
    cdef double[::1] st = np.sqrt(np.maximum(0.0, 1.0 - np.square(x)))
    cdef double[::1] pmm = np.full(n, 1.0 / np.sqrt(4.0 * np.pi))
    cdef double[::1] p0 = np.empty(n, dtype=np.float64)
    cdef double[::1] p1 = np.empty(n, dtype=np.float64)
    cdef Py_ssize_t i
    cdef int m, l
    cdef double p2, a, b, c
    with nogil:
        for m in range(0, s + 1):
            if m > 0:
                c = -sqrt((2.0 * m + 1.0) / (2.0 * m))
                for i in range(n):
                    pmm[i] = c * st[i] * pmm[i]
            if m == s:
                for i in range(n):
                    out[i, m] = pmm[i]
                break
            c = sqrt(2.0 * m + 3.0)
            for i in range(n):
                p0[i] = pmm[i]
                p1[i] = c * x[i] * pmm[i]
            for l in range(m + 2, s + 1):
                a = sqrt((4.0 * l * l - 1.0) / (<double>l * l - <double>m * m))
                b = sqrt(((l - 1.0) * (l - 1.0) - <double>m * m)
                         / (4.0 * (l - 1.0) * (l - 1.0) - 1.0))
                for i in range(n):
                    p2 = a * (x[i] * p1[i] - b * p0[i])
                    p0[i] = p1[i]
                    p1[i] = p2
            for i in range(n):
                out[i, m] = p1[i]
    return out_arr


cdef inline double _window(double t, double a, double b) nogil:
    cdef double u
    if t <= a:
        return 1.0
    if t >= b:
        return 0.0
    u = (t - a) / (b - a)
    return 1.0 - u * u * u * (10.0 + u * (-15.0 + 6.0 * u))


def zonal_window_sums(int s, const double[:, ::1] X, const double[:, ::1] C,
                      double a, double b):
    """Sum over centers c of the windowed zonal pieces evaluated at d(x, c).

    Columns of the (len(X), 4) result: full kernel, near piece (window on
    [0, a] ramping to 0 at b), middle residual, antipodal piece.
    """
    cdef Py_ssize_t m = X.shape[0]
    cdef Py_ssize_t k = C.shape[0]
    out_arr = np.zeros((m, 4), dtype=np.float64)
    if m == 0 or k == 0:
        return out_arr
    cdef double[:, ::1] out = out_arr
    cdef double norm = (2.0 * s + 1.0) / (4.0 * M_PI)
    # rows per block so that rows * k pairs fill about one BLOCK buffer
    cdef Py_ssize_t rows = max(1, BLOCK // k)
    cdef Py_ssize_t cap = rows * k
    cdef double[::1] cbuf = np.empty(cap, dtype=np.float64)
    cdef double[::1] zbuf = np.empty(cap, dtype=np.float64)
    cdef double[::1] p0 = np.empty(cap, dtype=np.float64)
    alpha_arr, beta_arr = _legendre_coefs(s)
    cdef double[::1] alpha = alpha_arr
    cdef double[::1] beta = beta_arr
    cdef Py_ssize_t i0 = 0
    cdef Py_ssize_t i, j, r, nr, idx
    cdef double c, t, z, w1, w3
    with nogil:
        while i0 < m:
            nr = min(rows, m - i0)
            for r in range(nr):
                i = i0 + r
                for j in range(k):
                    c = X[i, 0] * C[j, 0] + X[i, 1] * C[j, 1] + X[i, 2] * C[j, 2]
                    if c > 1.0:
                        c = 1.0
                    elif c < -1.0:
                        c = -1.0
                    cbuf[r * k + j] = c
            _legendre_block(s, &cbuf[0], &zbuf[0], &p0[0], &alpha[0], &beta[0], nr * k)
            for r in range(nr):
                i = i0 + r
                for j in range(k):
                    idx = r * k + j
                    t = acos(cbuf[idx])
                    z = norm * zbuf[idx]
                    w1 = _window(t, a, b)
                    w3 = _window(M_PI - t, a, b)
                    out[i, 0] += z
                    out[i, 1] += w1 * z
                    out[i, 3] += w3 * z
                out[i, 2] = out[i, 0] - out[i, 1] - out[i, 3]
            i0 += rows
    return out_arr
