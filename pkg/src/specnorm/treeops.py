"""Adjacency, sphere-averaging and Chebyshev propagator operators.

All operators are dense symmetric matrices indexed by vertex, acting on
functions with the counting measure.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from . import kernels
from .errors import OddIndex
from .graphs import RegularGraph


def adjacency_op(g: RegularGraph) -> np.ndarray:
    """T_q = A / sqrt(q)."""
    return g.adjacency_matrix() / np.sqrt(g.q)


def iter_sphere_ops(g: RegularGraph, n_max: int, normalized: bool = True) -> Iterator[np.ndarray]:
    """Yield S_0, ..., S_{n_max} from the three-term recursion.

    With ``normalized=False`` the yielded matrices are raw non-backtracking
    walk counts (q^{n/2} S_n). Only two operators are held at a time.
    """
    q = g.q
    if normalized:
        step, c2, c = adjacency_op(g), (q + 1) / q, 1.0
    else:
        step, c2, c = g.adjacency_matrix(), float(q + 1), float(q)
    prev = np.eye(g.num_vertices)
    yield prev
    if n_max == 0:
        return
    cur = step.copy()
    yield cur
    for n in range(1, n_max):
        nxt = step @ cur - (c2 if n == 1 else c) * prev
        nxt = 0.5 * (nxt + nxt.T)
        prev, cur = cur, nxt
        yield cur


def sphere_ops(g: RegularGraph, n_max: int, normalized: bool = True) -> list[np.ndarray]:
    return list(iter_sphere_ops(g, n_max, normalized))


def nbw_count_ops(g: RegularGraph, n_max: int) -> np.ndarray:
    """Non-backtracking walk counts N_n(x, y), shape (n_max+1, |G|, |G|)."""
    return kernels.nbw_counts(
        np.ascontiguousarray(g.neighbor_table()),
        np.ascontiguousarray(g.reverse_edge_index()),
        int(n_max),
    )


def sphere_ops_by_walks(g: RegularGraph, n_max: int) -> list[np.ndarray]:
    """S_n = q^{-n/2} N_n, built by direct walk counting."""
    counts = nbw_count_ops(g, n_max)
    return [counts[n] * g.q ** (-n / 2) for n in range(n_max + 1)]


def iter_chebyshev_props(g: RegularGraph, n_max: int) -> Iterator[np.ndarray]:
    """Yield P_0(T/2), ..., P_{n_max}(T/2) for Chebyshev polynomials of the first kind."""
    t = adjacency_op(g)
    prev = np.eye(g.num_vertices)
    yield prev
    if n_max == 0:
        return
    cur = 0.5 * t
    yield cur
    for _ in range(1, n_max):
        nxt = t @ cur - prev
        nxt = 0.5 * (nxt + nxt.T)
        prev, cur = cur, nxt
        yield cur


def chebyshev_props(g: RegularGraph, n_max: int) -> list[np.ndarray]:
    return list(iter_chebyshev_props(g, n_max))


def chebyshev_sphere_rhs(g: RegularGraph, n: int, counts: list[np.ndarray] | None = None) -> np.ndarray:
    """Right side of P_n(T/2) = (1-q)/(2q^{n/2}) sum_{k<n/2} N_{2k} + N_n/(2q^{n/2}).

    The N_k here are raw walk-count operators; with the q^{-k/2} normalized
    S_k the identity fails already at n = 2.
    """
    if n % 2 or n < 2:
        raise OddIndex(f"n must be even and >= 2, got {n}")
    q = g.q
    if counts is None:
        counts = sphere_ops(g, n, normalized=False)
    scale = 1.0 / (2.0 * q ** (n / 2))
    out = scale * counts[n]
    for k in range(n // 2):
        out = out + (1 - q) * scale * counts[2 * k]
    return out


def chebyshev_sphere_decomposition_check(g: RegularGraph, n: int) -> float:
    """Max entrywise gap between P_n(T/2) and its walk-count expansion."""
    if n % 2 or n < 2:
        raise OddIndex(f"n must be even and >= 2, got {n}")
    lhs = chebyshev_props(g, n)[n]
    rhs = chebyshev_sphere_rhs(g, n, list(nbw_count_ops(g, n)))
    return float(np.max(np.abs(lhs - rhs)))


# ---------------------------------------------------------------------------
# finite balls in the (q+1)-regular tree


@dataclass(frozen=True)
class TreeBall:
    """Ball of radius R about the root of the (q+1)-regular tree.

    Vertices are stored layer by layer. In layer r >= 1 the children of the
    i-th vertex are the contiguous block ``[i*c, (i+1)*c)`` of layer r+1, with
    c = q+1 below the root and c = q elsewhere.
    """

    q: int
    radius: int

    def layer_sizes(self) -> list[int]:
        return [1] + [(self.q + 1) * self.q ** (r - 1) for r in range(1, self.radius + 1)]

    @property
    def num_vertices(self) -> int:
        return sum(self.layer_sizes())

    def children_per_vertex(self, r: int) -> int:
        return self.q + 1 if r == 0 else self.q

    def apply_adjacency(self, f: list[np.ndarray]) -> list[np.ndarray]:
        """A f on the ball; boundary vertices simply have no children."""
        out = []
        for r, layer in enumerate(f):
            acc = np.zeros_like(layer)
            if r > 0:
                # parent contribution
                acc += np.repeat(f[r - 1], self.children_per_vertex(r - 1))
            if r < self.radius:
                c = self.children_per_vertex(r)
                acc += f[r + 1].reshape(-1, c).sum(axis=1)
            out.append(acc)
        return out

    def delta_root(self) -> list[np.ndarray]:
        f = [np.zeros(size) for size in self.layer_sizes()]
        f[0][0] = 1.0
        return f

    def distances(self) -> list[np.ndarray]:
        return [np.full(size, r) for r, size in enumerate(self.layer_sizes())]


def tree_chebyshev_delta(q: int, n: int, radius: int | None = None) -> list[np.ndarray]:
    """P_n(T/2) delta_o on a tree ball, layer by layer, via the Chebyshev recursion."""
    ball = TreeBall(q, n + 2 if radius is None else radius)
    inv = 1.0 / np.sqrt(q)
    prev = ball.delta_root()
    if n == 0:
        return prev
    cur = [0.5 * inv * v for v in ball.apply_adjacency(prev)]
    for _ in range(1, n):
        tf = ball.apply_adjacency(cur)
        nxt = [inv * a - b for a, b in zip(tf, prev)]
        prev, cur = cur, nxt
    return cur


def tree_kernel_closed_form(q: int, n: int, dist) -> np.ndarray:
    """Kernel of P_n(T/2) from the root as a function of distance (n even)."""
    dist = np.asarray(dist)
    out = np.zeros(dist.shape)
    scale = 1.0 / (2.0 * q ** (n / 2))
    inner = (dist < n) & (dist % 2 == 0)
    out[inner] = (1 - q) * scale
    out[dist == n] = scale
    return out


def tree_kernel_check(q: int, n: int) -> float:
    """Max deviation of the recursion result from the closed form on a ball of radius n+2."""
    if n % 2:
        raise OddIndex(f"n must be even, got {n}")
    values = tree_chebyshev_delta(q, n)
    dev = 0.0
    for r, layer in enumerate(values):
        expect = tree_kernel_closed_form(q, n, np.array([r]))[0]
        dev = max(dev, float(np.max(np.abs(layer - expect))))
    return dev


def radial_chebyshev_delta(q: int, n: int) -> np.ndarray:
    """Same quantity as ``tree_chebyshev_delta`` computed on radial profiles.

    Returns the per-vertex value at distance r = 0..n+2 using the quotient of
    the tree adjacency onto radial functions; cheap enough to serve as an oracle.
    """
    R = n + 2
    inv = 1.0 / np.sqrt(q)

    def apply(f):
        out = np.zeros_like(f)
        out[0] = (q + 1) * f[1]
        out[1:R] = f[0 : R - 1] + q * f[2 : R + 1]
        out[R] = f[R - 1]
        return out

    prev = np.zeros(R + 1)
    prev[0] = 1.0
    if n == 0:
        return prev
    cur = 0.5 * inv * apply(prev)
    for _ in range(1, n):
        prev, cur = cur, inv * apply(cur) - prev
    return cur
