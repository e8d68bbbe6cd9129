"""Small graphs and brute-force oracles shared by the tests."""

import numpy as np

from specnorm import graphs


def petersen():
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return graphs.from_edges(outer + spokes + inner, 10, label="petersen")


def k44():
    return graphs.build_graph(graphs.GraphBuildSpec("complete_bipartite", {"a": 4, "b": 4}))


def k4():
    return graphs.build_graph(graphs.GraphBuildSpec("complete", {"n": 4}))


def random_regular(n, d, seed):
    return graphs.build_graph(graphs.GraphBuildSpec("random_regular", {"n": n, "degree": d}, seed))


def brute_girth(g):
    """Shortest cycle through each edge: drop the edge, BFS between its ends."""
    best = None
    for u, v in g.edges():
        dist = {u: 0}
        frontier = [u]
        while frontier and v not in dist:
            nxt = []
            for x in frontier:
                for y in g.adjacency[x]:
                    if {x, y} == {u, v}:
                        continue
                    if y not in dist:
                        dist[y] = dist[x] + 1
                        nxt.append(y)
            frontier = nxt
        if v in dist:
            best = dist[v] + 1 if best is None else min(best, dist[v] + 1)
    return best


def brute_nbw(g, n):
    """Non-backtracking walk counts by explicit depth-first enumeration (simple graphs)."""
    N = g.num_vertices
    out = np.zeros((N, N))
    for x in range(N):
        stack = [(x, -1, 0)]
        while stack:
            v, prev, k = stack.pop()
            if k == n:
                out[x, v] += 1
                continue
            for y in g.adjacency[v]:
                if y != prev:
                    stack.append((y, v, k + 1))
    return out
