"""Finite (q+1)-regular graphs: construction, loading and cycle statistics."""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from . import kernels
from .errors import Acyclic, GenerationFailed, InvalidSpec

MAX_ATTEMPTS = 1000
KINDS = ("random_regular", "complete", "complete_bipartite", "cayley", "lift", "clique_ring")


@dataclass(frozen=True)
class RegularGraph:
    """Immutable neighbor-list representation of a (q+1)-regular graph.

    Vertices are the dense integers ``0..num_vertices-1``. Multi-edges show up
    as repeated neighbors and are recorded in ``has_multi_edges``.
    """

    num_vertices: int
    degree: int
    adjacency: tuple[tuple[int, ...], ...]
    label: str = ""
    connected: bool = True
    has_multi_edges: bool = False

    def __post_init__(self):
        if self.degree < 3:
            raise InvalidSpec(f"degree {self.degree} < 3 (need q >= 2)")
        if len(self.adjacency) != self.num_vertices:
            raise InvalidSpec("adjacency length does not match num_vertices")
        for x, nbrs in enumerate(self.adjacency):
            if len(nbrs) != self.degree:
                raise InvalidSpec(f"vertex {x} has {len(nbrs)} neighbors, expected {self.degree}")
            if x in nbrs:
                raise InvalidSpec(f"self-loop at vertex {x}")
        for x, nbrs in enumerate(self.adjacency):
            for y, mult in Counter(nbrs).items():
                if self.adjacency[y].count(x) != mult:
                    raise InvalidSpec(f"asymmetric adjacency between {x} and {y}")

    @property
    def q(self) -> int:
        return self.degree - 1

    @property
    def num_edges(self) -> int:
        return self.num_vertices * self.degree // 2

    def neighbor_table(self) -> np.ndarray:
        return np.asarray(self.adjacency, dtype=np.int32).reshape(self.num_vertices, self.degree)

    def adjacency_matrix(self) -> np.ndarray:
        """Dense adjacency matrix; entry (x, y) counts edges between x and y."""
        a = np.zeros((self.num_vertices, self.num_vertices))
        tab = self.neighbor_table()
        np.add.at(a, (np.repeat(np.arange(self.num_vertices), self.degree), tab.ravel()), 1.0)
        return a

    def edges(self) -> list[tuple[int, int]]:
        """Canonically sorted edge list (u <= v), multi-edges repeated."""
        out = []
        for x, nbrs in enumerate(self.adjacency):
            for y, mult in Counter(nbrs).items():
                if x < y:
                    out.extend([(x, y)] * mult)
        return sorted(out)

    def reverse_edge_index(self) -> np.ndarray:
        """Flat index of the reverse of each directed edge ``x*d + j``.

        Parallel edges are paired in order of appearance, so every directed
        edge has a distinct reverse.
        """
        d = self.degree
        rev = np.empty(self.num_vertices * d, dtype=np.int32)
        used: dict[tuple[int, int], int] = {}
        for x, nbrs in enumerate(self.adjacency):
            for j, y in enumerate(nbrs):
                k = used.get((x, y), 0)
                used[(x, y)] = k + 1
                slots = [i for i, z in enumerate(self.adjacency[y]) if z == x]
                rev[x * d + j] = y * d + slots[k]
        return rev


@dataclass(frozen=True)
class GraphBuildSpec:
    kind: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidSpec(f"unknown graph kind {self.kind!r}; expected one of {KINDS}")


def from_adjacency(adjacency, label="", allow_multi=False) -> RegularGraph:
    adjacency = tuple(tuple(int(y) for y in nbrs) for nbrs in adjacency)
    n = len(adjacency)
    if n == 0:
        raise InvalidSpec("empty graph")
    degrees = {len(nbrs) for nbrs in adjacency}
    if len(degrees) != 1:
        raise InvalidSpec(f"graph is not regular: degrees {sorted(degrees)}")
    multi = any(len(set(nbrs)) != len(nbrs) for nbrs in adjacency)
    if multi and not allow_multi:
        raise InvalidSpec("multi-edges are not allowed here")
    return RegularGraph(
        num_vertices=n,
        degree=degrees.pop(),
        adjacency=adjacency,
        label=label,
        connected=_is_connected(adjacency),
        has_multi_edges=multi,
    )


def from_edges(edges, num_vertices=None, label="", allow_multi=False) -> RegularGraph:
    edges = [(int(u), int(v)) for u, v in edges]
    if num_vertices is None:
        num_vertices = 1 + max(max(e) for e in edges) if edges else 0
    adjacency = [[] for _ in range(num_vertices)]
    for u, v in edges:
        if u == v:
            raise InvalidSpec(f"self-loop at vertex {u}")
        if not (0 <= u < num_vertices and 0 <= v < num_vertices):
            raise InvalidSpec(f"edge ({u}, {v}) out of range")
        adjacency[u].append(v)
        adjacency[v].append(u)
    return from_adjacency([sorted(a) for a in adjacency], label=label, allow_multi=allow_multi)


def _is_connected(adjacency) -> bool:
    n = len(adjacency)
    rows = np.repeat(np.arange(n), [len(a) for a in adjacency])
    cols = np.fromiter(itertools.chain.from_iterable(adjacency), dtype=np.int64)
    mat = csr_matrix((np.ones(len(cols)), (rows, cols)), shape=(n, n))
    ncomp, _ = connected_components(mat, directed=False)
    return ncomp == 1


# ---------------------------------------------------------------------------
# builders


def build_graph(spec: GraphBuildSpec) -> RegularGraph:
    """Construct the graph described by ``spec``; deterministic in ``spec.seed``."""
    builder = {
        "random_regular": _random_regular,
        "complete": _complete,
        "complete_bipartite": _complete_bipartite,
        "cayley": _cayley,
        "lift": _cyclic_lift,
        "clique_ring": lambda params, seed: clique_ring(int(params["m"])),
    }[spec.kind]
    return builder(spec.params, spec.seed)


def _degree_param(params):
    if "degree" in params or "d" in params:
        d = int(params.get("degree", params.get("d")))
    elif "q" in params:
        d = int(params["q"]) + 1
    else:
        raise InvalidSpec("need 'degree' (or 'd') or 'q'")
    if d < 3:
        raise InvalidSpec(f"degree {d} < 3 (need q >= 2)")
    return d


def _random_regular(params, seed):
    n = int(params["n"])
    d = _degree_param(params)
    if (n * d) % 2:
        raise InvalidSpec(f"n * degree = {n * d} is odd")
    if d >= n:
        raise InvalidSpec(f"degree {d} must be < n = {n}")
    rng = np.random.default_rng(seed)
    stubs = np.repeat(np.arange(n), d)
    for _ in range(MAX_ATTEMPTS):
        pairs = rng.permutation(stubs).reshape(-1, 2)
        pairs.sort(axis=1)
        if np.any(pairs[:, 0] == pairs[:, 1]):
            continue
        keys = pairs[:, 0].astype(np.int64) * n + pairs[:, 1]
        if np.unique(keys).size != keys.size:
            continue
        g = from_edges(pairs.tolist(), n, label=f"rr(n={n},d={d},seed={seed})")
        if g.connected:
            return g
    raise GenerationFailed(f"no simple connected pairing after {MAX_ATTEMPTS} attempts")


def _complete(params, seed):
    n = int(params["n"])
    if n < 4:
        raise InvalidSpec("complete graph needs n >= 4")
    return from_adjacency([[y for y in range(n) if y != x] for x in range(n)], label=f"K{n}")


def _complete_bipartite(params, seed):
    if "n" in params:
        a = b = int(params["n"])
    else:
        a, b = int(params["a"]), int(params["b"])
    if a != b:
        raise InvalidSpec("K_{a,b} is regular only when a == b")
    if a < 3:
        raise InvalidSpec("complete bipartite graph needs parts of size >= 3")
    adj = [list(range(a, 2 * a)) for _ in range(a)] + [list(range(a)) for _ in range(a)]
    return from_adjacency(adj, label=f"K{a},{a}")


MAX_GROUP_ORDER = 5000


def _cayley(params, seed):
    """Cayley graph of the permutation group generated by ``generators``.

    Vertices are group elements found by closure from the identity; x ~ x s
    for s in the symmetric closure of the generators.
    """
    gens = [tuple(int(v) for v in g) for g in params["generators"]]
    if not gens:
        raise InvalidSpec("cayley needs at least one generator")
    n = len(gens[0])
    closure: list[tuple[int, ...]] = []
    for g in gens:
        if sorted(g) != list(range(n)):
            raise InvalidSpec(f"{g} is not a permutation of 0..{n - 1}")
        inv = [0] * n
        for x, y in enumerate(g):
            inv[y] = x
        for h in (g, tuple(inv)):
            if h not in closure:
                closure.append(h)
    identity = tuple(range(n))
    if identity in closure:
        raise InvalidSpec("the identity is not allowed as a generator (it gives self-loops)")
    index = {identity: 0}
    elems = [identity]
    adj = []
    i = 0
    while i < len(elems):
        x = elems[i]
        row = []
        for h in closure:
            y = tuple(x[h[k]] for k in range(n))  # right multiplication x*h
            if y not in index:
                if len(elems) >= MAX_GROUP_ORDER:
                    raise InvalidSpec(f"group order exceeds {MAX_GROUP_ORDER}")
                index[y] = len(elems)
                elems.append(y)
            row.append(index[y])
        adj.append(sorted(row))
        i += 1
    return from_adjacency(adj, label=params.get("label", f"cayley(order={len(elems)},|S|={len(closure)})"))


def _cyclic_lift(params, seed):
    """Random Z_k-voltage lift of a base graph, retried until simple, connected
    and of girth at least ``min_girth``."""
    base = params.get("base", "complete:n=5")
    if isinstance(base, str):
        base = build_graph(parse_graph_spec(base))
    k = int(params["k"])
    min_girth = int(params.get("min_girth", 0))
    rng = np.random.default_rng(seed)
    base_edges = base.edges()
    n = base.num_vertices * k
    for _ in range(MAX_ATTEMPTS):
        volts = rng.integers(0, k, size=len(base_edges))
        adj = [[] for _ in range(n)]
        for (u, v), a in zip(base_edges, volts):
            for i in range(k):
                x, y = u * k + i, v * k + (i + int(a)) % k
                adj[x].append(y)
                adj[y].append(x)
        if any(len(set(a)) != len(a) for a in adj):
            continue
        g = from_adjacency(
            [sorted(a) for a in adj],
            label=f"lift(base={base.label},k={k},seed={seed})",
        )
        if g.connected and girth(g) >= min_girth:
            return g
    raise GenerationFailed(f"no lift with girth >= {min_girth} after {MAX_ATTEMPTS} attempts")


# ---------------------------------------------------------------------------
# statistics


def clique_ring(m: int) -> RegularGraph:
    """4-regular ring of m copies of K5 minus an edge, joined end to end.

    Dense local clusters give it several eigenvalues of T_q outside [-2, 2],
    which makes it a handy fixture for the untempered part of the spectrum.
    """
    if m < 2:
        raise InvalidSpec("clique_ring needs m >= 2")
    edges = []
    for c in range(m):
        base = 5 * c
        for a, b in itertools.combinations(range(5), 2):
            if (a, b) != (0, 4):
                edges.append((base + a, base + b))
        edges.append((base + 4, (5 * (c + 1)) % (5 * m)))
    return from_edges(edges, 5 * m, label=f"clique_ring(m={m})")


def girth(g: RegularGraph) -> int:
    """Length of the shortest cycle (2 if there are parallel edges)."""
    if g.has_multi_edges:
        return 2
    value = kernels.girth(np.ascontiguousarray(g.neighbor_table()))
    if value == 0:
        raise Acyclic(f"{g.label}: BFS found no cycle in a {g.degree}-regular graph")
    return int(value)


def injectivity_radius(g: RegularGraph) -> int:
    return (girth(g) - 1) // 2


# ---------------------------------------------------------------------------
# edge-list text format and spec strings


def parse_edge_list(text: str, label="", allow_multi=True) -> RegularGraph:
    """Parse whitespace-separated ``u v`` lines (0-based); ``#`` starts a comment line."""
    edges = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise InvalidSpec(f"line {lineno}: expected 'u v', got {line!r}")
        edges.append((int(parts[0]), int(parts[1])))
    return from_edges(edges, label=label, allow_multi=allow_multi)


def load_edge_list(path, allow_multi=True) -> RegularGraph:
    path = Path(path)
    return parse_edge_list(path.read_text(), label=path.stem, allow_multi=allow_multi)


def format_edge_list(g: RegularGraph) -> str:
    return "".join(f"{u} {v}\n" for u, v in g.edges())


def canonical_edge_text(text: str) -> str:
    """Sort an edge-list text the same way ``format_edge_list`` does."""
    edges = []
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            u, v = map(int, line.split())
            edges.append((min(u, v), max(u, v)))
    return "".join(f"{u} {v}\n" for u, v in sorted(edges))


def parse_graph_spec(text: str, seed: int | None = None) -> GraphBuildSpec:
    """Parse ``kind:key=value,...``.

    Cayley generators are ``|``-separated permutations written as
    ``.``-separated images, e.g. ``cayley:n=4,generators=1.2.3.0``.
    """
    kind, _, rest = text.partition(":")
    params: dict = {}
    for item in filter(None, (s.strip() for s in _split_params(rest))):
        key, _, value = item.partition("=")
        key = key.strip()
        value = value.strip()
        if key == "generators":
            params[key] = [[int(v) for v in p.split(".")] for p in value.split("|")]
        elif key == "base":
            params[key] = value.replace(";", ",")
        else:
            params[key] = value
    spec_seed = int(params.pop("seed", seed if seed is not None else 0))
    return GraphBuildSpec(kind=kind.strip(), params=params, seed=spec_seed)


def _split_params(rest):
    # a nested base spec uses ';' in place of ',' so a plain split is safe
    return rest.split(",")


def resolve_graph(arg: str, seed: int | None = None) -> RegularGraph:
    """Interpret a ``--graph`` argument: an existing edge-list file or a spec string."""
    path = Path(arg)
    if path.exists():
        return load_edge_list(path)
    return build_graph(parse_graph_spec(arg, seed=seed))
