import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import brute_girth, k4, k44, petersen, random_regular
from specnorm import graphs
from specnorm.errors import Acyclic, GenerationFailed, InvalidSpec


def test_random_regular_deterministic():
    a = random_regular(100, 4, 7)
    b = random_regular(100, 4, 7)
    assert a.degree == 4 and a.num_vertices == 100
    assert a.edges() == b.edges()
    assert a.edges() != random_regular(100, 4, 8).edges()


@settings(max_examples=25, deadline=None)
@given(n=st.integers(10, 80), d=st.integers(3, 4), seed=st.integers(0, 2**32))
def test_random_regular_invariants(n, d, seed):
    # whole-pairing rejection succeeds with probability ~exp(-(d^2-1)/4), fine for d <= 4
    if (n * d) % 2:
        with pytest.raises(InvalidSpec):
            random_regular(n, d, seed)
        return
    g = random_regular(n, d, seed)
    A = g.adjacency_matrix()
    assert np.array_equal(A, A.T)
    assert np.all(A.sum(axis=1) == d)
    assert A.max() == 1 and np.all(np.diag(A) == 0)
    assert g.connected and not g.has_multi_edges


def test_parity_violation():
    with pytest.raises(InvalidSpec):
        random_regular(11, 3, 0)


def test_degree_too_small():
    with pytest.raises(InvalidSpec):
        graphs.build_graph(graphs.GraphBuildSpec("random_regular", {"n": 10, "degree": 2}))


def test_generation_budget(monkeypatch):
    monkeypatch.setattr(graphs, "MAX_ATTEMPTS", 0)
    with pytest.raises(GenerationFailed):
        random_regular(20, 3, 0)


def test_unknown_kind():
    with pytest.raises(InvalidSpec):
        graphs.GraphBuildSpec("hypercube", {})


def test_complete_graph():
    g = k4()
    assert g.degree == 3 and g.q == 2 and graphs.girth(g) == 3


def test_complete_bipartite():
    g = k44()
    assert g.degree == 4 and g.q == 3 and graphs.girth(g) == 4
    with pytest.raises(InvalidSpec):
        graphs.build_graph(graphs.GraphBuildSpec("complete_bipartite", {"a": 3, "b": 4}))


def test_petersen_girth_from_edge_list(tmp_path):
    path = tmp_path / "petersen.edges"
    path.write_text("# petersen\n" + graphs.format_edge_list(petersen()))
    g = graphs.load_edge_list(path)
    assert graphs.girth(g) == 5 == brute_girth(g)
    assert graphs.injectivity_radius(g) == 2


def test_multi_edge_girth_two():
    g = graphs.parse_edge_list("0 1\n0 1\n0 1\n2 3\n2 3\n2 3\n", allow_multi=True)
    assert g.has_multi_edges and graphs.girth(g) == 2


def test_multi_edges_rejected_by_default():
    with pytest.raises(InvalidSpec):
        graphs.from_edges([(0, 1), (0, 1), (0, 1)], 2)


def test_irregular_rejected():
    with pytest.raises(InvalidSpec):
        graphs.parse_edge_list("0 1\n1 2\n2 0\n0 3\n")


def test_self_loop_rejected():
    with pytest.raises(InvalidSpec):
        graphs.parse_edge_list("0 0\n")


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32), n=st.sampled_from([10, 16, 30]))
def test_edge_list_round_trip(seed, n):
    g = random_regular(n, 3, seed)
    text = graphs.format_edge_list(g)
    h = graphs.parse_edge_list(text)
    assert h.adjacency == g.adjacency
    assert graphs.canonical_edge_text(text) == text


def test_canonical_edge_text_sorts():
    assert graphs.canonical_edge_text("# c\n2 1\n0 3\n") == "0 3\n1 2\n"


def test_spec_string():
    spec = graphs.parse_graph_spec("random_regular:n=50,d=4,seed=3")
    assert spec.kind == "random_regular" and spec.seed == 3
    g = graphs.resolve_graph("random_regular:n=50,d=4,seed=3")
    assert g.edges() == random_regular(50, 4, 3).edges()
    assert graphs.resolve_graph("complete:n=5").degree == 4


def test_cayley_symmetric_group():
    g = graphs.resolve_graph("cayley:generators=1.0.2.3|1.2.3.0")
    assert g.num_vertices == math.factorial(4)
    assert g.degree == 3 and g.connected
    assert graphs.girth(g) == brute_girth(g)


def test_cayley_rejects_identity():
    with pytest.raises(InvalidSpec):
        graphs.resolve_graph("cayley:generators=0.1.2|1.2.0")


def test_lift_reaches_girth():
    g = graphs.resolve_graph("lift:base=complete:n=5,k=30,min_girth=6,seed=1")
    assert g.num_vertices == 150 and g.degree == 4
    assert graphs.girth(g) >= 6
    assert graphs.girth(g) == brute_girth(g)


@pytest.mark.parametrize("seed", range(4))
def test_girth_against_brute_force(seed):
    g = random_regular(30, 3, seed)
    assert graphs.girth(g) == brute_girth(g)


def test_acyclic_raises(monkeypatch):
    from specnorm import kernels
    monkeypatch.setattr(kernels, "girth", lambda adj: 0)
    with pytest.raises(Acyclic):
        graphs.girth(k4())


def test_clique_ring():
    g = graphs.clique_ring(6)
    assert g.num_vertices == 30 and g.degree == 4 and g.connected
    assert graphs.girth(g) == 3
    same = graphs.resolve_graph("clique_ring:m=6")
    assert np.array_equal(same.neighbor_table(), g.neighbor_table())


def test_reverse_edge_index_is_involution(rr60):
    rev = rr60.reverse_edge_index()
    assert np.array_equal(rev[rev], np.arange(rev.size))
    nbr = rr60.neighbor_table().ravel()
    tails = np.repeat(np.arange(rr60.num_vertices), rr60.degree)
    assert np.array_equal(nbr[rev], tails)
