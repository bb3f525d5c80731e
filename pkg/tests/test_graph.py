import networkx as nx
import numpy as np
import pytest
from hypothesis import given, strategies as st

from lapsolve.generators import grid2d, random_connected
from lapsolve.graph import (LAPLACIAN, GraphError, SymmetricMatrix, WeightedGraph, apply,
                            components, graph_of, laplacian_of, quadratic_form)


def test_single_edge_laplacian():
    g = WeightedGraph.from_edges(2, [(0, 1, 1.0)])
    assert np.array_equal(laplacian_of(g).toarray(), [[1, -1], [-1, 1]])


def test_triangle_laplacian():
    g = WeightedGraph.from_edges(3, [(0, 1, 1), (1, 2, 1), (0, 2, 1)])
    a = laplacian_of(g).toarray()
    assert np.allclose(np.diag(a), 2)
    assert np.allclose(a[~np.eye(3, dtype=bool)], -1)


def test_weighted_path_laplacian():
    g = WeightedGraph.from_edges(3, [(0, 1, 1.0), (1, 2, 2.0)])
    a = laplacian_of(g).toarray()
    assert np.allclose(np.diag(a), [1, 3, 2])
    assert a[0, 1] == -1 and a[1, 2] == -2
    assert np.allclose(a.sum(axis=1), 0)


def test_parallel_edges_sum():
    g = WeightedGraph.from_edges(2, [(0, 1, 1.0), (0, 1, 2.5)])
    assert g.m == 2
    assert np.allclose(laplacian_of(g).toarray(), [[3.5, -3.5], [-3.5, 3.5]])


def test_apply_examples():
    g = grid2d(4)
    assert np.allclose(apply(laplacian_of(g), np.ones(16)), 0)
    eye = SymmetricMatrix(np.eye(5))
    x = np.arange(5.0)
    assert np.array_equal(apply(eye, x), x)
    edge = laplacian_of(WeightedGraph.from_edges(2, [(0, 1, 1.0)]))
    assert np.array_equal(apply(edge, [1.0, 0.0]), [1.0, -1.0])
    with pytest.raises(GraphError):
        apply(edge, np.ones(3))


def test_components_examples():
    assert len(components(grid2d(5))) == 1
    two = WeightedGraph.from_edges(4, [(0, 1, 1), (2, 3, 1)])
    comps = components(two)
    assert [len(c) for c in comps] == [2, 2]


def test_components_match_bfs():
    rng = np.random.default_rng(5)
    e = rng.integers(50, size=(40, 2))
    e = e[e[:, 0] != e[:, 1]]
    g = WeightedGraph(50, e[:, 0], e[:, 1], np.ones(len(e)))
    G = nx.Graph()
    G.add_nodes_from(range(50))
    G.add_edges_from(e.tolist())
    ours = sorted(tuple(c.tolist()) for c in components(g))
    ref = sorted(tuple(sorted(c)) for c in nx.connected_components(G))
    assert ours == ref


@pytest.mark.parametrize("edges", [[(0, 0, 1.0)], [(0, 1, 0.0)], [(0, 1, -1.0)], [(0, 5, 1.0)]])
def test_invalid_graphs(edges):
    with pytest.raises(GraphError):
        WeightedGraph.from_edges(3, edges)


def test_classification():
    assert laplacian_of(grid2d(3)).classification == LAPLACIAN
    assert SymmetricMatrix(np.array([[2.0, -1], [-1, 2]])).classification == "psddd-general"
    assert SymmetricMatrix(np.array([[1.0, -2], [-2, 1]])).classification == "not-psddd"
    with pytest.raises(GraphError):
        SymmetricMatrix(np.array([[1.0, 2], [0, 1]]))


graphs = st.builds(lambda n, s, sp: random_connected(n, seed=s, spread=sp),
                   st.integers(2, 60), st.integers(0, 10**6), st.floats(0, 6))


@given(graphs)
def test_round_trip(g):
    h = graph_of(laplacian_of(g))
    ref = g.merged()
    key = lambda gg: sorted(zip(gg.u.tolist(), gg.v.tolist(), gg.w.tolist()))
    assert [(a, b) for a, b, _ in key(h)] == [(a, b) for a, b, _ in key(ref)]
    assert np.allclose([w for *_, w in key(h)], [w for *_, w in key(ref)], rtol=1e-12)


@given(graphs, st.integers(0, 10**6))
def test_quadratic_form_identity(g, seed):
    x = np.random.default_rng(seed).standard_normal(g.n)
    lap = laplacian_of(g)
    q = quadratic_form(g, x)
    assert q >= 0
    assert np.isclose(x @ apply(lap, x), q, rtol=1e-12, atol=1e-12 * max(q, 1e-300))


@given(graphs, st.integers(0, 10**6), st.floats(-5, 5), st.floats(-5, 5))
def test_apply_linear(g, seed, alpha, beta):
    rng = np.random.default_rng(seed)
    x, y = rng.standard_normal((2, g.n))
    lap = laplacian_of(g)
    lhs = apply(lap, alpha * x + beta * y)
    rhs = alpha * apply(lap, x) + beta * apply(lap, y)
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-12 * (1 + np.abs(rhs).max()))
