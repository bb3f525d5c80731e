import numpy as np
import pytest
from hypothesis import given, strategies as st

from lapsolve.generators import gremban_system, grid2d, laplacian_system, path_graph
from lapsolve.graph import SymmetricMatrix, WeightedGraph, laplacian_of
from lapsolve.reductions import (NotPSDDDError, RangeError, back_substitute, classify,
                                 gremban_cover, is_gremban_cover, reduce, split_diagonal_excess)
from lapsolve.graph import graph_of


def M(rows):
    return SymmetricMatrix(np.array(rows, dtype=float))


def test_classify_examples():
    assert classify(laplacian_of(path_graph(5))) == "laplacian"
    assert classify(M([[2, -1], [-1, 2]])) == "psddd-general"
    assert classify(M([[1, -2], [-2, 1]])) == "not-psddd"


def test_split_excess_examples():
    lap = laplacian_of(grid2d(3))
    a0, d = split_diagonal_excess(lap)
    assert np.all(d == 0) and np.array_equal(a0.toarray(), lap.toarray())
    a0, d = split_diagonal_excess(M([[3, -1], [-1, 2]]))
    assert np.allclose(d, [2, 1])
    assert np.allclose(a0.toarray(), [[1, -1], [-1, 1]])
    with pytest.raises(NotPSDDDError):
        split_diagonal_excess(M([[1, -2], [-2, 1]]))


def test_split_excess_reconstructs_exactly():
    a, _ = gremban_system(20, seed=3, excess=2.0)
    a0, d = split_diagonal_excess(a)
    assert np.array_equal(a0.toarray() + np.diag(d), a.toarray())
    a00, d0 = split_diagonal_excess(a0)
    assert np.all(d0 == 0) and np.array_equal(a00.toarray(), a0.toarray())


def test_gremban_cover_examples():
    a = laplacian_of(path_graph(4))
    cover, plan = gremban_cover(a)
    dense = cover.toarray()
    assert np.array_equal(dense[:4, :4], a.toarray()) and np.array_equal(dense[4:, 4:], a.toarray())
    assert not dense[:4, 4:].any()
    assert plan.gremban_applied and plan.reduced_dimension == 8

    cover, _ = gremban_cover(M([[1, 0.5], [0.5, 1]]))
    c = cover.toarray()
    assert c.shape == (4, 4)
    assert c[0, 3] == -0.5 and c[1, 2] == -0.5
    assert c[0, 1] == 0 and c[0, 2] == 0
    assert is_gremban_cover(graph_of(cover, allow_excess=True))


def test_cover_solution_recovers_original():
    a, b = gremban_system(30, seed=1, excess=1.0)
    a0, d = split_diagonal_excess(a)
    cover, _ = gremban_cover(a0)
    big = cover.toarray() + np.diag(np.concatenate([d, d]))
    xc = np.linalg.lstsq(big, np.concatenate([b, -b]), rcond=None)[0]
    x = 0.5 * (xc[:30] - xc[30:])
    assert np.linalg.norm(a.toarray() @ x - b) <= 1e-8 * np.linalg.norm(b)


def test_reduce_single_and_split():
    a, b = laplacian_system(grid2d(4))
    systems, plan = reduce(a, b)
    assert len(systems) == 1 and not plan.gremban_applied
    assert np.array_equal(systems[0].index, np.arange(16))
    g = WeightedGraph.from_edges(4, [(0, 1, 1.0), (2, 3, 2.0)])
    systems, _ = reduce(laplacian_of(g), np.array([1.0, -1.0, 2.0, -2.0]))
    assert len(systems) == 2


def test_reduce_rejects():
    with pytest.raises(NotPSDDDError):
        reduce(M([[1, -2], [-2, 1]]), np.zeros(2))
    g = WeightedGraph.from_edges(4, [(0, 1, 1.0), (2, 3, 2.0)])
    with pytest.raises(RangeError):
        reduce(laplacian_of(g), np.array([1.0, 0.0, 0.0, -1.0]))


def _dense_component_solves(systems):
    out = []
    for s in systems:
        m = s.matrix().toarray()
        out.append(np.linalg.lstsq(m, s.rhs, rcond=None)[0])
    return out


@given(st.integers(3, 60), st.integers(0, 10**6), st.floats(0, 1), st.floats(0, 3))
def test_reduce_back_substitute(n, seed, frac, excess):
    a, b = gremban_system(n, seed=seed, positive_fraction=frac, excess=excess)
    systems, plan = reduce(a, b)
    x = back_substitute(plan, systems, _dense_component_solves(systems))
    assert np.linalg.norm(a.toarray() @ x - b) <= 1e-8 * np.linalg.norm(b)


def test_reduce_gremban_end_to_end():
    a, b = gremban_system(40, seed=9, excess=0.5)
    systems, plan = reduce(a, b)
    assert plan.gremban_applied
    for s in systems:
        assert s.matrix().classification in ("laplacian", "psddd-general")
    x = back_substitute(plan, systems, _dense_component_solves(systems))
    xs = np.linalg.solve(a.toarray(), b)
    assert np.linalg.norm(x - xs) <= 1e-8 * np.linalg.norm(xs)
