"""Seeded test-problem generators."""
from __future__ import annotations

import networkx as nx
import numpy as np
import scipy.sparse as sp

from .graph import SymmetricMatrix, WeightedGraph, laplacian_of


def _weights(rng, m, spread):
    """Weights ``10**U(-spread, 0)``; ``spread = 0`` gives unit weights."""
    if spread <= 0:
        return np.ones(m)
    return 10.0 ** rng.uniform(-spread, 0.0, m)


def _from_nx(G, rng, spread) -> WeightedGraph:
    G = nx.convert_node_labels_to_integers(G, ordering="sorted")
    e = np.array(sorted((min(a, b), max(a, b)) for a, b in G.edges()), dtype=np.int64).reshape(-1, 2)
    return WeightedGraph(G.number_of_nodes(), e[:, 0], e[:, 1], _weights(rng, len(e), spread))


def grid2d(k, seed=0, spread=0.0) -> WeightedGraph:
    """``k x k`` grid graph."""
    return _from_nx(nx.grid_2d_graph(k, k), np.random.default_rng(seed), spread)


def path_graph(n, seed=0, spread=0.0) -> WeightedGraph:
    return _from_nx(nx.path_graph(n), np.random.default_rng(seed), spread)


def random_regular(n, d=3, seed=0, spread=0.0) -> WeightedGraph:
    """Connected random ``d``-regular graph (resampled until connected)."""
    rng = np.random.default_rng(seed)
    for attempt in range(100):
        G = nx.random_regular_graph(d, n, seed=int(rng.integers(2**31)))
        if nx.is_connected(G):
            return _from_nx(G, rng, spread)
    raise RuntimeError("could not sample a connected regular graph")


def random_connected(n, avg_degree=4.0, seed=0, spread=0.0) -> WeightedGraph:
    """Random spanning tree plus uniformly random extra edges."""
    rng = np.random.default_rng(seed)
    extra = max(0, int(round(n * avg_degree / 2)) - (n - 1))
    return tree_plus_edges(n, extra, seed=int(rng.integers(2**31)), spread=spread)


def tree_plus_edges(n, k, seed=0, spread=0.0) -> WeightedGraph:
    """Uniform random labelled tree on ``n`` vertices plus ``k`` distinct extra edges."""
    rng = np.random.default_rng(seed)
    if n == 1:
        return WeightedGraph(1, [], [], [])
    # random recursive tree with a shuffled labelling
    perm = rng.permutation(n)
    parents = [int(rng.integers(i)) for i in range(1, n)]
    edges = {(min(perm[i], perm[p]), max(perm[i], perm[p])) for i, p in zip(range(1, n), parents)}
    limit = n * (n - 1) // 2
    k = min(k, limit - len(edges))
    while k > 0:
        a, b = (int(x) for x in rng.integers(n, size=2))
        if a != b and (min(a, b), max(a, b)) not in edges:
            edges.add((min(a, b), max(a, b)))
            k -= 1
    e = np.array(sorted(edges), dtype=np.int64)
    return WeightedGraph(n, e[:, 0], e[:, 1], _weights(rng, len(e), spread))


def random_tree(n, seed=0, spread=0.0) -> WeightedGraph:
    return tree_plus_edges(n, 0, seed=seed, spread=spread)


def laplacian_system(g: WeightedGraph, seed=0):
    """Laplacian of ``g`` with a seeded right-hand side of zero mean."""
    rng = np.random.default_rng(seed)
    b = rng.standard_normal(g.n)
    b -= b.mean()
    return laplacian_of(g), b


def gremban_system(n, seed=0, positive_fraction=0.3, excess=0.0, spread=0.0):
    """PSDDD matrix on a random connected graph with some positive off-diagonals.

    Each edge is flipped to a positive entry with probability
    ``positive_fraction`` (at least one edge is flipped).  Row sums of
    absolute off-diagonals form the diagonal, plus ``excess`` on one vertex.
    Returns ``(matrix, rhs)`` with the rhs in the range.
    """
    rng = np.random.default_rng(seed)
    g = random_connected(n, seed=int(rng.integers(2**31)), spread=spread)
    sign = np.where(rng.random(g.m) < positive_fraction, 1.0, -1.0)
    if g.m and not np.any(sign > 0):
        sign[int(rng.integers(g.m))] = 1.0
    off = sp.coo_matrix((sign * g.w, (g.u, g.v)), shape=(n, n))
    off = off + off.T
    diag = np.asarray(abs(off).sum(axis=1)).ravel()
    if excess > 0:
        diag[int(rng.integers(n))] += excess
    a = SymmetricMatrix(off + sp.diags(diag))
    from .mmio import random_rhs
    b = random_rhs(a, seed=int(rng.integers(2**31)))
    return a, b


FAMILIES = {
    "grid2d": "k x k grid, sizes are k",
    "regular": "random 3-regular graph, sizes are n",
    "tree+k": "random tree plus n/10 extra edges, sizes are n",
    "gremban": "PSDDD with positive off-diagonals, sizes are n",
}


def bench_instance(family, size, seed=0):
    """``(matrix, rhs)`` for one benchmark instance."""
    if family == "grid2d":
        return laplacian_system(grid2d(size, seed), seed)
    if family == "regular":
        return laplacian_system(random_regular(size, 3, seed), seed)
    if family == "tree+k":
        return laplacian_system(tree_plus_edges(size, max(1, size // 10), seed), seed)
    if family == "gremban":
        return gremban_system(size, seed)
    raise ValueError(f"unknown family '{family}'; choose from {sorted(FAMILIES)}")
