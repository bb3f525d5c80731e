"""Low-stretch spanning trees by iterated clustering and contraction.

Edges are bucketed into weight classes.  At level ``j`` the current
contracted multigraph is clustered using the classes ``j - rho + 1 .. j``, the
resulting forest edges are recorded, and its trees are contracted.  The
records are what the preconditioner needs to build its embedding.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .graph import GraphError, WeightedGraph, components


@dataclass(frozen=True)
class ParameterSchedule:
    """Parameters ``x``, ``rho``, ``mu`` and ``y`` for a graph with ``n`` vertices.

    All logarithms are base 2 and ``log n`` is evaluated at ``max(n, 2)``.
    """

    n: int
    m: int
    x: float
    rho: int
    mu: float
    y: float

    @classmethod
    def for_size(cls, n, m) -> "ParameterSchedule":
        logn = math.log2(max(n, 2))
        loglogn = math.log2(max(2.0, logn))
        x = max(2.0, 2.0 ** math.sqrt(logn * loglogn))
        rho = max(1, math.ceil(3 * logn / math.log2(x)))
        mu = 9 * rho * logn
        return cls(n, m, x, rho, mu, x * mu)

    @property
    def log_n(self) -> float:
        return math.log2(max(self.n, 2))

    def theta(self, j) -> float:
        if j <= self.rho:
            return self.x ** (j - 1)
        return self.x ** self.rho * self.y ** (j - self.rho - 1)

    def tau(self, j, l) -> float:
        if j - l < self.rho:
            return 1.0
        k = j - l - self.rho + 1
        # floor at the smallest normal float so path weights stay positive
        return max(k * k * self.y ** -k, np.finfo(float).tiny)

    def weight_class(self, w) -> np.ndarray:
        """Class ``i >= 1`` with ``y**-i < w <= y**-(i-1)`` for weights normalized to max 1."""
        w = np.asarray(w, dtype=float)
        ly = math.log(self.y)
        cls = np.floor(-np.log(w) / ly).astype(np.int64) + 1
        cls = np.maximum(cls, 1)
        # repair rounding at bracket boundaries
        hi = self.y ** -(cls - 1.0)
        lo = self.y ** -cls.astype(float)
        cls = np.where(w > hi, cls - 1, cls)
        cls = np.where(w <= lo, cls + 1, cls)
        return np.maximum(cls, 1)


@dataclass
class Forest:
    """Spanning forest returned by :func:`cluster`.

    ``edges`` are edge ids of the clustered graph, ``labels`` assigns each
    vertex its tree (trees numbered in creation order) and ``depths`` holds
    the BFS depth of every tree.
    """

    edges: np.ndarray
    labels: np.ndarray
    depths: np.ndarray

    @property
    def count(self) -> int:
        return len(self.depths)


@dataclass
class Level:
    """Records of one level ``j`` of the construction."""

    j: int
    n_vertices: int
    m_edges: int
    window: tuple
    forest: np.ndarray
    settled: np.ndarray
    labels: np.ndarray
    depths: np.ndarray


@dataclass
class LevelRecords:
    """Per-level output of :func:`akpw`; edge references are positions in the input graph."""

    graph: WeightedGraph
    params: ParameterSchedule
    scale: float
    eindex: np.ndarray
    levels: list = field(default_factory=list)
    widened: int = 0

    @property
    def height(self) -> int:
        return len(self.levels)

    def tree_positions(self) -> np.ndarray:
        if not self.levels:
            return np.zeros(0, dtype=np.int64)
        return np.sort(np.concatenate([lv.forest for lv in self.levels]))

    def labels_before(self, j) -> np.ndarray:
        """Tree labels of ``F^j`` (identity for ``j = 1``)."""
        if j <= 1:
            return np.arange(self.graph.n)
        return self.levels[j - 2].labels

    def settled_level(self) -> np.ndarray:
        """Level ``j`` at which each edge becomes intra-tree."""
        out = np.zeros(self.graph.m, dtype=np.int64)
        for lv in self.levels:
            out[lv.settled] = lv.j
        return out

    def class_counts(self, j) -> dict:
        """``|E_i^j|``: edges of class ``i`` joining different trees of ``F^j``."""
        lab = self.labels_before(j)
        g = self.graph
        inter = lab[g.u] != lab[g.v]
        cls, cnt = np.unique(self.eindex[inter], return_counts=True)
        return dict(zip(cls.tolist(), cnt.tolist()))


def _csr(n, eu, ev):
    ends = np.concatenate([eu, ev])
    others = np.concatenate([ev, eu])
    eid = np.concatenate([np.arange(len(eu)), np.arange(len(eu))])
    order = np.argsort(ends, kind="stable")
    start = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(ends, minlength=n), out=start[1:])
    return start.tolist(), others[order].tolist(), eid[order].tolist()


def _cluster(n, eu, ev, ecls, k, x):
    """Ball-growing clustering on local arrays.

    ``ecls`` holds class indices ``0..k-1``.  Returns ``(chosen, labels, depths)``
    where ``chosen`` are positions into the edge arrays.
    """
    start, nbr, eid = _csr(n, np.asarray(eu, dtype=np.int64), np.asarray(ev, dtype=np.int64))
    ecls = list(ecls)
    tree = [-1] * n
    stamp = [-1] * n
    chosen, depths = [], []
    ntrees = 0
    for root in range(n):
        if tree[root] != -1:
            continue
        tid = ntrees
        ntrees += 1
        tree[root] = tid
        intra = [0] * k
        bnd = [0] * k
        layer = [root]
        depth = 0
        while True:
            for v in layer:
                for p in range(start[v], start[v + 1]):
                    w = nbr[p]
                    c = ecls[eid[p]]
                    if tree[w] == -1:
                        bnd[c] += 1
                    elif tree[w] == tid and stamp[w] != -1:
                        intra[c] += 1
                        if stamp[w] < depth:
                            bnd[c] -= 1
                stamp[v] = depth
            if all(intra[c] >= x * bnd[c] for c in range(k)):
                break
            nxt = []
            for v in layer:
                for p in range(start[v], start[v + 1]):
                    w = nbr[p]
                    if tree[w] == -1:
                        tree[w] = tid
                        chosen.append(eid[p])
                        nxt.append(w)
            if not nxt:
                break
            depth += 1
            layer = nxt
        depths.append(depth)
    return (np.asarray(chosen, dtype=np.int64), np.asarray(tree, dtype=np.int64),
            np.asarray(depths, dtype=np.int64))


def cluster(g: WeightedGraph, x, classes) -> Forest:
    """Grow BFS balls over the edges in ``classes`` until, for every class,
    intra-ball edges number at least ``x`` times the boundary edges.

    ``classes`` is a list of disjoint collections of edge ids of ``g``.
    """
    k = len(classes)
    if k < 1:
        raise ValueError("at least one class is required")
    pos, cls = [], []
    seen = set()
    for c, ids in enumerate(classes):
        for e in ids:
            e = int(e)
            if e in seen:
                raise ValueError(f"edge {e} appears in more than one class")
            seen.add(e)
            pos.append(g.index_of(e))
            cls.append(c)
    pos = np.asarray(pos, dtype=np.int64)
    chosen, labels, depths = _cluster(g.n, g.u[pos], g.v[pos], cls, k, x)
    return Forest(g.ids[pos[chosen]], labels, depths)


def contract(g: WeightedGraph, forest_ids):
    """Contract every tree of a spanning forest of ``g`` to a single vertex.

    Returns ``(h, labels)``: the contracted multigraph, whose edges keep their
    ids and weights, and the tree label of every vertex of ``g``.
    """
    from scipy.sparse.csgraph import connected_components
    import scipy.sparse as sp

    f = g.subgraph(forest_ids)
    if f.m:
        adj = sp.coo_matrix((np.ones(f.m), (f.u, f.v)), shape=(g.n, g.n))
        ntrees, lab = connected_components(adj, directed=False)
    else:
        ntrees, lab = g.n, np.arange(g.n)
    if f.m != g.n - ntrees:
        raise GraphError("edge set is not a forest")
    # relabel trees by smallest vertex
    first = np.full(ntrees, g.n, dtype=np.int64)
    np.minimum.at(first, lab, np.arange(g.n))
    rank = np.empty(ntrees, dtype=np.int64)
    rank[np.argsort(first)] = np.arange(ntrees)
    lab = rank[lab]
    keep = lab[g.u] != lab[g.v]
    h = WeightedGraph(ntrees, lab[g.u[keep]], lab[g.v[keep]], g.w[keep], g.ids[keep])
    return h, lab


def akpw(g: WeightedGraph):
    """Spanning tree of a connected graph.

    Returns ``(tree_ids, records, params)``.
    """
    if g.n == 0:
        raise GraphError("empty graph")
    if len(components(g)) != 1:
        raise GraphError("graph is disconnected")
    params = ParameterSchedule.for_size(g.n, g.m)
    scale = float(g.w.max()) if g.m else 1.0
    eindex = params.weight_class(g.w / scale) if g.m else np.zeros(0, dtype=np.int64)
    rec = LevelRecords(g, params, scale, eindex)
    rho, x = params.rho, params.x

    labels = np.arange(g.n)
    cur = np.arange(g.m)
    cu, cv = g.u.copy(), g.v.copy()
    cur_n = g.n
    j = 0
    while cur_n > 1:
        j += 1
        lo = j - rho + 1
        ccls = eindex[cur]
        # classes below the window cannot occur by the edge-reduction bound;
        # if rounding lets one survive, widen the window rather than stall
        if len(ccls) and ccls.min() < lo:
            rec.widened += 1
            lo = int(ccls.min())
        win = np.flatnonzero(ccls <= j)
        window = (max(lo, 1), j)
        if len(win):
            k = window[1] - window[0] + 1
            chosen, tl, depths = _cluster(cur_n, cu[win], cv[win], ccls[win] - window[0], k, x)
            forest = cur[win[chosen]]
        else:
            tl, depths = np.arange(cur_n), np.zeros(cur_n, dtype=np.int64)
            forest = np.zeros(0, dtype=np.int64)
        nu, nv = tl[cu], tl[cv]
        intra = nu == nv
        settled = cur[intra]
        labels = tl[labels]
        rec.levels.append(Level(j, cur_n, len(cur), window, np.sort(forest), np.sort(settled),
                                labels.copy(), depths))
        cur, cu, cv = cur[~intra], nu[~intra], nv[~intra]
        cur_n = len(depths)
    tree = g.ids[rec.tree_positions()]
    return tree, rec, params
