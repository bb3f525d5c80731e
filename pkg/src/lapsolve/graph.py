"""Weighted graphs, symmetric sparse matrices and the graph/Laplacian correspondence."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

LAPLACIAN = "laplacian"
PSDDD = "psddd-general"
NOT_PSDDD = "not-psddd"

REL_TOL = 1e-9


class GraphError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Undirected multigraph on vertices ``0..n-1`` with positive edge weights.

    Every edge carries a stable integer id.  When no ids are given the edges
    are numbered ``0..m-1``.  Parallel edges are kept as distinct edges.
    """

    n: int
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    ids: np.ndarray = None
    _index: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        u = np.asarray(self.u, dtype=np.int64).reshape(-1)
        v = np.asarray(self.v, dtype=np.int64).reshape(-1)
        w = np.asarray(self.w, dtype=float).reshape(-1)
        if not (len(u) == len(v) == len(w)):
            raise GraphError("edge arrays differ in length")
        ids = np.arange(len(u), dtype=np.int64) if self.ids is None else np.asarray(self.ids, dtype=np.int64).reshape(-1)
        if len(ids) != len(u):
            raise GraphError("edge id array has the wrong length")
        if self.n < 0:
            raise GraphError("negative vertex count")
        if len(u):
            if u.min() < 0 or v.min() < 0 or u.max() >= self.n or v.max() >= self.n:
                raise GraphError("edge endpoint out of range")
            if np.any(u == v):
                raise GraphError("self-loops are not allowed")
            if not np.all(np.isfinite(w)) or np.any(w <= 0):
                raise GraphError("edge weights must be finite and strictly positive")
            if len(np.unique(ids)) != len(ids):
                raise GraphError("edge ids must be unique")
        for name, arr in (("u", u), ("v", v), ("w", w), ("ids", ids)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_edges(cls, n, edges, ids=None) -> "WeightedGraph":
        """Build from an iterable of ``(u, v, w)`` triples."""
        edges = list(edges)
        if not edges:
            return cls(n, np.empty(0, np.int64), np.empty(0, np.int64), np.empty(0), ids)
        arr = np.asarray(edges, dtype=float)
        return cls(n, arr[:, 0].astype(np.int64), arr[:, 1].astype(np.int64), arr[:, 2], ids)

    @property
    def m(self) -> int:
        return len(self.u)

    def index_of(self, edge_id) -> int:
        """Position of the edge with the given id."""
        if self._index is None:
            object.__setattr__(self, "_index", {int(e): k for k, e in enumerate(self.ids)})
        try:
            return self._index[int(edge_id)]
        except KeyError:
            raise KeyError(f"no edge with id {edge_id}") from None

    def edges(self):
        for a, b, c, e in zip(self.u.tolist(), self.v.tolist(), self.w.tolist(), self.ids.tolist()):
            yield a, b, c, e

    def subgraph(self, edge_ids) -> "WeightedGraph":
        """Edge-induced subgraph on the same vertex set, ids preserved."""
        pos = np.array([self.index_of(e) for e in edge_ids], dtype=np.int64)
        if len(pos) == 0:
            return WeightedGraph(self.n, [], [], [], [])
        return WeightedGraph(self.n, self.u[pos], self.v[pos], self.w[pos], self.ids[pos])

    def degrees(self) -> np.ndarray:
        return np.bincount(np.concatenate([self.u, self.v]), minlength=self.n)

    def adjacency(self) -> sp.csr_matrix:
        """Symmetric weighted adjacency with parallel edges summed."""
        a = sp.coo_matrix((np.concatenate([self.w, self.w]),
                           (np.concatenate([self.u, self.v]), np.concatenate([self.v, self.u]))),
                          shape=(self.n, self.n))
        return a.tocsr()

    def merged(self) -> "WeightedGraph":
        """Simple graph obtained by summing parallel edges (ids renumbered)."""
        a = sp.triu(self.adjacency(), k=1).tocoo()
        return WeightedGraph(self.n, a.row, a.col, a.data)


class SymmetricMatrix:
    """Symmetric sparse matrix with its PSDDD classification.

    Wraps a canonical CSR matrix.  Construction validates symmetry to a
    relative tolerance of ``1e-9``.
    """

    def __init__(self, a, check=True):
        csr = sp.csr_matrix(a, dtype=float)
        if csr.shape[0] != csr.shape[1]:
            raise GraphError(f"matrix is not square: {csr.shape}")
        csr.sum_duplicates()
        csr.eliminate_zeros()
        csr.sort_indices()
        if check and not is_symmetric(csr):
            raise GraphError("matrix is not symmetric")
        self.csr = csr
        self._classification = None

    @classmethod
    def from_dense(cls, a) -> "SymmetricMatrix":
        return cls(np.asarray(a, dtype=float))

    @property
    def n(self) -> int:
        return self.csr.shape[0]

    @property
    def shape(self):
        return self.csr.shape

    @property
    def nnz(self) -> int:
        return self.csr.nnz

    @property
    def classification(self) -> str:
        if self._classification is None:
            self._classification = _classify(self.csr)
        return self._classification

    def diagonal(self) -> np.ndarray:
        return self.csr.diagonal()

    def entries(self):
        """Coordinate triples ``(i, j, value)`` of every stored entry."""
        c = self.csr.tocoo()
        return list(zip(c.row.tolist(), c.col.tolist(), c.data.tolist()))

    def toarray(self) -> np.ndarray:
        return self.csr.toarray()

    def __matmul__(self, x):
        return apply(self, x)

    def __add__(self, other):
        if isinstance(other, SymmetricMatrix):
            other = other.csr
        return SymmetricMatrix(self.csr + other, check=False)

    def __repr__(self):
        return f"SymmetricMatrix(n={self.n}, nnz={self.nnz}, {self.classification})"


def is_symmetric(a: sp.spmatrix, rtol=REL_TOL) -> bool:
    diff = abs(a - a.T)
    if diff.nnz == 0:
        return True
    scale = abs(a).max()
    return diff.max() <= rtol * scale


def _classify(a: sp.csr_matrix, rtol=REL_TOL) -> str:
    n = a.shape[0]
    diag = a.diagonal()
    off = a - sp.diags(diag)
    absrow = np.asarray(abs(off).sum(axis=1)).ravel()
    scale = np.maximum(np.abs(diag), absrow)
    tol = rtol * np.where(scale > 0, scale, 1.0)
    if np.any(diag < -tol) or np.any(diag + tol < absrow):
        return NOT_PSDDD
    if n and off.nnz and off.data.max() > 0:
        return PSDDD
    rowsum = diag - absrow
    if np.all(np.abs(rowsum) <= tol):
        return LAPLACIAN
    return PSDDD


def laplacian_of(g: WeightedGraph) -> SymmetricMatrix:
    """Laplacian ``D - W`` of ``g``; parallel edges sum into one entry."""
    adj = g.adjacency()
    deg = np.asarray(adj.sum(axis=1)).ravel()
    lap = SymmetricMatrix(sp.diags(deg) - adj, check=False)
    lap._classification = LAPLACIAN
    return lap


def graph_of(a: SymmetricMatrix, allow_excess=False) -> WeightedGraph:
    """Weighted graph of a matrix with non-positive off-diagonals.

    Edge weights are the negated off-diagonal entries.  Unless
    ``allow_excess`` is set the matrix must be a Laplacian.
    """
    csr = a.csr if isinstance(a, SymmetricMatrix) else sp.csr_matrix(a)
    up = sp.triu(csr, k=1).tocoo()
    if up.nnz and up.data.max() > 0:
        raise GraphError("matrix has positive off-diagonal entries")
    if not allow_excess and isinstance(a, SymmetricMatrix) and a.classification != LAPLACIAN:
        raise GraphError("matrix is not a Laplacian")
    return WeightedGraph(csr.shape[0], up.row, up.col, -up.data)


def apply(a, x) -> np.ndarray:
    """Sparse product ``A @ x``."""
    csr = a.csr if isinstance(a, SymmetricMatrix) else a
    x = np.asarray(x, dtype=float)
    if x.shape[0] != csr.shape[1]:
        raise GraphError(f"dimension mismatch: matrix {csr.shape}, vector {x.shape}")
    return csr @ x


def quadratic_form(g: WeightedGraph, x) -> float:
    """``sum_e w_e (x_u - x_v)^2``."""
    x = np.asarray(x, dtype=float)
    d = x[g.u] - x[g.v]
    return float(np.sum(g.w * d * d))


def components(g) -> list:
    """Connected components as sorted vertex arrays, ordered by smallest vertex."""
    if isinstance(g, WeightedGraph):
        n, adj = g.n, g.adjacency()
    else:
        csr = g.csr if isinstance(g, SymmetricMatrix) else sp.csr_matrix(g)
        n, adj = csr.shape[0], csr
    if n == 0:
        return []
    _, labels = connected_components(adj, directed=False)
    order = np.argsort(labels, kind="stable")
    splits = np.flatnonzero(np.diff(labels[order])) + 1
    comps = np.split(order, splits)
    comps.sort(key=lambda c: c[0])
    return comps


def component_labels(g) -> np.ndarray:
    labels = np.empty(g.n if isinstance(g, WeightedGraph) else g.shape[0], dtype=np.int64)
    for k, c in enumerate(components(g)):
        labels[c] = k
    return labels
