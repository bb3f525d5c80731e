"""Reduce a PSDDD system to independent connected Laplacian(+excess) systems.

The order is fixed: split off the diagonal excess, take the Gremban cover
when positive off-diagonals exist, then split into connected components.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .graph import (LAPLACIAN, NOT_PSDDD, GraphError, SymmetricMatrix, WeightedGraph,
                    components, graph_of, is_symmetric, _classify)

RANGE_TOL = 1e-9


class NotPSDDDError(ValueError):
    code = "not-psddd"


class RangeError(ValueError):
    code = "rhs-not-in-range"


@dataclass
class ReductionPlan:
    diagonal_excess: np.ndarray
    gremban_applied: bool
    component_map: list
    original_dimension: int

    @property
    def reduced_dimension(self) -> int:
        return 2 * self.original_dimension if self.gremban_applied else self.original_dimension


@dataclass
class ReducedSystem:
    """One connected system ``(L + diag(excess)) x = rhs``.

    ``index`` lists the coordinates of the (possibly covered) full system
    that this component occupies.
    """

    graph: WeightedGraph
    excess: np.ndarray
    rhs: np.ndarray
    index: np.ndarray

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def singular(self) -> bool:
        return not np.any(self.excess > 0)

    def matrix(self) -> SymmetricMatrix:
        from .graph import laplacian_of
        lap = laplacian_of(self.graph)
        if np.any(self.excess > 0):
            return SymmetricMatrix(lap.csr + sp.diags(self.excess), check=False)
        return lap


def classify(a: SymmetricMatrix) -> str:
    if not isinstance(a, SymmetricMatrix):
        csr = sp.csr_matrix(a, dtype=float)
        if not is_symmetric(csr):
            raise GraphError("matrix is not symmetric")
        return _classify(csr)
    return a.classification


def _require_psddd(a: SymmetricMatrix):
    if classify(a) == NOT_PSDDD:
        raise NotPSDDDError("not-psddd: matrix is not diagonally dominant with non-negative diagonal")


def split_diagonal_excess(a: SymmetricMatrix):
    """Return ``(a0, d)`` with ``a = a0 + diag(d)`` and ``a0`` of zero excess."""
    _require_psddd(a)
    d = _row_excess(a.csr)
    a0 = SymmetricMatrix(a.csr - sp.diags(d), check=False)
    return a0, d


def _row_excess(csr) -> np.ndarray:
    """``A_ii - sum_j |A_ij|`` clipped at zero; values at roundoff level count as zero."""
    diag = csr.diagonal()
    absrow = np.asarray(abs(csr).sum(axis=1)).ravel() - np.abs(diag)
    d = np.maximum(diag - absrow, 0.0)
    terms = np.diff(csr.indptr)
    d[d <= terms * np.finfo(float).eps * (np.abs(diag) + absrow)] = 0.0
    return d


def gremban_cover(a: SymmetricMatrix):
    """Cover ``[[D + A_n, -A_p], [-A_p, D + A_n]]`` of a dominant symmetric matrix."""
    csr = a.csr
    n = csr.shape[0]
    diag = csr.diagonal()
    off = (csr - sp.diags(diag)).tocoo()
    neg = off.data < 0
    an = sp.coo_matrix((off.data[neg], (off.row[neg], off.col[neg])), shape=(n, n))
    ap = sp.coo_matrix((off.data[~neg], (off.row[~neg], off.col[~neg])), shape=(n, n))
    same = sp.diags(diag) + an
    cover = sp.bmat([[same, -ap], [-ap, same]], format="csr")
    excess = _row_excess(csr)
    plan = ReductionPlan(np.concatenate([excess, excess]), True, [], n)
    return SymmetricMatrix(cover, check=False), plan


def is_gremban_cover(g: WeightedGraph) -> bool:
    """Check the three structural conditions of a Gremban cover."""
    if g.n % 2:
        return False
    half = g.n // 2
    for x, y, _, _ in g.edges():
        if abs(x - y) == half and min(x, y) < half <= max(x, y):
            return False
    adj = g.adjacency()
    perm = np.concatenate([np.arange(half, g.n), np.arange(half)])
    swapped = adj[perm][:, perm]
    return abs(swapped - adj).max() <= 1e-12 * max(abs(adj).max(), 1.0) if adj.nnz else True


def _has_positive_offdiag(csr) -> bool:
    off = sp.triu(csr, k=1)
    return off.nnz > 0 and off.data.max() > 0


def reduce(a: SymmetricMatrix, b):
    """Split ``a x = b`` into connected Laplacian(+excess) systems.

    Returns ``(systems, plan)``; use :func:`back_substitute` to assemble the
    solution of the original system from per-system solutions.
    """
    _require_psddd(a)
    b = np.asarray(b, dtype=float)
    n = a.n
    if b.shape != (n,):
        raise GraphError(f"rhs has shape {b.shape}, expected ({n},)")
    a0, d = split_diagonal_excess(a)
    gremban = _has_positive_offdiag(a0.csr)
    if gremban:
        cover, _ = gremban_cover(a0)
        lap = cover
        excess = np.concatenate([d, d])
        rhs = np.concatenate([b, -b])
    else:
        lap, excess, rhs = a0, d, b
    g = graph_of(lap, allow_excess=True)
    comps = components(g)
    bnorm = float(np.linalg.norm(b))
    systems = []
    pos = np.empty(g.n, dtype=np.int64)
    for comp in comps:
        pos[comp] = np.arange(len(comp))
        mask = np.isin(g.u, comp)
        sub = WeightedGraph(len(comp), pos[g.u[mask]], pos[g.v[mask]], g.w[mask])
        sys_ = ReducedSystem(sub, excess[comp].copy(), rhs[comp].copy(), comp)
        if sys_.singular and abs(sys_.rhs.sum()) > RANGE_TOL * bnorm:
            raise RangeError(
                f"rhs-not-in-range: component starting at vertex {int(comp[0])} has rhs sum {sys_.rhs.sum():.3e}")
        systems.append(sys_)
    plan = ReductionPlan(d, gremban, comps, n)
    return systems, plan


def back_substitute(plan: ReductionPlan, systems, solutions) -> np.ndarray:
    """Assemble the solution of the original system from component solutions."""
    full = np.zeros(plan.reduced_dimension)
    for s, x in zip(systems, solutions):
        full[s.index] = x
    if plan.gremban_applied:
        n = plan.original_dimension
        return 0.5 * (full[:n] - full[n:])
    return full


def cover_solution(plan: ReductionPlan, systems, solutions) -> np.ndarray:
    """Full solution vector of the covered system (length ``2n`` under Gremban)."""
    full = np.zeros(plan.reduced_dimension)
    for s, x in zip(systems, solutions):
        full[s.index] = x
    return full
