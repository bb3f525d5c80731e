"""Trim ordering and partial LDL^T factorization of tree-plus-edges preconditioners.

Vertices of degree one, and then of degree two, that do not touch a
protected edge are eliminated.  What remains is a small reduced system
``A1`` that is factored densely (or handed to a recursive solver).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .graph import GraphError, SymmetricMatrix, WeightedGraph, components

DENSE_CAP = 2000
EXPLICIT_CAP = 400
SINGULAR_TOL = 1e-9


class FactorizationError(ValueError):
    pass


@dataclass
class TrimOrder:
    """Elimination order ``eliminated`` and the vertices ``remaining``.

    ``reduced_graph`` lives on ``0..len(remaining)-1`` in the order of
    ``remaining``.
    """

    eliminated: np.ndarray
    remaining: np.ndarray
    reduced_graph: WeightedGraph
    protected: np.ndarray


def _adjacency_dict(n, u, v, w):
    adj = [dict() for _ in range(n)]
    for a, b, c in zip(u, v, w):
        adj[a][b] = adj[a].get(b, 0.0) + c
        adj[b][a] = adj[b].get(a, 0.0) + c
    return adj


def trim(n, r_edges, s_edges, partner=None) -> TrimOrder:
    """Trim order for the graph with tree edges ``r_edges`` and protected ``s_edges``.

    Edges are ``(u, v, w)`` triples.  Degree-one vertices are removed first,
    then degree-two vertices, each replaced by an edge of weight
    ``1/(1/w1 + 1/w2)``; endpoints of protected edges are never removed.
    ``partner`` maps a vertex to its cover image, which is eliminated next
    whenever it is eligible.
    """
    edges = list(r_edges) + list(s_edges)
    u = [int(e[0]) for e in edges]
    v = [int(e[1]) for e in edges]
    w = [float(e[2]) for e in edges]
    adj = _adjacency_dict(n, u, v, w)
    protected = np.zeros(n, dtype=bool)
    for e in s_edges:
        protected[int(e[0])] = protected[int(e[1])] = True
    alive = np.ones(n, dtype=bool)
    order = []

    def eligible(x, deg):
        return alive[x] and not protected[x] and 0 < len(adj[x]) <= deg

    def eliminate(x):
        nb = list(adj[x].items())
        for y, _ in nb:
            del adj[y][x]
        if len(nb) == 2:
            (a, wa), (b, wb) = nb
            c = 1.0 / (1.0 / wa + 1.0 / wb)
            adj[a][b] = adj[a].get(b, 0.0) + c
            adj[b][a] = adj[b].get(a, 0.0) + c
        adj[x] = {}
        alive[x] = False
        order.append(x)
        return [y for y, _ in nb]

    # degree-one phase, then a degree-two phase (which also clears any
    # degree-one vertices exposed by merging parallel edges)
    for limit in (1, 2):
        stack = [x for x in range(n - 1, -1, -1) if eligible(x, limit)]
        while stack:
            x = stack.pop()
            if not eligible(x, limit):
                continue
            touched = eliminate(x)
            if partner is not None:
                p = int(partner[x])
                if eligible(p, limit):
                    touched += eliminate(p)
            for y in sorted(set(touched), reverse=True):
                if eligible(y, limit):
                    stack.append(y)
    remaining = np.flatnonzero(alive)
    pos = np.full(n, -1, dtype=np.int64)
    pos[remaining] = np.arange(len(remaining))
    ru, rv, rw = [], [], []
    for a in remaining.tolist():
        for b, c in adj[a].items():
            if a < b:
                ru.append(pos[a])
                rv.append(pos[b])
                rw.append(c)
    red = WeightedGraph(len(remaining), ru, rv, rw)
    return TrimOrder(np.asarray(order, dtype=np.int64), remaining, red, np.flatnonzero(protected))


class DenseReducedSolver:
    """Symmetric-indefinite dense factorization of a PSDDD matrix.

    Singular components are grounded by pinning their first vertex to zero.
    """

    def __init__(self, a1, singular_components=(), cap=DENSE_CAP):
        csr = a1.csr if isinstance(a1, SymmetricMatrix) else sp.csr_matrix(a1)
        k = csr.shape[0]
        if k > cap:
            raise FactorizationError(f"reduced system of size {k} exceeds dense cap {cap}")
        dense = csr.toarray()
        self.pinned = np.array([int(c[0]) for c in singular_components if len(c)], dtype=np.int64)
        for p in self.pinned:
            dense[p, :] = 0.0
            dense[:, p] = 0.0
            dense[p, p] = 1.0
        self.size = k
        if k:
            lu, d, perm = sla.ldl(dense, lower=True)
            self._l = lu[perm]
            self._perm = perm
            self._band = np.zeros((3, k))
            self._band[1] = np.diag(d)
            self._band[0, 1:] = np.diag(d, 1)
            self._band[2, :-1] = np.diag(d, -1)
        self._op = None
        if 0 < k <= EXPLICIT_CAP:
            # small systems: one matvec per solve instead of three triangular calls
            self._op = np.column_stack([self._factored_solve(e) for e in np.eye(k)])

    def solve(self, z):
        if self._op is not None:
            z = np.array(z, dtype=float)
            z[self.pinned] = 0.0
            return self._op @ z
        return self._factored_solve(z)

    def _factored_solve(self, z):
        z = np.array(z, dtype=float)
        if self.size == 0:
            return z
        z[self.pinned] = 0.0
        y = sla.solve_triangular(self._l, z[self._perm], lower=True, unit_diagonal=True,
                                 check_finite=False)
        y = sla.solve_banded((1, 1), self._band, y, check_finite=False)
        y = sla.solve_triangular(self._l, y, trans="T", lower=True, unit_diagonal=True,
                                 check_finite=False)
        x = np.empty_like(y)
        x[self._perm] = y
        x[self.pinned] = 0.0
        return x


@dataclass
class PartialFactorization:
    """``B = P^T L diag(D, A1) L^T P`` with ``L`` unit lower triangular.

    ``perm`` lists eliminated vertices first, then the remaining ones; ``L``,
    ``D`` and ``a1`` are expressed in that order.
    """

    L: sp.csr_matrix
    D: np.ndarray
    a1: SymmetricMatrix
    perm: np.ndarray
    n_eliminated: int
    null_components: list
    a1_singular_components: list
    reduced_solver: object = None
    _tri: object = field(default=None, repr=False)
    _op: object = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return len(self.perm)

    @property
    def eliminated(self) -> np.ndarray:
        return self.perm[: self.n_eliminated]

    @property
    def remaining(self) -> np.ndarray:
        return self.perm[self.n_eliminated:]

    @property
    def nnz_l(self) -> int:
        """Off-diagonal non-zeros of ``L`` (the unit diagonal is implicit)."""
        return int(self.L.nnz - self.n)

    def c_matrix(self) -> sp.csr_matrix:
        return sp.block_diag([sp.diags(self.D), self.a1.csr], format="csr")

    def reconstruct(self) -> sp.csr_matrix:
        """``B`` in original vertex order."""
        inner = (self.L @ self.c_matrix() @ self.L.T).tocsr()
        inv = np.empty_like(self.perm)
        inv[self.perm] = np.arange(self.n)
        return inner[inv][:, inv].tocsr()

    def solve(self, c):
        """Solve ``B y = c`` by forward and back substitution."""
        c = np.asarray(c, dtype=float)
        if c.shape != (self.n,):
            raise GraphError(f"rhs has shape {c.shape}, expected ({self.n},)")
        if self.n == 0:
            return c.copy()
        if self._op is None and self.n <= EXPLICIT_CAP and (
                self.reduced_solver is None or isinstance(self.reduced_solver, DenseReducedSolver)):
            # the whole solve is a fixed linear map; tabulate it once
            self._op = np.column_stack([self._substitute(e) for e in np.eye(self.n)])
        if self._op is not None:
            return self._op @ c
        return self._substitute(c)

    def _substitute(self, c):
        if self._tri is None:
            # natural order with diagonal pivots: the LU factor of L is L itself
            self._tri = splu(self.L.tocsc(), permc_spec="NATURAL", diag_pivot_thresh=0.0,
                             options={"SymmetricMode": True})
        z = self._tri.solve(c[self.perm])
        k = self.n_eliminated
        s = np.empty_like(z)
        s[:k] = z[:k] / self.D
        if self.n - k:
            solver = self.reduced_solver
            s[k:] = solver.solve(z[k:]) if solver is not None else z[k:]
        yp = self._tri.solve(s, trans="T")
        y = np.empty_like(yp)
        y[self.perm] = yp
        for comp in self.null_components:
            y[comp] -= y[comp].mean()
        return y


def singular_components(b) -> list:
    """Components of a PSDDD matrix with no positive off-diagonals whose rows sum to zero."""
    csr = b.csr if isinstance(b, SymmetricMatrix) else sp.csr_matrix(b)
    rows = np.asarray(csr.sum(axis=1)).ravel()
    scale = np.asarray(abs(csr).sum(axis=1)).ravel()
    out = []
    for comp in components(csr):
        if np.all(np.abs(rows[comp]) <= SINGULAR_TOL * np.maximum(scale[comp], 1e-300)):
            out.append(comp)
    return out


def partial_ldl(b, order: TrimOrder, null_components=None, dense_cap=DENSE_CAP,
                factor_reduced=True) -> PartialFactorization:
    """Eliminate the vertices of ``order`` from ``b``.

    ``null_components`` lists the components of ``b`` with zero row sums;
    they are detected numerically when omitted.  When ``factor_reduced`` is
    set the reduced matrix ``A1`` is factored densely.
    """
    csr = b.csr if isinstance(b, SymmetricMatrix) else sp.csr_matrix(b)
    n = csr.shape[0]
    if null_components is None:
        null_components = singular_components(csr)
    diag = csr.diagonal().astype(float).tolist()
    coo = sp.triu(csr, k=1).tocoo()
    adj = _adjacency_dict(n, coo.row.tolist(), coo.col.tolist(), coo.data.tolist())
    elim = order.eliminated.tolist()
    seen = np.zeros(n, dtype=bool)
    seen[elim] = True
    rest = np.flatnonzero(~seen)
    if not np.array_equal(np.sort(rest), np.sort(order.remaining)):
        raise FactorizationError("order does not match the matrix")
    perm = np.concatenate([np.asarray(elim, dtype=np.int64), rest])
    pos = np.empty(n, dtype=np.int64)
    pos[perm] = np.arange(n)
    lr, lc, lv = [], [], []
    dvals = []
    for a in elim:
        nb = adj[a]
        if len(nb) > 2:
            raise FactorizationError(f"vertex {a} has degree {len(nb)} when eliminated")
        d = diag[a]
        if not d > 0:
            raise FactorizationError(f"non-positive pivot {d} at vertex {a}")
        dvals.append(d)
        items = list(nb.items())
        for i, bia in items:
            lr.append(pos[i])
            lc.append(pos[a])
            lv.append(bia / d)
            del adj[i][a]
            diag[i] -= bia * bia / d
        if len(items) == 2:
            (p, bp), (q, bq) = items
            val = -bp * bq / d
            adj[p][q] = adj[p].get(q, 0.0) + val
            adj[q][p] = adj[q].get(p, 0.0) + val
        adj[a] = {}
    k = len(elim)
    lr += list(range(n))
    lc += list(range(n))
    lv += [1.0] * n
    L = sp.csr_matrix((lv, (lr, lc)), shape=(n, n))
    L.sort_indices()
    rpos = {int(x): i for i, x in enumerate(rest.tolist())}
    ar, ac, av = [], [], []
    for x in rest.tolist():
        i = rpos[x]
        ar.append(i)
        ac.append(i)
        av.append(diag[x])
        for y, val in adj[x].items():
            ar.append(i)
            ac.append(rpos[y])
            av.append(val)
    a1 = SymmetricMatrix(sp.csr_matrix((av, (ar, ac)), shape=(len(rest), len(rest))), check=False)
    # a singular component of b maps to a singular component of A1
    a1_null = []
    for comp in null_components:
        left = [rpos[int(x)] for x in comp if int(x) in rpos]
        if left:
            a1_null.append(np.asarray(sorted(left), dtype=np.int64))
    fac = PartialFactorization(L, np.asarray(dvals), a1, perm, k,
                               [np.asarray(c) for c in null_components], a1_null)
    if factor_reduced:
        fac.reduced_solver = DenseReducedSolver(a1, a1_null, cap=dense_cap)
    return fac


def reduced_excess(fac: PartialFactorization) -> np.ndarray:
    """Row-sum excess of ``A1``, exactly zero on singular components."""
    csr = fac.a1.csr
    ex = np.maximum(np.asarray(csr.sum(axis=1)).ravel(), 0.0)
    for comp in fac.a1_singular_components:
        ex[comp] = 0.0
    return ex
