"""Weighted embeddings, dilation/congestion certificates and a dense
generalized-condition-number oracle."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .graph import SymmetricMatrix, WeightedGraph, components

DEFAULT_ORACLE_CAP = 500


class EmbeddingError(ValueError):
    pass


class OracleError(ValueError):
    pass


@dataclass
class WeightedEmbedding:
    """Maps each edge id of ``A`` to a path of edge ids in ``B`` with weights."""

    paths: dict = field(default_factory=dict)

    def add(self, edge_id, path, pis):
        path = tuple(int(f) for f in path)
        pis = tuple(float(p) for p in pis)
        if len(path) != len(pis):
            raise EmbeddingError("path and weight lengths differ")
        self.paths[int(edge_id)] = (path, pis)

    def path(self, edge_id):
        return self.paths[int(edge_id)][0]

    def __contains__(self, edge_id):
        return int(edge_id) in self.paths

    def __len__(self):
        return len(self.paths)

    @classmethod
    def identity(cls, g: WeightedGraph) -> "WeightedEmbedding":
        emb = cls()
        for e in g.ids.tolist():
            emb.add(e, (e,), (1.0,))
        return emb


@dataclass
class CongestionReport:
    dilation: dict
    congestion: dict
    bound: float

    def argmax(self):
        return max(self.congestion, key=self.congestion.get) if self.congestion else None


def _endpoints(g: WeightedGraph, edge_id):
    k = g.index_of(edge_id)
    return int(g.u[k]), int(g.v[k]), float(g.w[k])


def check_path(a: WeightedGraph, b: WeightedGraph, emb: WeightedEmbedding, e) -> None:
    """Raise unless ``path(e)`` is a simple path in ``b`` joining the ends of ``e``."""
    if e not in emb:
        raise EmbeddingError(f"edge {e} is not embedded")
    s, t, _ = _endpoints(a, e)
    path, pis = emb.paths[int(e)]
    if not path:
        raise EmbeddingError(f"edge {e} has an empty path")
    if min(pis) <= 0:
        raise EmbeddingError(f"edge {e} has a non-positive path weight")
    cur, seen = s, {s}
    for f in path:
        try:
            x, y, _ = _endpoints(b, f)
        except KeyError:
            raise EmbeddingError(f"path of edge {e} uses {f}, which is not in B") from None
        if cur == x:
            cur = y
        elif cur == y:
            cur = x
        else:
            raise EmbeddingError(f"path of edge {e} is not contiguous at edge {f}")
        if cur in seen:
            raise EmbeddingError(f"path of edge {e} is not simple")
        seen.add(cur)
    if cur != t:
        raise EmbeddingError(f"path of edge {e} ends at {cur}, expected {t}")


def weighted_dilation(a: WeightedGraph, b: WeightedGraph, emb: WeightedEmbedding, e) -> float:
    """``sum_{f in path(e)} a_e / (b_f pi(e, f))``."""
    if e not in emb:
        raise EmbeddingError(f"edge {e} is not embedded")
    _, _, ae = _endpoints(a, e)
    path, pis = emb.paths[int(e)]
    return math.fsum(ae / (b.w[b.index_of(f)] * p) for f, p in zip(path, pis))


def congestion_certificate(a: WeightedGraph, b: WeightedGraph, emb: WeightedEmbedding,
                           validate=True) -> CongestionReport:
    """Per-edge dilations and congestions; ``bound`` upper-bounds ``kappa_f(A, B)``
    when ``b`` is a subgraph of ``a``."""
    if validate:
        for e in a.ids.tolist():
            check_path(a, b, emb, e)
    dil = {}
    terms = {}
    for e in a.ids.tolist():
        d = weighted_dilation(a, b, emb, e)
        dil[e] = d
        path, pis = emb.paths[e]
        for f, p in zip(path, pis):
            terms.setdefault(f, []).append(d * p)
    cong = {f: math.fsum(v) for f, v in terms.items()}
    return CongestionReport(dil, cong, max(cong.values()) if cong else 1.0)


# ---------------------------------------------------------------- oracle ---

def _as_dense(x):
    if isinstance(x, SymmetricMatrix):
        return x.toarray()
    if sp.issparse(x):
        return x.toarray()
    return np.asarray(x, dtype=float)


def null_basis(a) -> np.ndarray:
    """Orthonormal null-space basis of a PSDDD matrix.

    Matrices without positive off-diagonals are handled structurally: each
    connected component of zero total excess contributes its normalized
    indicator vector.  Other matrices fall back to an eigenvalue threshold.
    """
    dense = _as_dense(a)
    n = dense.shape[0]
    off = dense - np.diag(np.diag(dense))
    if np.all(off <= 0):
        rows = dense.sum(axis=1)
        scale = np.abs(dense).sum(axis=1)
        cols = []
        for comp in components(sp.csr_matrix(off)):
            if np.all(np.abs(rows[comp]) <= 1e-9 * np.maximum(scale[comp], 1e-300)):
                v = np.zeros(n)
                v[comp] = 1.0 / math.sqrt(len(comp))
                cols.append(v)
        return np.array(cols).T.reshape(n, len(cols))
    vals, vecs = np.linalg.eigh(dense)
    tol = max(abs(vals).max(), 1e-300) * n * 1e-12
    return vecs[:, vals <= tol]


def finite_condition(a, cap=DEFAULT_ORACLE_CAP) -> float:
    """Ratio of the largest to the smallest non-zero eigenvalue."""
    dense = _as_dense(a)
    if dense.shape[0] > cap:
        raise OracleError(f"dimension {dense.shape[0]} exceeds oracle cap {cap}")
    nb = null_basis(dense)
    q = sla.null_space(nb.T) if nb.shape[1] else np.eye(dense.shape[0])
    if q.shape[1] == 0:
        return 1.0
    vals = np.linalg.eigvalsh(q.T @ dense @ q)
    return float(vals[-1] / vals[0])


def generalized_extremes(a, b, cap=DEFAULT_ORACLE_CAP):
    """Extreme generalized eigenvalues of the pencil ``(A, B)`` on the common range."""
    ad, bd = _as_dense(a), _as_dense(b)
    n = ad.shape[0]
    if bd.shape != ad.shape:
        raise OracleError("dimension mismatch")
    if n > cap:
        raise OracleError(f"dimension {n} exceeds oracle cap {cap}")
    na, nb = null_basis(ad), null_basis(bd)
    if na.shape[1] != nb.shape[1]:
        raise OracleError(f"span mismatch: null spaces of dimension {na.shape[1]} and {nb.shape[1]}")
    if na.shape[1]:
        scale = max(np.abs(bd).max(), 1e-300)
        if np.abs(bd @ na).max() > 1e-9 * scale * max(1.0, math.sqrt(n)):
            raise OracleError("span mismatch: null spaces differ")
        q = sla.null_space(na.T)
    else:
        q = np.eye(n)
    if q.shape[1] == 0:
        return 1.0, 1.0
    ar = q.T @ ad @ q
    br = q.T @ bd @ q
    ar = 0.5 * (ar + ar.T)
    br = 0.5 * (br + br.T)
    vals = sla.eigh(ar, br, eigvals_only=True)
    return float(vals[0]), float(vals[-1])


def kappa_f_oracle(a, b, cap=DEFAULT_ORACLE_CAP) -> float:
    """``kappa_f(A, B) = lambda_max / lambda_min`` of the pencil on the common range."""
    lo, hi = generalized_extremes(a, b, cap)
    return hi / lo


def support_oracle(a, b, cap=DEFAULT_ORACLE_CAP) -> float:
    """``sigma(A, B)``: the largest generalized eigenvalue of ``(A, B)``."""
    return generalized_extremes(a, b, cap)[1]
