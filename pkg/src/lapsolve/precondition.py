"""Spanning tree plus augmentation edges, with an embedding certificate.

For every level ``j`` of the low-stretch tree construction, each tree of
``F^{j+1}`` is decomposed with respect to the edges ``H^j`` that became
internal to it.  For every pair of decomposition sets the heaviest ``H^j``
edge between them joins the augmentation set ``S``.  Every edge of the
input graph is then routed through ``B = R + S`` and the routing yields a
congestion bound on ``kappa_f(A, B)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .akpw import LevelRecords, ParameterSchedule, akpw
from .decompose import decompose
from .graph import GraphError, WeightedGraph, components, laplacian_of
from .support import CongestionReport, WeightedEmbedding, congestion_certificate
from .trees import RootedForest

PHI_FLOOR = np.finfo(float).eps


@dataclass
class LevelStats:
    level: int
    trees: int
    settled: int
    sets: int
    added: int
    phi_floored: int


@dataclass
class PreconditionerGraph:
    """Preconditioner ``B`` given by tree edges ``R`` and augmentation edges ``S``.

    ``tree`` and ``extra`` hold edge ids of ``graph``; ``extra`` may overlap
    ``tree`` (an edge of both is used once in ``B``).
    """

    graph: WeightedGraph
    tree: np.ndarray
    extra: np.ndarray
    t: int
    params: ParameterSchedule
    records: LevelRecords
    embedding: WeightedEmbedding
    certificate: CongestionReport
    gremban_cover_mode: bool = False
    levels: list = field(default_factory=list)

    @property
    def edge_ids(self) -> np.ndarray:
        return np.union1d(self.tree, self.extra)

    def subgraph(self) -> WeightedGraph:
        return self.graph.subgraph(self.edge_ids.tolist())

    def matrix(self):
        return laplacian_of(self.subgraph())

    @property
    def size_budget(self) -> float:
        """``8 rho^2 t^2`` (doubled in cover mode, where ``S`` gains mirror images)."""
        b = 8.0 * self.params.rho ** 2 * self.t ** 2
        return 2 * b if self.gremban_cover_mode else b

    @property
    def theory_bound(self) -> float:
        """Explicit congestion bound ``(rho+1)(2rho+5) mu^rho y^2 m / t``."""
        p = self.params
        try:
            return (p.rho + 1) * (2 * p.rho + 5) * p.mu ** p.rho * p.y ** 2 * self.graph.m / self.t
        except OverflowError:
            return math.inf

    @property
    def phi_floor_events(self) -> int:
        return sum(s.phi_floored for s in self.levels)

    def summary(self) -> dict:
        return {
            "n": self.graph.n,
            "m": self.graph.m,
            "t": self.t,
            "tree_edges": int(len(self.tree)),
            "extra_edges": int(len(self.extra)),
            "rho": self.params.rho,
            "x": self.params.x,
            "y": self.params.y,
            "certificate_bound": self.certificate.bound,
            "levels": len(self.levels),
            "phi_floor_events": self.phi_floor_events,
        }


def _loop_erase(start, steps):
    """Loop-erase a walk given as ``(edge, next_vertex)`` steps."""
    verts = [start]
    edges = []
    where = {start: 0}
    for e, x in steps:
        if x in where:
            k = where[x]
            for y in verts[k + 1:]:
                del where[y]
            verts = verts[: k + 1]
            edges = edges[:k]
        else:
            where[x] = len(verts)
            verts.append(x)
            edges.append(e)
    return edges


def _walk(g, start, positions):
    steps = []
    cur = start
    for p in positions:
        a, b = int(g.u[p]), int(g.v[p])
        cur = b if cur == a else a
        steps.append((p, cur))
    return steps


def cover_partners(g: WeightedGraph) -> np.ndarray:
    """Position of the mirror image of every edge of a Gremban cover."""
    half = g.n // 2
    key = {}
    for p, (a, b) in enumerate(zip(g.u.tolist(), g.v.tolist())):
        key[(min(a, b), max(a, b))] = p
    out = np.empty(g.m, dtype=np.int64)
    for p, (a, b) in enumerate(zip(g.u.tolist(), g.v.tolist())):
        a2, b2 = (a + half) % g.n, (b + half) % g.n
        q = key.get((min(a2, b2), max(a2, b2)))
        if q is None:
            raise GraphError(f"edge ({a},{b}) has no mirror image in the cover")
        out[p] = q
    return out


def precondition(g: WeightedGraph, t, gremban=False, validate=True) -> PreconditionerGraph:
    """Build the preconditioner of a connected graph with parameter ``t``.

    With ``gremban`` set, ``g`` must be a Gremban cover and ``S`` is closed
    under the cover involution.
    """
    t = int(t)
    if not 1 <= t <= max(g.n, 1):
        raise ValueError(f"t must lie in [1, {g.n}], got {t}")
    if g.n == 0 or len(components(g)) != 1:
        raise GraphError("graph must be connected and non-empty")
    tree_ids, rec, params = akpw(g)
    wn = g.w / rec.scale
    m = g.m
    settled_at = rec.settled_level()

    extra_pos = set()
    # per edge: (level, forest, owner map, chosen pair edges) for routing
    plans = {}
    stats = []
    forest_pos = np.zeros(0, dtype=np.int64)
    for lv in rec.levels:
        j = lv.j
        forest_pos = np.concatenate([forest_pos, lv.forest])
        if len(lv.settled) == 0:
            stats.append(LevelStats(j, 0, 0, 0, 0, 0))
            continue
        forest = RootedForest(g.n, g.u[forest_pos], g.v[forest_pos], forest_pos)
        hs = lv.settled
        hl = lv.labels[g.u[hs]]
        order = np.argsort(hl, kind="stable")
        hs, hl = hs[order], hl[order]
        cuts = np.flatnonzero(np.diff(hl)) + 1
        try:
            theta = params.theta(j)
        except OverflowError:
            theta = math.inf
        n_sets = n_added = floored = 0
        groups = np.split(hs, cuts)
        for grp in groups:
            hu, hv, hw = g.u[grp], g.v[grp], wn[grp]
            vs, vedges = forest.virtual_tree(np.concatenate([hu, hv]))
            local = {int(x): k for k, x in enumerate(vs.tolist())}
            tu = [local[a] for a, _ in vedges]
            tv = [local[b] for _, b in vedges]
            lu = np.array([local[int(a)] for a in hu])
            lv_ = np.array([local[int(b)] for b in hv])
            w_tot = math.fsum(hw.tolist())
            phi = m / (t * theta)
            if phi < PHI_FLOOR * w_tot:
                phi = PHI_FLOOR * w_tot
                floored += 1
            dec = decompose(len(vs), tu, tv, lu, lv_, hw, phi)
            n_sets += len(dec)
            best = {}
            for k, p in enumerate(grp.tolist()):
                a, b = int(dec.sigma[k, 0]), int(dec.sigma[k, 1])
                key = (min(a, b), max(a, b))
                cand = (-wn[p], int(g.ids[p]), p)
                if key not in best or cand < best[key]:
                    best[key] = cand
            chosen = {key: c[2] for key, c in best.items()}
            for p in chosen.values():
                if p not in extra_pos:
                    extra_pos.add(p)
                    n_added += 1
            owner = {int(x): int(dec.owner[k]) for k, x in enumerate(vs.tolist())}
            for k, p in enumerate(grp.tolist()):
                plans[p] = (forest, owner, chosen)
        stats.append(LevelStats(j, len(groups), len(lv.settled), n_sets, n_added, floored))

    if gremban:
        partner = cover_partners(g)
        extra_pos |= {int(partner[p]) for p in extra_pos}
    extra_pos = np.array(sorted(extra_pos), dtype=np.int64)
    tree_pos = rec.tree_positions()
    in_b = np.zeros(m, dtype=bool)
    in_b[tree_pos] = True
    in_b[extra_pos] = True

    emb = WeightedEmbedding()
    ids = g.ids
    for p in range(m):
        e = int(ids[p])
        if in_b[p]:
            emb.add(e, (e,), (1.0,))
            continue
        forest, owner, chosen = plans[p]
        a, b = int(g.u[p]), int(g.v[p])
        oa, ob = owner[a], owner[b]
        if oa == ob:
            path = forest.path(a, b)
        else:
            q = chosen[(min(oa, ob), max(oa, ob))]
            qa, qb = int(g.u[q]), int(g.v[q])
            if owner[qa] != oa:
                qa, qb = qb, qa
            steps = _walk(g, a, forest.path(a, qa))
            steps.append((q, qb))
            steps += _walk(g, qb, forest.path(qb, b))
            path = _loop_erase(a, steps)
        j = int(settled_at[p])
        pis = [params.tau(j, int(rec.eindex[f])) for f in path]
        emb.add(e, ids[path].tolist(), pis)

    bgraph = g.subgraph(ids[np.flatnonzero(in_b)].tolist())
    cert = congestion_certificate(g, bgraph, emb, validate=validate)
    return PreconditionerGraph(g, ids[tree_pos], ids[extra_pos], t, params, rec, emb, cert,
                               gremban, stats)
