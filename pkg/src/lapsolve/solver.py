"""One-shot and recursive solvers for PSDDD systems.

A system is reduced to connected Laplacian(+excess) systems.  Each is solved
by Chebyshev iteration preconditioned with a tree-plus-edges matrix ``B``;
``B`` is partially factored in trim order and its reduced block ``A1`` is
either factored densely or, in the recursive solver, solved by the same
method one level down.
"""
from __future__ import annotations

import dataclasses
import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import shortest_path

from .chebyshev import ChebyshevConfig, ChebyshevError, chebyshev
from .elimination import (DENSE_CAP, DenseReducedSolver, FactorizationError, partial_ldl,
                          reduced_excess, trim)
from .graph import SymmetricMatrix, WeightedGraph, graph_of, laplacian_of
from .precondition import precondition
from .reductions import (ReducedSystem, back_substitute, classify, cover_solution,
                         is_gremban_cover, reduce)
from .support import DEFAULT_ORACLE_CAP, finite_condition

log = logging.getLogger("lapsolve")

ONE_SHOT_GAMMA = 3.0 / 13.0
RECURSIVE_GAMMA = (3.0 - math.sqrt(5.0)) / 2.0
# smallest relative residuals requested from the outer and the inner Chebyshev runs
RESIDUAL_FLOOR = 1e-13
INNER_RESIDUAL_FLOOR = 1e-11
BACKWARD_TOL = float(np.finfo(float).eps)


class PlanError(ValueError):
    code = "plan"


class SolverError(RuntimeError):
    code = "solver-failure"


@dataclass
class RecursionPlan:
    """Depth ``r`` and exponent ``gamma`` with ``t_i = ceil(m_i ** gamma)``.

    ``t`` overrides ``t_1`` for the top level.  Systems ``A_r`` at the bottom
    are factored densely and must not exceed ``dense_cap``.
    """

    depth: int = 2
    gamma: float = RECURSIVE_GAMMA
    t: int = None
    dense_cap: int = DENSE_CAP
    oracle_cap: int = DEFAULT_ORACLE_CAP

    def __post_init__(self):
        if self.depth < 1:
            raise PlanError("depth must be at least 1")
        if not 0 < self.gamma < 1:
            raise PlanError("gamma must lie in (0, 1)")


@dataclass
class LevelReport:
    level: int
    n: int
    m: int
    t: int
    tree_edges: int
    extra_edges: int
    certificate_bound: float
    reduced_n: int
    reduced_m: int
    eliminated: int
    nnz_l: int
    eps_target: float = None
    residual_target: float = None
    clamped: bool = False
    inner_solves: int = 0
    inner_iterations: int = 0
    inner_capped: int = 0
    inner_max_residual: float = 0.0


@dataclass
class SystemReport:
    n: int
    m: int
    singular: bool
    cover: bool
    kappa_f: float
    kappa_source: str
    residual_target: float
    clamped: bool
    iterations: int
    converged: bool
    rho: int
    x: float
    y: float
    residual_history: list
    levels: list
    roundoff_stop: bool = False


@dataclass
class SolveReport:
    """Deterministic record of one solve (no timing information)."""

    method: str
    n: int
    nnz: int
    classification: str
    gremban: bool
    components: int
    eps: float
    gamma: float
    depth: int
    iterations: int
    converged: bool
    residual_target: float
    final_relative_residual: float
    certificate_bound: float
    tree_edges: int
    extra_edges: int
    rho: int
    x: float
    y: float
    kappa_source: str
    systems: list = field(default_factory=list)

    @property
    def target_met(self) -> bool:
        return self.converged

    @property
    def residual_history(self) -> list:
        if not self.systems:
            return []
        return max(self.systems, key=lambda s: s.n).residual_history

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), default=_plain)


def _plain(v):
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    raise TypeError(f"cannot serialize {type(v).__name__}")


# --------------------------------------------------------------- estimates ---

def apriori_condition(graph: WeightedGraph, excess) -> float:
    """Entry-based upper bound on ``kappa_f`` of ``L(graph) + diag(excess)``.

    Uses ``lambda_max <= max_i (2 deg_i + excess_i)``, the diameter bound
    ``lambda_2 >= 4 w_min / (n D)`` and, with excess present,
    ``lambda_min >= min(e_max / (8n), lambda_2 / (4n + 1))``.
    """
    n = graph.n
    excess = np.asarray(excess, dtype=float)
    if graph.m == 0:
        return 1.0
    deg = np.bincount(graph.u, weights=graph.w, minlength=n) + np.bincount(graph.v, weights=graph.w, minlength=n)
    hi = float(np.max(2 * deg + excess))
    far = shortest_path(graph.adjacency(), unweighted=True, directed=False, indices=[0])[0]
    diam = max(1.0, 2.0 * float(np.max(far[np.isfinite(far)])))
    lam2 = 4.0 * float(graph.w.min()) / (n * diam)
    if np.any(excess > 0):
        lo = min(float(excess.max()) / (8 * n), lam2 / (4 * n + 1))
    else:
        lo = lam2
    return max(1.0, hi / lo)


def condition_estimate(matrix, graph, excess, cap):
    """``(kappa_f, source)`` from the dense oracle when small enough, else a priori."""
    if matrix.shape[0] <= 1:
        return 1.0, "exact"
    if matrix.shape[0] <= cap:
        return finite_condition(matrix, cap), "oracle"
    return apriori_condition(graph, excess), "a-priori"


# ---------------------------------------------------------------- levels ---

class _Level:
    """Preconditioned Chebyshev solver for one matrix ``A_i`` of the hierarchy."""

    def __init__(self, matrix, graph, excess, singular, plan, index, t=None, cover=False):
        self.matrix = matrix
        self.graph = graph
        self.singular = singular
        self.index = index
        self.child = None
        self.kappa_f = None
        n, m = graph.n, graph.m
        if t is None:
            t = int(math.ceil(m ** plan.gamma)) if m else 1
        t = min(max(1, int(t)), max(n, 1))
        self.pre = precondition(graph, t, gremban=cover)
        bgraph = self.pre.subgraph()
        bmat = laplacian_of(bgraph)
        if np.any(excess > 0):
            bmat = SymmetricMatrix(bmat.csr + sp.diags(excess), check=False)
        self.b = bmat
        tree = set(self.pre.tree.tolist())
        r_edges = [_triple(graph, e) for e in self.pre.tree.tolist()]
        s_edges = [_triple(graph, e) for e in self.pre.extra.tolist() if e not in tree]
        partner = (np.arange(n) + n // 2) % n if cover else None
        order = trim(n, r_edges, s_edges, partner)
        nulls = [np.arange(n)] if singular else []
        self.fac = partial_ldl(bmat, order, nulls, dense_cap=plan.dense_cap, factor_reduced=False)
        a1 = self.fac.a1
        self.report = LevelReport(index, n, m, t, len(self.pre.tree), len(self.pre.extra),
                                  self.pre.certificate.bound, a1.n, int((a1.nnz - a1.n) // 2),
                                  self.fac.n_eliminated, self.fac.nnz_l)
        recurse = index < plan.depth and a1.n > 1 and a1.nnz > a1.n
        if recurse:
            ex1 = reduced_excess(self.fac)
            g1 = graph_of(SymmetricMatrix(a1.csr - sp.diags(a1.diagonal()), check=False), allow_excess=True)
            self.child = _Level(a1, g1, ex1, singular, plan, index + 1)
            self.fac.reduced_solver = self.child
        else:
            if a1.n > plan.dense_cap:
                raise PlanError(f"reduced system of size {a1.n} at depth {index} exceeds dense cap "
                                f"{plan.dense_cap}; increase the recursion depth")
            self.fac.reduced_solver = DenseReducedSolver(a1, self.fac.a1_singular_components,
                                                         cap=plan.dense_cap)

    def levels(self):
        out = [self]
        if self.child is not None:
            out += self.child.levels()
        return out

    def configure(self, tol, clamped, eps_target=None):
        self.tol = tol
        self.report.residual_target = tol
        self.report.clamped = clamped
        self.report.eps_target = eps_target

    def run(self, rhs, raise_on_cap=True):
        # a clamped target may sit below roundoff; accept a backward-stable iterate
        backward = BACKWARD_TOL if self.report.clamped else 0.0
        cfg = ChebyshevConfig(max(self.pre.certificate.bound, 1.0), tol=self.tol,
                              raise_on_cap=raise_on_cap, backward_tol=backward)
        return chebyshev(self.matrix, self.fac.solve, rhs, cfg)

    def solve(self, rhs):
        """Inner solve of an ``A_i`` system (used as the reduced solver of the parent)."""
        if self.singular:
            # rounding drift leaves a component outside the range
            rhs = rhs - rhs.mean()
        x, res = self.run(rhs, raise_on_cap=False)
        rep = self.report
        rep.inner_solves += 1
        rep.inner_iterations += res.iterations
        rep.inner_capped += int(res.capped)
        rep.inner_max_residual = max(rep.inner_max_residual, res.residuals[-1])
        if self.singular:
            x -= x.mean()
        return x


def _triple(g, e):
    k = g.index_of(e)
    return int(g.u[k]), int(g.v[k]), float(g.w[k])


def _schedule(levels, eps, kappa_a, n, oracle_cap):
    """Relative-error targets ``eps_i`` and residual targets for every level."""
    top = levels[0]
    tol = eps / kappa_a
    top.configure(max(tol, RESIDUAL_FLOOR), tol < RESIDUAL_FLOOR, eps)
    prod = 1.0
    for parent, lvl in zip(levels, levels[1:]):
        prod *= max(parent.pre.certificate.bound, 1.0)
        eps_i = 1.0 / (128.0 * prod * 2.0 * n ** 1.5 * kappa_a)
        # kappa_f(A_i) <= kappa_f(B_i) <= prod * kappa_f(A)
        if lvl.matrix.shape[0] <= oracle_cap:
            k_i = finite_condition(lvl.matrix, oracle_cap)
        else:
            k_i = kappa_a * prod
        tol_i = eps_i / k_i
        lvl.configure(max(tol_i, INNER_RESIDUAL_FLOOR), tol_i < INNER_RESIDUAL_FLOOR, eps_i)


def _solve_system(s: ReducedSystem, eps, plan: RecursionPlan, cover=False, keep=None):
    n = s.n
    a = s.matrix()
    if s.graph.m == 0:
        # isolated vertices: diagonal system
        x = np.where(s.excess > 0, s.rhs / np.where(s.excess > 0, s.excess, 1.0), 0.0)
        rep = SystemReport(n, 0, s.singular, cover, 1.0, "exact", eps, False, 0, True, 1, 2.0, 2.0,
                           [0.0], [])
        return x, rep
    kappa, source = condition_estimate(a, s.graph, s.excess, plan.oracle_cap)
    top = _Level(a, s.graph, s.excess, s.singular, plan, 1, t=plan.t, cover=cover)
    if keep is not None:
        keep.append(top)
    levels = top.levels()
    _schedule(levels, eps, kappa, n, plan.oracle_cap)
    for lvl in levels:
        log.info("level %d: n=%d m=%d t=%d |S|=%d bound=%.4g reduced=%d", lvl.index,
                 lvl.report.n, lvl.report.m, lvl.report.t, lvl.report.extra_edges,
                 lvl.report.certificate_bound, lvl.report.reduced_n)
    x, res = top.run(s.rhs)
    if s.singular:
        x -= x.mean()
    p = top.pre.params
    rep = SystemReport(n, s.graph.m, s.singular, cover, kappa, source, top.tol, top.report.clamped,
                       res.iterations, res.converged, p.rho, p.x, p.y, res.residuals,
                       [lvl.report for lvl in levels], res.roundoff_stop)
    return x, rep


def recursive_solve(a, b, eps=1e-8, plan: RecursionPlan = None, keep=None):
    """Solve ``a x = b`` to relative error ``eps`` with a recursion of depth ``plan.depth``.

    Returns ``(x, report)``.  When ``keep`` is a list, the top solver level
    of every reduced system is appended to it for inspection.
    """
    x, report, _ = _solve(a, b, eps, plan, keep)
    return x, report


def cover_solve(a, b, eps=1e-8, plan: RecursionPlan = None):
    """Like :func:`recursive_solve` but also return the covered-system solution.

    Returns ``(x, x_cover, report)``.  Under a Gremban cover ``x_cover`` has
    length ``2n`` and its halves are negatives of each other up to the
    solve accuracy; otherwise it equals ``x``.
    """
    x, report, cov = _solve(a, b, eps, plan, None)
    return x, cov, report


def _solve(a, b, eps, plan, keep):
    plan = plan or RecursionPlan()
    if not 0 < eps <= 0.5:
        raise ValueError(f"eps must lie in (0, 0.5], got {eps}")
    if not isinstance(a, SymmetricMatrix):
        a = SymmetricMatrix(a)
    b = np.asarray(b, dtype=float)
    kind = classify(a)
    systems, rplan = reduce(a, b)
    sols, reps = [], []
    for s in systems:
        try:
            cover = bool(rplan.gremban_applied and is_gremban_cover(s.graph))
            x, rep = _solve_system(s, eps, plan, cover=cover, keep=keep)
        except (ChebyshevError, FactorizationError) as exc:
            raise SolverError(str(exc)) from exc
        sols.append(x)
        reps.append(rep)
    x = back_substitute(rplan, systems, sols)
    bnorm = float(np.linalg.norm(b))
    final = float(np.linalg.norm(b - a.csr @ x)) / bnorm if bnorm > 0 else 0.0
    biggest = max(reps, key=lambda r: r.n) if reps else None
    method = "one-shot" if plan.depth == 1 else "recursive"
    certs = [lv.certificate_bound for r in reps for lv in r.levels[:1]]
    report = SolveReport(
        method=method, n=a.n, nnz=a.nnz, classification=kind, gremban=rplan.gremban_applied,
        components=len(systems), eps=eps, gamma=plan.gamma, depth=plan.depth,
        iterations=sum(r.iterations for r in reps),
        converged=all(r.converged for r in reps),
        residual_target=min((r.residual_target for r in reps), default=eps),
        final_relative_residual=final,
        certificate_bound=max(certs, default=1.0),
        tree_edges=sum(r.levels[0].tree_edges for r in reps if r.levels),
        extra_edges=sum(r.levels[0].extra_edges for r in reps if r.levels),
        rho=biggest.rho if biggest else 1, x=biggest.x if biggest else 2.0,
        y=biggest.y if biggest else 2.0,
        kappa_source=",".join(sorted({r.kappa_source for r in reps})) or "exact",
        systems=reps)
    return x, report, cover_solution(rplan, systems, sols)


def one_shot_solve(a, b, eps=1e-8, gamma=ONE_SHOT_GAMMA, t=None, oracle_cap=DEFAULT_ORACLE_CAP,
                   dense_cap=DENSE_CAP, keep=None):
    """Single preconditioning level with a dense solve of the reduced system."""
    plan = RecursionPlan(depth=1, gamma=gamma, t=t, dense_cap=dense_cap, oracle_cap=oracle_cap)
    return recursive_solve(a, b, eps, plan, keep)
