"""Numerical audits of the structural guarantees.

Every function returns a list of human-readable violations; an empty list
means the audit passed.
"""
from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp

from .akpw import LevelRecords
from .decompose import audit as _decomposition_audit
from .elimination import PartialFactorization, TrimOrder
from .graph import laplacian_of
from .precondition import PreconditionerGraph
from .support import finite_condition, kappa_f_oracle
from .trees import RootedForest

CERT_SLACK = 1e-6
FACTOR_TOL = 1e-9


def edge_reduction(rec: LevelRecords) -> list:
    """``|E_i^j| <= |E_i| / x^(j-i)`` for every ``i <= j``."""
    out = []
    x = rec.params.x
    cls, cnt = np.unique(rec.eindex, return_counts=True)
    total = dict(zip(cls.tolist(), cnt.tolist()))
    for j in range(1, rec.height + 1):
        for i, c in rec.class_counts(j).items():
            if i <= j and c > total[i] / x ** (j - i) * (1 + 1e-12):
                out.append(f"level {j}, class {i}: {c} inter-tree edges > {total[i]}/x^{j - i}")
    return out


def path_bound(rec: LevelRecords, samples=100, seed=0) -> list:
    """Class counts on sampled tree paths of ``F^{j+1}`` obey ``min(y^(j-l+1), y^rho)``."""
    out = []
    g = rec.graph
    p = rec.params
    rng = np.random.default_rng(seed)
    forest_pos = np.zeros(0, dtype=np.int64)
    for lv in rec.levels:
        forest_pos = np.concatenate([forest_pos, lv.forest])
        if len(forest_pos) == 0:
            continue
        f = RootedForest(g.n, g.u[forest_pos], g.v[forest_pos], forest_pos)
        members = {}
        for v, r in enumerate(f.root.tolist()):
            members.setdefault(r, []).append(v)
        big = [m for m in members.values() if len(m) > 1]
        if not big:
            continue
        for _ in range(samples):
            tree = big[int(rng.integers(len(big)))]
            a, b = (tree[int(k)] for k in rng.choice(len(tree), 2, replace=False))
            cls, cnt = np.unique(rec.eindex[f.path(a, b)], return_counts=True)
            for l, c in zip(cls.tolist(), cnt.tolist()):
                cap = min(p.y ** (lv.j - l + 1), p.y ** p.rho)
                if c > cap:
                    out.append(f"level {lv.j}: path {a}-{b} has {c} class-{l} edges > {cap:g}")
    return out


def decomposition(n, tu, tv, hu, hv, hw, dec) -> list:
    """Properties 1-3 and both set bounds of an H-decomposition."""
    return _decomposition_audit(n, tu, tv, hu, hv, hw, dec)


def size_budget(pre: PreconditionerGraph) -> list:
    """``|S| <= 8 rho^2 t^2``."""
    if len(pre.extra) > pre.size_budget:
        return [f"|S| = {len(pre.extra)} exceeds {pre.size_budget:g}"]
    return []


def certificate(pre: PreconditionerGraph, cap=500) -> list:
    """Dense-oracle ``kappa_f(A, B)`` stays below the congestion certificate."""
    a = laplacian_of(pre.graph)
    b = pre.matrix()
    k = kappa_f_oracle(a, b, cap)
    bound = pre.certificate.bound
    if k > bound + CERT_SLACK * bound:
        return [f"kappa_f(A, B) = {k:.6g} exceeds certificate {bound:.6g}"]
    return []


def dilation(pre: PreconditionerGraph) -> list:
    """Per-edge dilation bound ``(2 rho + 5) y^(j+1) w(e)`` with weights scaled to max 1."""
    out = []
    rec, p, g = pre.records, pre.params, pre.graph
    level = rec.settled_level()
    for k, e in enumerate(g.ids.tolist()):
        d = pre.certificate.dilation[e]
        cap = (2 * p.rho + 5) * p.y ** (level[k] + 1) * g.w[k] / rec.scale
        if d > cap * (1 + 1e-9):
            out.append(f"edge {e}: dilation {d:.4g} > {cap:.4g}")
    return out


def trim_and_factor(order: TrimOrder, fac: PartialFactorization, b, s_count, cap=500) -> list:
    """Size bounds of the reduced graph, factor sparsity, reconstruction and conditioning."""
    out = []
    n = fac.n
    w_cap = max(4 * s_count, 1)
    if len(order.remaining) > w_cap:
        out.append(f"{len(order.remaining)} vertices remain > {w_cap}")
    if order.reduced_graph.m > 5 * s_count:
        out.append(f"{order.reduced_graph.m} edges remain > {5 * s_count}")
    if fac.nnz_l > 2 * n - 1:
        out.append(f"L has {fac.nnz_l} off-diagonal non-zeros > {2 * n - 1}")
    bcsr = b.csr if hasattr(b, "csr") else sp.csr_matrix(b)
    diff = sp.linalg.norm(fac.reconstruct() - bcsr)
    ref = sp.linalg.norm(bcsr)
    if diff > FACTOR_TOL * ref:
        out.append(f"reconstruction error {diff / ref:.3e}")
    col = np.asarray(abs(fac.L).sum(axis=0)).ravel().max() if n else 0.0
    if col > 2 * (1 + FACTOR_TOL):
        out.append(f"||L||_1 = {col:.12g} > 2")
    if fac.a1.n > 1 and n <= cap:
        ka = finite_condition(fac.a1, cap)
        kb = finite_condition(bcsr, cap)
        if ka > kb * (1 + FACTOR_TOL):
            out.append(f"kappa_f(A1) = {ka:.6g} > kappa_f(B) = {kb:.6g}")
    return out


def tau_sum(params, l_max=50, span=200) -> list:
    """``sum_{j >= l} tau(j, l) <= rho + 1``."""
    out = []
    for l in range(1, l_max + 1):
        s = math.fsum(params.tau(j, l) for j in range(l, l + span + 1))
        if s > params.rho + 1:
            out.append(f"class {l}: sum of tau = {s} > {params.rho + 1}")
    return out


def _steps_to(env, kappa_hat, kappa_a, kappa_b, floor):
    k = 0
    while env(k, kappa_hat, kappa_a, kappa_b) > floor:
        k += 1
    return k


def chebyshev_envelope(a, b, rhs, noise=0.0, floor=1e-10, cap=500, seed=0):
    """Run Chebyshev with dense inner solves and compare errors to the envelope.

    ``b`` is rescaled so the pencil ``(A, B)`` has spectrum ``[1, kappa_hat]``.
    With ``noise = 0`` inner solves are exact and the exponential envelope is
    used; otherwise each inner solve carries a perturbation of relative size
    ``noise`` times the admissible threshold, aimed at the top generalized
    eigenvector, and the inexact envelope applies.  Iteration stops once the
    envelope reaches ``floor`` (double precision cannot track it further).

    Returns a dict with the worst error-to-envelope ratio, the step count,
    whether the divergence guard fired and the spectral quantities used.
    """
    from .chebyshev import (ChebyshevConfig, ChebyshevError, chebyshev, envelope,
                            inexact_envelope, noise_threshold)
    from .support import _as_dense, generalized_extremes, null_basis
    import scipy.linalg as sla

    ad, bd = _as_dense(a), _as_dense(b)
    lo, hi = generalized_extremes(ad, bd, cap)
    bd = lo * bd
    kappa_hat = hi / lo
    kappa_a = finite_condition(ad, cap)
    kappa_b = finite_condition(bd, cap)
    bp = np.linalg.pinv(bd, hermitian=True)
    xs = np.linalg.pinv(ad, hermitian=True) @ rhs
    env = inexact_envelope if noise else envelope
    steps = _steps_to(env, kappa_hat, kappa_a, kappa_b, floor)
    delta = noise * noise_threshold(kappa_b, kappa_hat) if noise else 0.0
    if noise:
        nb = null_basis(ad)
        q = sla.null_space(nb.T) if nb.shape[1] else np.eye(ad.shape[0])
        _, vecs = sla.eigh(q.T @ ad @ q, q.T @ bd @ q)
        push = bd @ (q @ vecs[:, -1])
        push /= np.linalg.norm(push)

        def inner(r):
            s = 1.0 if push @ r >= 0 else -1.0
            return bp @ (r + s * delta * np.linalg.norm(r) * push)
    else:
        def inner(r):
            return bp @ r
    xnorm = float(np.linalg.norm(xs))
    worst = [0.0]

    def watch(k, x):
        ratio = float(np.linalg.norm(x - xs)) / (env(k, kappa_hat, kappa_a, kappa_b) * xnorm)
        worst[0] = max(worst[0], ratio)

    diverged = False
    try:
        chebyshev(ad, inner, rhs, ChebyshevConfig(kappa_hat, fixed_iters=max(steps, 1)),
                  callback=watch)
    except ChebyshevError:
        diverged = True
    return {"worst_ratio": worst[0], "steps": steps, "diverged": diverged, "delta": delta,
            "kappa_hat": kappa_hat, "kappa_a": kappa_a, "kappa_b": kappa_b}
