"""Acceptance suite: one test per criterion, each reporting a pass/fail line.

Instance sets are seeded, so every run audits the same graphs.  The summary
lines are collected in ``conftest.ACCEPTANCE`` and printed at the end of the
session.
"""
import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest
import scipy.sparse as sp

from lapsolve import audit, cover_solve, one_shot_solve, precondition, recursive_solve
from lapsolve.akpw import akpw
from lapsolve.decompose import decompose
from lapsolve.elimination import partial_ldl, trim
from lapsolve.generators import (gremban_system, grid2d, laplacian_system, random_connected,
                                 random_regular, random_tree, tree_plus_edges)
from lapsolve.graph import LAPLACIAN, SymmetricMatrix, laplacian_of
from lapsolve.mmio import MatrixMarketError, read_matrix_market
from lapsolve.reductions import NotPSDDDError, classify
from lapsolve.solver import ONE_SHOT_GAMMA, RECURSIVE_GAMMA, RecursionPlan
from lapsolve.support import kappa_f_oracle

from conftest import dense_solution, independent_audit, record, rel_error, triples

FIXTURES = Path(__file__).parent / "fixtures"
SPREAD = 6.0


def mixed_graph(i, n, seed, spread=SPREAD):
    """Connected graph on about ``n`` vertices from one of five families."""
    kind = i % 5
    if kind == 0:
        return random_connected(n, avg_degree=2.5 + (i % 7) * 0.5, seed=seed, spread=spread)
    if kind == 1:
        k = max(2, int(round(math.sqrt(n))))
        return grid2d(k, seed=seed, spread=spread)
    if kind == 2:
        return random_regular(n + n % 2, 3, seed=seed, spread=spread)
    if kind == 3:
        return tree_plus_edges(n, max(1, n // 8), seed=seed, spread=spread)
    return random_regular(n + n % 2, 4, seed=seed, spread=spread)


def pick_t(i, g, rng):
    """Cycle through the one-shot and recursive exponents, ``t = 1`` and a random ``t``."""
    m = g.m
    choice = i % 4
    if choice == 0:
        t = math.ceil(m ** ONE_SHOT_GAMMA)
    elif choice == 1:
        t = math.ceil(m ** RECURSIVE_GAMMA)
    elif choice == 2:
        t = 1
    else:
        t = int(rng.integers(1, max(2, g.n // 4) + 1))
    return min(max(t, 1), g.n)


@pytest.fixture(scope="module")
def certificate_runs():
    """Preconditioners and oracle values for 200 graphs with ``n`` in ``[5, 300]``."""
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    runs = []
    for i in range(200):
        n = int(rng.integers(5, 301))
        g = mixed_graph(i, n, seed=1000 + i)
        pre = precondition(g, pick_t(i, g, rng))
        k = kappa_f_oracle(laplacian_of(g), pre.matrix())
        runs.append((pre, k))
    return runs, time.perf_counter() - start


def _solve_cases():
    for k in (10, 20, 30, 40):
        yield f"grid {k}x{k}", laplacian_system(grid2d(k, seed=k, spread=2), seed=k)
    for n in (100, 300, 500):
        yield f"random n={n}", laplacian_system(random_connected(n, seed=n, spread=3), seed=n)
    yield "3-regular n=400", laplacian_system(random_regular(400, 3, seed=4, spread=3), seed=4)
    for n in (200, 500):
        g = tree_plus_edges(n, n // 10, seed=n, spread=3)
        yield f"tree+{n // 10} n={n}", laplacian_system(g, seed=n)
    yield "tree n=300", laplacian_system(random_tree(300, seed=5, spread=3), seed=5)
    for n, ex in ((50, 0.5), (120, 0.0), (200, 0.5), (200, 0.0)):
        yield f"gremban n={n} excess={ex}", gremban_system(n, seed=n + 7, excess=ex, spread=1)


@pytest.fixture(scope="module")
def solve_runs():
    """One-shot and depth-two solves of the end-to-end instance set."""
    start = time.perf_counter()
    rows, kept = [], []
    for name, (a, b) in _solve_cases():
        xs = dense_solution(a, b)
        for label, run in (("one-shot", lambda: one_shot_solve(a, b, 1e-8, keep=kept)),
                           ("depth 2", lambda: recursive_solve(a, b, 1e-8, RecursionPlan(depth=2),
                                                               keep=kept))):
            x, rep = run()
            rows.append((name, label, rel_error(x, xs), rep.converged))
    pres = [lvl.pre for top in kept for lvl in top.levels()]
    return rows, pres, time.perf_counter() - start


def test_criterion_01_certificate_soundness(certificate_runs):
    runs, elapsed = certificate_runs
    bad = [(pre.graph.n, k, pre.certificate.bound) for pre, k in runs
           if k > pre.certificate.bound + audit.CERT_SLACK * pre.certificate.bound]
    worst = max(k / pre.certificate.bound for pre, k in runs)
    ok = len(runs) >= 200 and not bad and elapsed <= 300
    record(1, "certificate soundness", ok,
           f"{len(runs)} graphs, {len(bad)} violations, worst oracle/bound {worst:.3g}, "
           f"{elapsed:.0f}s")
    assert ok, bad[:5]


def test_criterion_02_tree_decomposition():
    rng = np.random.default_rng(202)
    violations = 0
    for i in range(500):
        n = int(rng.integers(2, 80))
        t = random_tree(n, seed=2000 + i)
        k = int(rng.integers(0, 3 * n))
        hu = rng.integers(0, n, size=k)
        hv = rng.integers(0, n, size=k)
        hw = 10.0 ** rng.uniform(-SPREAD, 0.0, size=k)
        w_tot = float(hw.sum()) if k else 1.0
        # from one set per unit of weight down to many small sets
        phi = w_tot / float(rng.uniform(0.25, 40.0))
        dec = decompose(n, t.u, t.v, hu, hv, hw, phi)
        problems = audit.decomposition(n, t.u, t.v, hu, hv, hw, dec)
        try:
            independent_audit(n, t.u, t.v, hu, hv, hw, dec)
        except AssertionError as exc:
            problems.append(str(exc) or "independent audit failed")
        violations += len(problems)
    ok = violations == 0
    record(2, "tree decomposition", ok, f"500 instances, {violations} violations")
    assert ok


def test_criterion_03_edge_reduction_and_path_bound():
    rng = np.random.default_rng(303)
    reduction = paths = 0
    for i in range(100):
        n = int(rng.integers(10, 501))
        g = mixed_graph(i, n, seed=3000 + i)
        _, rec, _ = akpw(g)
        reduction += len(audit.edge_reduction(rec))
        paths += len(audit.path_bound(rec, samples=100, seed=i))
    ok = reduction == 0 and paths == 0
    record(3, "edge reduction and path bound", ok,
           f"100 graphs, {reduction} reduction and {paths} path violations")
    assert ok


def test_criterion_04_trim_and_factor():
    rng = np.random.default_rng(404)
    failures = []
    with_excess = 0
    for i in range(120):
        n = int(rng.integers(5, 201))
        g = mixed_graph(i, n, seed=4000 + i)
        pre = precondition(g, pick_t(i, g, rng))
        tree = set(pre.tree.tolist())
        r = triples(g, pre.tree.tolist())
        s = triples(g, [e for e in pre.extra.tolist() if e not in tree])
        b = pre.matrix().csr
        nulls = [np.arange(g.n)]
        if i % 3 == 0:
            ex = np.zeros(g.n)
            hit = rng.choice(g.n, size=max(1, g.n // 10), replace=False)
            ex[hit] = 10.0 ** rng.uniform(-3, 0, size=len(hit))
            b = b + sp.diags(ex)
            nulls = []
            with_excess += 1
        b = SymmetricMatrix(b, check=False)
        order = trim(g.n, r, s)
        fac = partial_ldl(b, order, nulls)
        failures += audit.trim_and_factor(order, fac, b, len(s))
    ok = not failures
    record(4, "trim and factorization", ok,
           f"120 instances ({with_excess} with excess), {len(failures)} violations")
    assert ok, failures[:5]


def test_criterion_05_size_budget(certificate_runs, solve_runs):
    pres = [pre for pre, _ in certificate_runs[0]] + solve_runs[1]
    bad = [msg for pre in pres for msg in audit.size_budget(pre)]
    ok = not bad
    record(5, "augmentation size budget", ok, f"{len(pres)} preconditioners, {len(bad)} over")
    assert ok, bad[:5]


def test_criterion_06_chebyshev_envelope():
    rng = np.random.default_rng(606)
    worst = 0.0
    for i in range(50):
        n = int(rng.integers(5, 201))
        g = mixed_graph(i, n, seed=6000 + i, spread=float(i % 4))
        pre = precondition(g, pick_t(i, g, rng))
        rhs = rng.standard_normal(g.n)
        rhs -= rhs.mean()
        out = audit.chebyshev_envelope(laplacian_of(g), pre.matrix(), rhs)
        worst = max(worst, out["worst_ratio"])
    ok = worst <= 1.05
    record(6, "chebyshev envelope", ok, f"50 instances, worst error/envelope {worst:.3g}")
    assert ok


def test_criterion_07_end_to_end(solve_runs):
    rows, _, elapsed = solve_runs
    bad = [r for r in rows if not (r[2] <= 1e-8 and r[3])]
    worst = max(r[2] for r in rows)
    ok = not bad and elapsed <= 600
    record(7, "end-to-end correctness", ok,
           f"{len(rows)} solves, worst relative error {worst:.2e}, {len(bad)} failures, "
           f"{elapsed:.0f}s")
    assert ok, bad


def test_criterion_08_inexact_chebyshev():
    rng = np.random.default_rng(808)
    within = detected = 0
    worst_ok = worst_neg = 0.0
    for i in range(20):
        n = int(rng.integers(10, 121))
        g = mixed_graph(i, n, seed=8000 + i, spread=float(i % 3))
        pre = precondition(g, pick_t(i, g, rng))
        a, b = laplacian_of(g), pre.matrix()
        rhs = rng.standard_normal(g.n)
        rhs -= rhs.mean()
        at = audit.chebyshev_envelope(a, b, rhs, noise=1.0, seed=i)
        worst_ok = max(worst_ok, at["worst_ratio"])
        within += int(at["worst_ratio"] <= 1.0 and not at["diverged"])
        neg = audit.chebyshev_envelope(a, b, rhs, noise=100.0, seed=i)
        worst_neg = max(worst_neg, neg["worst_ratio"])
        detected += int(neg["diverged"] or neg["worst_ratio"] > 1.0)
    ok = within == 20 and detected == 20
    record(8, "inexact chebyshev", ok,
           f"at delta {within}/20 within envelope (worst {worst_ok:.2g}); "
           f"at 100 delta {detected}/20 detected (worst {worst_neg:.2g})")
    assert ok


def _positive_fixtures():
    out = []
    for path in sorted(FIXTURES.glob("*.mtx")):
        try:
            a, b, _ = read_matrix_market(path)
        except MatrixMarketError:
            continue
        up = sp.triu(a.csr, k=1)
        if up.nnz and up.data.max() > 0 and classify(a) != LAPLACIAN:
            out.append((path.name, a, b))
    return out


def test_criterion_09_gremban_antisymmetry():
    cases = _positive_fixtures()
    for n in (30, 80, 150):
        a, b = gremban_system(n, seed=900 + n, excess=0.2 * (n % 2))
        cases.append((f"generated n={n}", a, b))
    worst = 0.0
    checked = 0
    for name, a, b in cases:
        try:
            x, xc, rep = cover_solve(a, b, 1e-8)
        except NotPSDDDError:
            continue
        if not rep.gremban:
            continue
        h = len(xc) // 2
        worst = max(worst, float(np.linalg.norm(xc[:h] + xc[h:]) / np.linalg.norm(xc[:h])))
        checked += 1
    ok = checked >= 2 and worst <= 1e-8
    record(9, "gremban antisymmetry", ok, f"{checked} systems, worst {worst:.2e}")
    assert ok


def _cli_report(path):
    cmd = [sys.executable, "-m", "lapsolve", "solve", "--input", str(path), "--depth", "2",
           "--format", "json-lines", "--no-timing"]
    return subprocess.run(cmd, capture_output=True, text=True, check=True).stdout


def test_criterion_10_determinism():
    cases = [laplacian_system(grid2d(12, seed=1, spread=3), seed=1),
             laplacian_system(random_connected(150, seed=2, spread=6), seed=2),
             gremban_system(60, seed=3, excess=0.4)]
    same = 0
    total = 0
    for a, b in cases:
        for plan in (RecursionPlan(depth=1, gamma=ONE_SHOT_GAMMA), RecursionPlan(depth=2)):
            x1, r1 = recursive_solve(a, b, 1e-8, plan)
            x2, r2 = recursive_solve(a, b, 1e-8, plan)
            same += int(r1.to_json() == r2.to_json() and x1.tobytes() == x2.tobytes())
            total += 1
    # separate processes
    out = [_cli_report(FIXTURES / "gremban24.mtx") for _ in range(2)]
    same += int(out[0] == out[1])
    total += 1
    ok = same == total
    record(10, "determinism", ok, f"{same}/{total} repeated runs identical")
    assert ok
