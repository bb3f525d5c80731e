import networkx as nx
import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from lapsolve.elimination import partial_ldl, trim

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def triples(g, ids):
    out = []
    for e in ids:
        k = g.index_of(e)
        out.append((int(g.u[k]), int(g.v[k]), float(g.w[k])))
    return out


def factor_preconditioner(pre, singular=True):
    """Trim order and partial factorization of ``B`` for a preconditioner."""
    g = pre.graph
    tree = set(pre.tree.tolist())
    r = triples(g, pre.tree.tolist())
    s = triples(g, [e for e in pre.extra.tolist() if e not in tree])
    b = pre.matrix()
    order = trim(g.n, r, s)
    fac = partial_ldl(b, order, [np.arange(g.n)] if singular else None)
    return b, order, fac, len(s)


def dense_solution(a, b):
    dense = a.toarray() if hasattr(a, "toarray") else np.asarray(a)
    return np.linalg.lstsq(dense, b, rcond=None)[0]


def rel_error(x, xs):
    return float(np.linalg.norm(x - xs) / np.linalg.norm(xs))


def independent_audit(n, tu, tv, hu, hv, hw, dec):
    """Check the decomposition properties with networkx as the oracle."""
    T = nx.Graph()
    T.add_nodes_from(range(n))
    T.add_edges_from(zip(tu, tv))
    sets = [set(s.tolist()) for s in dec.sets]
    for s in sets:
        assert nx.is_connected(T.subgraph(s))
    for a, b in zip(tu, tv):
        assert sum(1 for s in sets if a in s and b in s) == 1
    w = np.zeros(len(sets))
    for k, (a, b, c) in enumerate(zip(hu, hv, hw)):
        s1, s2 = dec.sigma_of(k) if len(set(dec.sigma_of(k))) == 2 else (dec.sigma_of(k)[0],) * 2
        if s1 == s2:
            assert a in sets[s1] and b in sets[s1]
            w[s1] += c
        else:
            assert a in sets[s1] and b in sets[s2]
            w[s1] += c
            w[s2] += c
    total = float(np.sum(hw))
    for k, s in enumerate(sets):
        if len(s) > 1:
            assert w[k] <= dec.phi * (1 + 1e-12)
    assert len(sets) <= max(1, 4 * total / dec.phi)


# criterion number -> (title, passed, detail), filled by the acceptance suite
ACCEPTANCE = {}


def record(number, title, passed, detail=""):
    ACCEPTANCE[number] = (title, bool(passed), detail)
    print(f"criterion {number} {title}: {'PASS' if passed else 'FAIL'} {detail}".rstrip())


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, passed, detail = ACCEPTANCE[number]
        line = f"criterion {number:2d} {title}: {'PASS' if passed else 'FAIL'}"
        terminalreporter.write_line(f"{line}  {detail}".rstrip())


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
