"""H-decompositions of a tree.

Given a tree ``T`` and weighted edges ``H`` between its vertices, split ``T``
into connected vertex sets so that every tree edge lies in exactly one set
and every set with more than one vertex carries at most ``phi`` of the
``H``-weight.  Each vertex is *owned* by exactly one set; an ``H`` edge is
charged to the sets owning its endpoints.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class DecompositionError(ValueError):
    pass


@dataclass
class TreeDecomposition:
    """Sets ``W`` with ownership and the map ``sigma`` from ``H`` edges to set indices.

    ``sigma[k]`` is the pair ``(owner[hu[k]], owner[hv[k]])`` for the ``k``-th
    ``H`` edge; it names one set when both entries agree.
    """

    sets: list
    owner: np.ndarray
    sigma: np.ndarray
    weights: np.ndarray
    total: float
    phi: float

    def __len__(self):
        return len(self.sets)

    def sigma_of(self, k) -> tuple:
        a, b = int(self.sigma[k, 0]), int(self.sigma[k, 1])
        return (a,) if a == b else (a, b)


def _rooted(n, tu, tv, root):
    adj = [[] for _ in range(n)]
    for a, b in zip(tu, tv):
        adj[a].append(b)
        adj[b].append(a)
    parent = [-1] * n
    order = [root]
    seen = [False] * n
    seen[root] = True
    for x in order:
        for y in adj[x]:
            if not seen[y]:
                seen[y] = True
                parent[y] = x
                order.append(y)
    if len(order) != n:
        raise DecompositionError("tree edges do not span the vertex set")
    children = [[] for _ in range(n)]
    for x in order[1:]:
        children[parent[x]].append(x)
    for c in children:
        c.sort()
    return children, order


def decompose(n, tu, tv, hu, hv, hw, phi, root=0) -> TreeDecomposition:
    """Decompose the tree on vertices ``0..n-1`` with edges ``(tu, tv)``.

    ``(hu, hv, hw)`` are the ``H`` edges.  Sets are built bottom-up from
    ``root``: a vertex passes a residual region of weight at most ``phi/2``
    to its parent, and a set is closed whenever accumulated weight passes
    ``phi/2``.
    """
    tu = np.asarray(tu, dtype=np.int64)
    tv = np.asarray(tv, dtype=np.int64)
    hu = np.asarray(hu, dtype=np.int64)
    hv = np.asarray(hv, dtype=np.int64)
    hw = np.asarray(hw, dtype=float)
    if not phi > 0:
        raise DecompositionError("phi must be positive")
    if len(tu) != n - 1:
        raise DecompositionError(f"a tree on {n} vertices has {n - 1} edges, got {len(tu)}")
    if len(hu) and (min(hu.min(), hv.min()) < 0 or max(hu.max(), hv.max()) >= n):
        raise DecompositionError("H edge endpoint outside the tree")
    if len(tu) and (min(tu.min(), tv.min()) < 0 or max(tu.max(), tv.max()) >= n):
        raise DecompositionError("tree edge endpoint outside the vertex set")
    total = math.fsum(hw.tolist())
    children, order = _rooted(n, tu.tolist(), tv.tolist(), root)

    owner = np.full(n, -1, dtype=np.int64)
    sets = []
    if total <= phi:
        sets.append(np.arange(n))
        owner[:] = 0
    else:
        vw = np.bincount(hu, weights=hw, minlength=n) + np.bincount(hv, weights=hw, minlength=n)
        vw = vw.tolist()
        alive = [True] * n
        resid = [0.0] * n
        pending = [[] for _ in range(n)]
        half = phi / 2

        def region(starts):
            members, owned = [], []
            stack = list(starts)
            while stack:
                x = stack.pop()
                members.append(x)
                if alive[x]:
                    owned.append(x)
                    stack.extend(pending[x])
            return members, owned

        load = []

        def close(members, owned):
            k = len(sets)
            sets.append(np.unique(np.asarray(members, dtype=np.int64)))
            load.append(sum(vw[x] for x in owned))
            for x in owned:
                owner[x] = k
                alive[x] = False

        for v in reversed(order):
            acc = 0.0
            group = []
            for c in children[v]:
                group.append(c)
                if alive[c]:
                    acc += resid[c]
                    if acc > half:
                        members, owned = region(group)
                        close([v] + members, owned)
                        acc, group = 0.0, []
            pending[v] = group
            tot = vw[v] + acc
            if tot > phi:
                if group:
                    members, owned = region(group)
                    close([v] + members, owned)
                pending[v] = []
                close([v], [v])
            elif tot > half:
                members, owned = region([v])
                close(members, owned)
            else:
                resid[v] = tot
        if alive[root]:
            members, owned = region([root])
            r = sum(vw[x] for x in owned)
            # fold the final region into a touching set when the weight allows;
            # otherwise that neighbour pays for it in the count bound
            touch = set(members)
            target = next((k for k, s in enumerate(sets)
                           if load[k] + r <= phi and not touch.isdisjoint(s.tolist())), None)
            if target is None:
                close(members, owned)
            else:
                sets[target] = np.union1d(sets[target], np.asarray(members, dtype=np.int64))
                load[target] += r
                for x in owned:
                    owner[x] = target
                    alive[x] = False

    sigma = np.stack([owner[hu], owner[hv]], axis=1) if len(hu) else np.zeros((0, 2), dtype=np.int64)
    weights = np.zeros(len(sets))
    if len(hu):
        np.add.at(weights, sigma[:, 0], hw)
        diff = sigma[:, 0] != sigma[:, 1]
        np.add.at(weights, sigma[diff, 1], hw[diff])
    return TreeDecomposition(sets, owner, sigma, weights, total, phi)


def audit(n, tu, tv, hu, hv, hw, dec: TreeDecomposition) -> list:
    """List every violated decomposition property (empty when all hold)."""
    problems = []
    tu = np.asarray(tu, dtype=np.int64)
    tv = np.asarray(tv, dtype=np.int64)
    hu = np.asarray(hu, dtype=np.int64)
    hv = np.asarray(hv, dtype=np.int64)
    member = [set(s.tolist()) for s in dec.sets]
    # property 1: connected subtrees
    for k, s in enumerate(member):
        if len(s) > 1:
            inside = [(a, b) for a, b in zip(tu.tolist(), tv.tolist()) if a in s and b in s]
            if len(inside) != len(s) - 1:
                problems.append(f"set {k} is not a connected subtree")
    # property 2: each tree edge in exactly one set
    for a, b in zip(tu.tolist(), tv.tolist()):
        c = sum(1 for s in member if a in s and b in s)
        if c != 1:
            problems.append(f"tree edge ({a},{b}) lies in {c} sets")
    # ownership and property 3
    for x in range(n):
        k = int(dec.owner[x])
        if k < 0 or x not in member[k]:
            problems.append(f"vertex {x} has no valid owner")
    for k in range(len(hu)):
        sig = dec.sigma_of(k)
        a, b = int(hu[k]), int(hv[k])
        if len(sig) == 1:
            if a not in member[sig[0]] or b not in member[sig[0]]:
                problems.append(f"H edge {k} endpoints outside its single set")
        elif not ((a in member[sig[0]] and b in member[sig[1]]) or
                  (a in member[sig[1]] and b in member[sig[0]])):
            problems.append(f"H edge {k} endpoints not split across its two sets")
    for k, s in enumerate(dec.sets):
        if len(s) > 1 and dec.weights[k] > dec.phi * (1 + 1e-12):
            problems.append(f"set {k} has H-weight {dec.weights[k]} > phi {dec.phi}")
    if len(dec.sets) > max(1.0, 4 * dec.total / dec.phi) * (1 + 1e-12):
        problems.append(f"{len(dec.sets)} sets exceed 4*w_tot/phi = {4 * dec.total / dec.phi}")
    return problems
