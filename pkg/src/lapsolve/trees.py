"""Rooted spanning forests with Euler-tour/sparse-table LCA queries."""
from __future__ import annotations

import numpy as np


class RootedForest:
    """A forest on ``n`` vertices rooted at the lowest-numbered vertex of each tree.

    ``edge_ids`` label the forest edges; :meth:`path` returns the ids along the
    unique tree path between two vertices.
    """

    def __init__(self, n, u, v, edge_ids=None):
        u = np.asarray(u, dtype=np.int64)
        v = np.asarray(v, dtype=np.int64)
        self.n = n
        if edge_ids is None:
            edge_ids = np.arange(len(u))
        edge_ids = np.asarray(edge_ids, dtype=np.int64)
        self.parent = np.full(n, -1, dtype=np.int64)
        self.parent_edge = np.full(n, -1, dtype=np.int64)
        self.depth = np.zeros(n, dtype=np.int64)
        self.root = np.full(n, -1, dtype=np.int64)
        self.tin = np.zeros(n, dtype=np.int64)

        deg = np.bincount(np.concatenate([u, v]), minlength=n)
        start = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(deg, out=start[1:])
        ends = np.concatenate([u, v])
        others = np.concatenate([v, u])
        eids = np.concatenate([edge_ids, edge_ids])
        order = np.argsort(ends, kind="stable")
        nbr = others[order].tolist()
        nid = eids[order].tolist()
        start_l = start.tolist()
        parent, pedge, depth, root = self.parent, self.parent_edge, self.depth, self.root
        parent_l = [-1] * n
        pedge_l = [-1] * n
        depth_l = [0] * n
        root_l = [-1] * n
        euler = []
        first = [0] * n
        for r in range(n):
            if root_l[r] != -1:
                continue
            root_l[r] = r
            # iterative DFS that records an Euler tour
            stack = [(r, start_l[r])]
            first[r] = len(euler)
            euler.append(r)
            while stack:
                x, k = stack[-1]
                if k < start_l[x + 1]:
                    stack[-1] = (x, k + 1)
                    y = nbr[k]
                    if y == parent_l[x] and nid[k] == pedge_l[x]:
                        continue
                    if root_l[y] != -1:
                        raise ValueError("edge set contains a cycle")
                    root_l[y] = r
                    parent_l[y] = x
                    pedge_l[y] = nid[k]
                    depth_l[y] = depth_l[x] + 1
                    first[y] = len(euler)
                    euler.append(y)
                    stack.append((y, start_l[y]))
                else:
                    stack.pop()
                    if stack:
                        euler.append(stack[-1][0])
        parent[:] = parent_l
        pedge[:] = pedge_l
        depth[:] = depth_l
        root[:] = root_l
        self.tin[:] = first
        self._euler = np.asarray(euler, dtype=np.int64)
        self._build_sparse_table()

    def _build_sparse_table(self):
        e = self._euler
        d = self.depth[e] if len(e) else np.zeros(0, dtype=np.int64)
        table = [np.arange(len(e))]
        span = 1
        while 2 * span <= len(e):
            prev = table[-1]
            a = prev[: len(e) - 2 * span + 1]
            b = prev[span: span + len(e) - 2 * span + 1]
            table.append(np.where(d[a] <= d[b], a, b))
            span *= 2
        self._table = table
        self._edepth = d

    def same_tree(self, a, b) -> bool:
        return self.root[a] == self.root[b]

    def lca(self, a, b) -> int:
        if self.root[a] != self.root[b]:
            raise ValueError(f"vertices {a} and {b} lie in different trees")
        i, j = sorted((int(self.tin[a]), int(self.tin[b])))
        k = (j - i + 1).bit_length() - 1
        t = self._table[k]
        x, y = t[i], t[j - (1 << k) + 1]
        return int(self._euler[x if self._edepth[x] <= self._edepth[y] else y])

    def path_vertices(self, a, b):
        """Vertices of the tree path from ``a`` to ``b`` inclusive."""
        c = self.lca(a, b)
        up = []
        x = a
        while x != c:
            up.append(x)
            x = int(self.parent[x])
        down = []
        x = b
        while x != c:
            down.append(x)
            x = int(self.parent[x])
        return up + [c] + down[::-1]

    def path(self, a, b):
        """Edge ids along the tree path from ``a`` to ``b``."""
        c = self.lca(a, b)
        up = []
        x = a
        while x != c:
            up.append(int(self.parent_edge[x]))
            x = int(self.parent[x])
        down = []
        x = b
        while x != c:
            down.append(int(self.parent_edge[x]))
            x = int(self.parent[x])
        return up + down[::-1]

    def virtual_tree(self, terminals):
        """Topological tree spanning ``terminals``.

        Returns ``(vertices, edges)``: the terminals closed under pairwise
        LCAs, sorted by vertex id, and the compressed tree edges as pairs of
        vertex ids (each standing for a tree path with no other such vertex).
        """
        ts = np.unique(np.asarray(terminals, dtype=np.int64))
        if len(ts) == 0:
            return ts, []
        ts = ts[np.argsort(self.tin[ts], kind="stable")]
        extra = [self.lca(int(ts[i]), int(ts[i + 1])) for i in range(len(ts) - 1)]
        vs = np.unique(np.concatenate([ts, np.asarray(extra, dtype=np.int64)]))
        vs_t = vs[np.argsort(self.tin[vs], kind="stable")]
        edges = []
        stack = []
        for x in vs_t.tolist():
            while stack and not self._is_ancestor(stack[-1], x):
                stack.pop()
            if stack:
                edges.append((stack[-1], x))
            stack.append(x)
        return vs, edges

    def _is_ancestor(self, a, b) -> bool:
        return self.root[a] == self.root[b] and self.lca(a, b) == a
