"""Planarity: the left-right (de Fraysseix-Rosenstiehl) test and a brute-force Kuratowski checker.

Both operate on simple undirected graphs given as ``(n, edges)`` with edges as
``(u, v)`` pairs. The brute-force checker searches directly for a subdivision
of K5 or K3,3 and is only meant for small graphs (it is used as a test oracle).
"""
from __future__ import annotations

import itertools
import sys
from typing import Iterable

import numpy as np


def _adjacency_lists(n: int, edges: Iterable[tuple[int, int]]) -> list[list[int]]:
    adj: list[list[int]] = [[] for _ in range(n)]
    seen = set()
    for u, v in edges:
        u, v = int(u), int(v)
        if u == v:
            continue
        key = (min(u, v), max(u, v))
        if key in seen:
            continue
        seen.add(key)
        adj[u].append(v)
        adj[v].append(u)
    return adj


class _Interval:
    __slots__ = ("low", "high")

    def __init__(self, low=None, high=None):
        self.low, self.high = low, high

    def empty(self) -> bool:
        return self.low is None and self.high is None

    def copy(self) -> "_Interval":
        return _Interval(self.low, self.high)


class _Pair:
    __slots__ = ("left", "right")

    def __init__(self, left=None, right=None):
        self.left = left or _Interval()
        self.right = right or _Interval()

    def swap(self):
        self.left, self.right = self.right, self.left


class _LRTest:
    def __init__(self, n: int, adj: list[list[int]]):
        self.n, self.adj = n, adj
        self.height = [None] * n
        self.parent_edge: list = [None] * n
        self.lowpt: dict = {}
        self.lowpt2: dict = {}
        self.nesting: dict = {}
        self.oriented: set = set()
        self.out: list[list[int]] = [[] for _ in range(n)]
        self.ref: dict = {}
        self.lowpt_edge: dict = {}
        self.stack_bottom: dict = {}
        self.S: list[_Pair] = []

    # phase 1: DFS orientation and nesting depths
    def orient(self, v: int):
        e = self.parent_edge[v]
        for w in self.adj[v]:
            if (v, w) in self.oriented or (w, v) in self.oriented:
                continue
            vw = (v, w)
            self.oriented.add(vw)
            self.out[v].append(w)
            self.lowpt[vw] = self.lowpt2[vw] = self.height[v]
            if self.height[w] is None:
                self.parent_edge[w] = vw
                self.height[w] = self.height[v] + 1
                self.orient(w)
            else:
                self.lowpt[vw] = self.height[w]
            self.nesting[vw] = 2 * self.lowpt[vw] + (1 if self.lowpt2[vw] < self.height[v] else 0)
            if e is not None:
                if self.lowpt[vw] < self.lowpt[e]:
                    self.lowpt2[e] = min(self.lowpt[e], self.lowpt2[vw])
                    self.lowpt[e] = self.lowpt[vw]
                elif self.lowpt[vw] > self.lowpt[e]:
                    self.lowpt2[e] = min(self.lowpt2[e], self.lowpt[vw])
                else:
                    self.lowpt2[e] = min(self.lowpt2[e], self.lowpt2[vw])

    # phase 2: constraint propagation
    def _conflicting(self, iv: _Interval, b) -> bool:
        return not iv.empty() and self.lowpt[iv.high] > self.lowpt[b]

    def _lowest(self, P: _Pair) -> int:
        if P.left.empty():
            return self.lowpt[P.right.low]
        if P.right.empty():
            return self.lowpt[P.left.low]
        return min(self.lowpt[P.left.low], self.lowpt[P.right.low])

    def _top(self):
        return self.S[-1] if self.S else None

    def add_constraints(self, ei, e) -> bool:
        P = _Pair()
        while True:
            Q = self.S.pop()
            if not Q.left.empty():
                Q.swap()
            if not Q.left.empty():
                return False
            if self.lowpt[Q.right.low] > self.lowpt[e]:
                if P.right.empty():
                    P.right = Q.right.copy()
                else:
                    self.ref[P.right.low] = Q.right.high
                P.right.low = Q.right.low
            else:
                self.ref[Q.right.low] = self.lowpt_edge[e]
            if self._top() is self.stack_bottom[ei]:
                break
        while self.S and (self._conflicting(self.S[-1].left, ei) or self._conflicting(self.S[-1].right, ei)):
            Q = self.S.pop()
            if self._conflicting(Q.right, ei):
                Q.swap()
            if self._conflicting(Q.right, ei):
                return False
            self.ref[P.right.low] = Q.right.high
            if Q.right.low is not None:
                P.right.low = Q.right.low
            if P.left.empty():
                P.left = Q.left.copy()
            else:
                self.ref[P.left.low] = Q.left.high
            P.left.low = Q.left.low
        if not (P.left.empty() and P.right.empty()):
            self.S.append(P)
        return True

    def remove_back_edges(self, e):
        u = e[0]
        while self.S and self._lowest(self.S[-1]) == self.height[u]:
            self.S.pop()
        if self.S:
            P = self.S.pop()
            while P.left.high is not None and P.left.high[1] == u:
                P.left.high = self.ref.get(P.left.high)
            if P.left.high is None and P.left.low is not None:
                self.ref[P.left.low] = P.right.low
                P.left.low = None
            while P.right.high is not None and P.right.high[1] == u:
                P.right.high = self.ref.get(P.right.high)
            if P.right.high is None and P.right.low is not None:
                self.ref[P.right.low] = P.left.low
                P.right.low = None
            self.S.append(P)
        if self.lowpt[e] < self.height[u] and self.S:
            hl, hr = self.S[-1].left.high, self.S[-1].right.high
            if hl is not None and (hr is None or self.lowpt[hl] > self.lowpt[hr]):
                self.ref[e] = hl
            else:
                self.ref[e] = hr

    def test(self, v: int) -> bool:
        e = self.parent_edge[v]
        ordered = self.out[v]
        for w in ordered:
            ei = (v, w)
            self.stack_bottom[ei] = self._top()
            if ei == self.parent_edge[w]:
                if not self.test(w):
                    return False
            else:
                self.lowpt_edge[ei] = ei
                self.S.append(_Pair(right=_Interval(ei, ei)))
            if self.lowpt[ei] < self.height[v]:
                if w == ordered[0]:
                    self.lowpt_edge[e] = self.lowpt_edge[ei]
                elif not self.add_constraints(ei, e):
                    return False
        if e is not None:
            self.remove_back_edges(e)
        return True

    def run(self) -> bool:
        roots = []
        for v in range(self.n):
            if self.height[v] is None:
                self.height[v] = 0
                roots.append(v)
                self.orient(v)
        for v in range(self.n):
            self.out[v].sort(key=lambda w: self.nesting[(v, w)])
        return all(self.test(r) for r in roots)


def lr_planar(n: int, edges: Iterable[tuple[int, int]]) -> bool:
    """Left-right planarity test; linear time apart from the adjacency sort."""
    adj = _adjacency_lists(n, edges)
    m = sum(len(a) for a in adj) // 2
    if n > 2 and m > 3 * n - 6:
        return False
    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 4 * n + 100))
    try:
        return _LRTest(n, adj).run()
    finally:
        sys.setrecursionlimit(limit)


# ---------------------------------------------------------------------------
# brute-force oracle


def _path_through(adj: np.ndarray, a: int, b: int, inner: list[int]) -> bool:
    """Is there an ``a -> b`` path visiting exactly the vertices ``inner`` in between?"""
    for order in itertools.permutations(inner):
        seq = (a, *order, b)
        if all(adj[seq[k], seq[k + 1]] for k in range(len(seq) - 1)):
            return True
    return False


def _subdivision_exists(adj: np.ndarray, pairs: list[tuple[int, int]], spare: list[int]) -> bool:
    missing = [p for p in pairs if not adj[p]]
    if len(missing) > len(spare):
        return False
    if not missing:
        return True
    # adjacent branch pairs can always use their direct edge; distribute spare
    # vertices over the missing pairs (or leave them unused)
    for assign in itertools.product(range(len(missing) + 1), repeat=len(spare)):
        groups = [[] for _ in missing]
        for v, slot in zip(spare, assign):
            if slot < len(missing):
                groups[slot].append(v)
        if any(not g for g in groups):
            continue
        if all(_path_through(adj, a, b, g) for (a, b), g in zip(missing, groups)):
            return True
    return False


def kuratowski_nonplanar(n: int, edges: Iterable[tuple[int, int]], cap: int = 8) -> bool:
    """True iff the graph contains a subdivision of K5 or K3,3 (exhaustive; ``n <= cap``)."""
    if n > cap:
        raise ValueError(f"brute-force Kuratowski search is capped at {cap} nodes")
    adj = np.zeros((n, n), dtype=bool)
    for u, v in edges:
        if u != v:
            adj[u, v] = adj[v, u] = True
    deg = adj.sum(axis=1)
    nodes = range(n)
    for branch in itertools.combinations([v for v in nodes if deg[v] >= 4], 5):
        spare = [v for v in nodes if v not in branch]
        if _subdivision_exists(adj, list(itertools.combinations(branch, 2)), spare):
            return True
    cand = [v for v in nodes if deg[v] >= 3]
    for six in itertools.combinations(cand, 6):
        spare = [v for v in nodes if v not in six]
        for left in itertools.combinations(six[1:], 2):
            side_a = (six[0], *left)
            side_b = tuple(v for v in six if v not in side_a)
            pairs = [(a, b) for a in side_a for b in side_b]
            if _subdivision_exists(adj, pairs, spare):
                return True
    return False
