"""Ordered universal trees and the universal graphs they induce.

A leaf is identified by its navigation path, a tuple with one component per
level, topmost level first.  Level ``j`` (counted from the bottom, starting
at 1) serves the odd label ``2j - 1``.  Leaves are ordered lexicographically
on navigation paths; this order is the simulation order used by the lifting
solver.

Internally every leaf is handled through its rank in leaf order, so
comparisons are integer comparisons and the successor relation ``K`` is a
lookup table per label.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Iterator, Sequence

import networkx as nx


class _Star:
    """The sentinel strictly above every leaf."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "STAR"

    def __reduce__(self):
        return (_Star, ())


STAR = _Star()

LT, EQ, GT = -1, 0, 1


class TreeError(ValueError):
    pass


class UniversalTree:
    """Base class: subclasses supply the leaves and the per-level sort key."""

    flavor = "abstract"

    def __init__(self, l: int, h: int):
        if l < 1 or h < 1:
            raise TreeError("tree parameters must be positive")
        self.l = l
        self.h = h
        leaves = sorted(self._enumerate(), key=self._key)
        self._leaves = tuple(leaves)
        self._rank = {q: r for r, q in enumerate(leaves)}
        self._block_start, self._block_end = self._blocks()
        self._succ_cache: dict[int, tuple[int, ...]] = {}

    # subclass hooks
    def _enumerate(self) -> Iterable[tuple]:
        raise NotImplementedError

    def _component_key(self, c):
        raise NotImplementedError

    def _key(self, q: tuple):
        return tuple(self._component_key(c) for c in q)

    def __repr__(self):
        return f"{type(self).__name__}({self.l}, {self.h})"

    # -- basic queries -------------------------------------------------------

    @property
    def size(self) -> int:
        return len(self._leaves)

    @property
    def max_label(self) -> int:
        return 2 * self.h

    def leaves_in_order(self) -> Iterator[tuple]:
        return iter(self._leaves)

    def leaf(self, rank: int) -> tuple:
        return self._leaves[rank]

    def rank(self, q: tuple) -> int:
        try:
            return self._rank[q]
        except (KeyError, TypeError):
            raise TreeError(f"{q!r} is not a leaf of {self!r}") from None

    def min_leaf(self) -> tuple:
        return self._leaves[0]

    def max_leaf(self) -> tuple:
        return self._leaves[-1]

    def leaf_compare(self, q: tuple, q2: tuple) -> int:
        a, b = self.rank(q), self.rank(q2)
        return LT if a < b else GT if a > b else EQ

    def leq(self, q, q2) -> bool:
        """Leaf order extended by STAR on top."""
        if q2 is STAR:
            return True
        if q is STAR:
            return False
        return self.rank(q) <= self.rank(q2)

    # -- successor relation K ------------------------------------------------

    def _blocks(self):
        """For each level j and rank r, the rank interval of leaves sharing
        r's components on levels h..j."""
        n = len(self._leaves)
        starts, ends = {}, {}
        for j in range(1, self.h + 1):
            cut = self.h - j + 1
            st = [0] * n
            en = [0] * n
            r = 0
            while r < n:
                prefix = self._leaves[r][:cut]
                e = r
                while e + 1 < n and self._leaves[e + 1][:cut] == prefix:
                    e += 1
                for x in range(r, e + 1):
                    st[x] = r
                    en[x] = e
                r = e + 1
            starts[j] = st
            ends[j] = en
        return starts, ends

    def succ_table(self, label: int) -> tuple[int, ...]:
        """``K_label`` on ranks; ``-1`` where the successor is undefined.

        Odd labels ``2j - 1``: the greatest leaf whose components on levels
        h..j are lexicographically smaller than those of ``q`` (equivalently:
        the predecessor at level j, borrowing from higher levels when needed,
        with the rightmost completion below).  Even labels ``i``: the
        rightmost leaf agreeing with ``q`` on every level whose odd label
        exceeds ``i``.
        """
        if not 0 <= label <= self.max_label:
            raise TreeError(f"label {label} out of range 0..{self.max_label} for {self!r}")
        cached = self._succ_cache.get(label)
        if cached is not None:
            return cached
        n = len(self._leaves)
        if label % 2:
            st = self._block_start[(label + 1) // 2]
            table = tuple(s - 1 for s in st)
        else:
            j0 = label // 2 + 1
            if j0 > self.h:
                table = (n - 1,) * n
            else:
                table = tuple(self._block_end[j0])
        self._succ_cache[label] = table
        return table

    def succ(self, q: tuple, label: int) -> tuple | None:
        """The unique element of ``K_label(q)``, or None when it is empty."""
        r = self.succ_table(label)[self.rank(q)]
        return None if r < 0 else self._leaves[r]

    def graph(self, max_label: int | None = None) -> "LabelledGraph":
        """The labelled graph ``(Z, K)`` restricted to labels ``0..max_label``."""
        top = self.max_label if max_label is None else max_label
        edges = []
        for p in range(top + 1):
            table = self.succ_table(p)
            for r, s in enumerate(table):
                if s >= 0:
                    edges.append((self._leaves[r], p, self._leaves[s]))
        return LabelledGraph(self._leaves, edges)


class CompleteTree(UniversalTree):
    """Every level branches ``l`` ways; components are ``0..l-1``."""

    flavor = "complete"

    def _enumerate(self):
        return itertools.product(range(self.l), repeat=self.h)

    def _component_key(self, c):
        return c

    def _key(self, q):
        return q


def string_key(s: str) -> tuple:
    """Sort key realizing the order ``0... < empty < 1...`` recursively."""
    return tuple(0 if ch == "0" else 2 for ch in s) + (1,)


def bit_budget(l: int) -> int:
    return max(0, math.ceil(math.log2(l))) if l > 1 else 0


class SuccinctTree(UniversalTree):
    """Leaves are tuples of binary strings of total length at most
    ``ceil(log2 l)``; each level is ordered by ``0 < empty < 1``."""

    flavor = "succinct"

    def __init__(self, l: int, h: int):
        self.budget = bit_budget(l)
        super().__init__(l, h)

    def _enumerate(self):
        def rec(level, remaining):
            if level == 0:
                yield ()
                return
            for length in range(remaining + 1):
                for bits in itertools.product("01", repeat=length):
                    s = "".join(bits)
                    for rest in rec(level - 1, remaining - length):
                        yield (s,) + rest

        return rec(self.h, self.budget)

    def _component_key(self, c):
        return string_key(c)


def succinct_size(l: int, h: int) -> int:
    """Closed-form leaf count of ``SuccinctTree(l, h)``."""
    beta = bit_budget(l)
    return sum(2 ** t * math.comb(t + h - 1, h - 1) for t in range(beta + 1))


def succinct_size_bound(l: int, h: int) -> int:
    """``2l * C(ceil(log2 l) + h + 1, h)``, the guaranteed size bound."""
    return 2 * l * math.comb(bit_budget(l) + h + 1, h)


def make_tree(flavor: str, l: int, h: int) -> UniversalTree:
    if flavor == "succinct":
        return SuccinctTree(l, h)
    if flavor == "complete":
        return CompleteTree(l, h)
    raise TreeError(f"unknown tree flavor {flavor!r}")


def default_height(d: int) -> int:
    """One level per odd label in ``0..d``."""
    return max(1, math.ceil(d / 2))


# -- labelled graphs ---------------------------------------------------------


@dataclass
class LabelledGraph:
    nodes: Sequence[Hashable]
    edges: list = field(default_factory=list)  # (src, label, dst)

    def max_label(self) -> int:
        return max((p for _, p, _ in self.edges), default=0)


def find_odd_cycle(G: LabelledGraph) -> tuple | None:
    """An edge ``(v, p, w)`` with odd ``p`` lying on a cycle whose labels are all
    at most ``p``; None if the graph is even."""
    labels = sorted({p for _, p, _ in G.edges if p % 2})
    for p in labels:
        sub = nx.DiGraph()
        sub.add_nodes_from(G.nodes)
        sub.add_edges_from((v, w) for v, a, w in G.edges if a <= p)
        comp = {}
        for idx, scc in enumerate(nx.strongly_connected_components(sub)):
            for x in scc:
                comp[x] = idx
        for v, a, w in G.edges:
            if a == p and comp[v] == comp[w]:
                return (v, a, w)
    return None


def is_even_graph(G: LabelledGraph) -> bool:
    """True iff no cycle of ``G`` has an odd maximal label."""
    return find_odd_cycle(G) is None


def find_homomorphism(G: LabelledGraph, tree: UniversalTree, method: str = "lift") -> dict | None:
    """A map from ``G``'s nodes to leaves such that every edge ``(v, p, w)``
    satisfies ``Phi(w) <= K_p(Phi(v))``.

    ``method="lift"`` computes the least such map by progress-measure style
    lifting (complete because ``K_p`` is monotone on ranks);
    ``method="backtrack"`` is a plain backtracking search trying leaves in
    descending order.  The returned map is always re-verified.
    """
    for _, p, _ in G.edges:
        if not 0 <= p <= tree.max_label:
            raise TreeError(f"label {p} out of range for {tree!r}")
    if method == "lift":
        ranks = _hom_lift(G, tree)
    elif method == "backtrack":
        ranks = _hom_backtrack(G, tree)
    else:
        raise ValueError(f"unknown method {method!r}")
    if ranks is None:
        return None
    phi = {v: tree.leaf(r) for v, r in ranks.items()}
    assert is_homomorphism(G, tree, phi)
    return phi


def is_homomorphism(G: LabelledGraph, tree: UniversalTree, phi: dict) -> bool:
    for v, p, w in G.edges:
        s = tree.succ_table(p)[tree.rank(phi[v])]
        if s < 0 or tree.rank(phi[w]) > s:
            return False
    return True


def _hom_lift(G, tree):
    n = tree.size
    out: dict = {v: [] for v in G.nodes}
    preds: dict = {v: [] for v in G.nodes}
    for v, p, w in G.edges:
        out[v].append((tree.succ_table(p), w))
        preds[w].append(v)
    rank = {v: 0 for v in G.nodes}
    work = list(G.nodes)
    queued = set(work)
    while work:
        v = work.pop()
        queued.discard(v)
        r = rank[v]
        while r < n and not all(0 <= t[r] and rank[w] <= t[r] for t, w in out[v]):
            r += 1
        if r == n:
            return None
        if r != rank[v]:
            rank[v] = r
            for u in preds[v]:
                if u not in queued:
                    queued.add(u)
                    work.append(u)
    return rank


def _hom_backtrack(G, tree):
    nodes = list(G.nodes)
    order = range(tree.size - 1, -1, -1)
    out: dict = {v: [] for v in nodes}
    inc: dict = {v: [] for v in nodes}
    for v, p, w in G.edges:
        out[v].append((tree.succ_table(p), w))
        inc[w].append((tree.succ_table(p), v))
    assign: dict = {}

    def consistent(v, r):
        for t, w in out[v]:
            if t[r] < 0:
                return False
            if w == v and r > t[r]:
                return False
            if w in assign and assign[w] > t[r]:
                return False
        for t, u in inc[v]:
            if u in assign and (t[assign[u]] < 0 or r > t[assign[u]]):
                return False
        return True

    def rec(idx):
        if idx == len(nodes):
            return True
        v = nodes[idx]
        for r in order:
            if consistent(v, r):
                assign[v] = r
                if rec(idx + 1):
                    return True
                del assign[v]
        return False

    return dict(assign) if rec(0) else None
