"""Brute-force reference implementations used only by the test suite.

Nothing here calls into the package's solving code; the point is to have a
second, naive route for every quantity the solvers compute.
"""
import itertools
from collections import deque

from nestfix.universal import CompleteTree


def component_key(tree, c):
    if isinstance(tree, CompleteTree):
        return c
    # binary strings ordered 0... < empty < 1...
    return tuple(0 if ch == "0" else 2 for ch in c) + (1,)


def leaf_key(tree, q):
    return tuple(component_key(tree, c) for c in q)


def brute_succ(tree, q, label):
    """K_label(q) straight from the definition, by scanning all leaves."""
    h = tree.h
    leaves = sorted(tree.leaves_in_order(), key=lambda x: leaf_key(tree, x))
    if label % 2:
        j = (label + 1) // 2
        cut = h - j + 1
        mine = leaf_key(tree, q[:cut])
        cands = [x for x in leaves if leaf_key(tree, x[:cut]) < mine]
    else:
        cut = h - label // 2
        cands = [x for x in leaves if x[:max(cut, 0)] == q[:max(cut, 0)]]
    return cands[-1] if cands else None


def reaches(edges, src, dst, max_label):
    adj = {}
    for v, p, w in edges:
        if p <= max_label:
            adj.setdefault(v, []).append(w)
    seen, todo = {src}, deque([src])
    while todo:
        v = todo.popleft()
        if v == dst:
            return True
        for w in adj.get(v, ()):
            if w not in seen:
                seen.add(w)
                todo.append(w)
    return False


def is_even(edges):
    """No cycle whose maximal label is odd (checked edge by edge with BFS)."""
    return not any(p % 2 and reaches(edges, w, v, p) for v, p, w in edges)


def _odd_cycle_reachable(start, succ, priority):
    # is there a cycle with odd maximal priority reachable from start?
    reach = set()
    todo = [start]
    while todo:
        v = todo.pop()
        if v in reach:
            continue
        reach.add(v)
        todo += succ[v]
    edges = [(v, 0, w) for v in reach for w in succ[v]]
    for v in reach:
        p = priority[v]
        if p % 2 == 0:
            continue
        # cycle through v using only nodes of priority <= p
        sub = [(a, 0, b) for a, _, b in edges if priority[a] <= p and priority[b] <= p]
        for a, _, b in sub:
            if a == v and reaches(sub, b, v, 0):
                return True
    return False


def brute_parity_regions(owner, priority, succ):
    """Eloise's winning region by enumerating her positional strategies."""
    n = len(owner)
    mine = [v for v in range(n) if owner[v] == 0]
    won = set()
    for choice in itertools.product(*(succ[v] for v in mine)):
        pick = dict(zip(mine, choice))
        restricted = [[pick[v]] if v in pick else list(succ[v]) for v in range(n)]
        for v in range(n):
            if v not in won and not _odd_cycle_reachable(v, restricted, priority):
                won.add(v)
    return won
