"""Universal-graph solvers: progress-measure lifting and the chained product.

Both solvers pair every basis element ``u`` and equation index ``i`` with
leaves of a universal tree.  Leaves are handled as ranks in leaf order;
rank ``tree.size`` stands for the top sentinel STAR.
"""
from __future__ import annotations

import random
from bisect import bisect_right
from collections import deque
from dataclasses import dataclass, field

from .eqsys import EquationSystem, SizeLimitError
from .games import Witness
from .universal import STAR, UniversalTree, default_height, make_tree

DEFAULT_CHAINED_CAP = 10 ** 6
SCHEDULES = ("forward", "backward", "shuffle", "jacobi")


def default_tree(system: EquationSystem, flavor: str = "succinct", height: int | None = None) -> UniversalTree:
    """A tree universal for witnesses of ``system``.

    Witnesses have at most ``|B_L| * (k + 1)`` nodes, so the tree gets that
    many leaves' worth of width; one level per odd label in ``0..d`` unless
    a taller ``height`` is requested.
    """
    need = default_height(system.d)
    h = need if height is None else height
    if h < need:
        raise ValueError(f"tree height {h} is too small for alternation depth {system.d} (need {need})")
    width = max(1, len(system.lattice.basis) * (system.k + 1))
    return make_tree(flavor, width, h)


def iteration_bound(system: EquationSystem, tree: UniversalTree) -> int:
    """Upper bound on the number of value-changing node lifts."""
    return len(system.lattice.basis) * (system.k + 1) * tree.size


@dataclass
class SolveResult:
    E: frozenset
    solutions: tuple
    measure: dict
    stats: dict
    ranks: list = field(repr=False, default_factory=list)

    def holds(self, u, i) -> bool:
        return (u, i) in self.E


class _Evaluator:
    """Shared machinery: U-components from rank rows, cached rhs calls."""

    CACHE_LIMIT = 1 << 18

    def __init__(self, system: EquationSystem, tree: UniversalTree):
        self.system = system
        self.tree = tree
        self.lat = system.lattice
        self.basis = system.lattice.basis
        self.n = len(self.basis)
        self.k = system.k
        self.Z = tree.size
        if system.d > tree.max_label:
            raise ValueError(f"{tree!r} supports labels up to {tree.max_label}, system needs {system.d}")
        self.tables = [tree.succ_table(a) for a in system.ad]
        self.cache: dict = {}
        self.mask_cache: dict = {}
        self.evaluations = 0

    def image_mask(self, p: int, args: tuple) -> int:
        """Basis mask of ``f_p(args)``."""
        key = (p, args)
        hit = self.cache.get(key)
        if hit is None:
            self.evaluations += 1
            hit = self.lat.basis_mask(self.system.evaluate(p, args))
            if len(self.cache) >= self.CACHE_LIMIT:
                self.cache.clear()
            self.cache[key] = hit
        return hit


    def masked_image(self, p: int, masks: tuple) -> int:
        """Basis mask of ``f_p`` applied to the joins of the given basis masks."""
        key = (p, masks)
        hit = self.mask_cache.get(key)
        if hit is None:
            jm = self.lat.join_mask
            hit = self.image_mask(p, tuple(jm(m) for m in masks))
            if len(self.mask_cache) >= self.CACHE_LIMIT:
                self.mask_cache.clear()
            self.mask_cache[key] = hit
        return hit


class _Lifter(_Evaluator):
    def __init__(self, system, tree, scan="binary"):
        super().__init__(system, tree)
        if scan not in ("binary", "linear"):
            raise ValueError(f"unknown scan {scan!r}")
        self.scan = scan
        self.mu = None

    def u_mask(self, mu, i: int, q: int) -> int:
        s = self.tables[i][q]
        if s < 0:
            return 0
        m = 0
        for u, r in enumerate(mu[i]):
            if r <= s:
                m |= 1 << u
        return m

    def bind(self, mu):
        """Attach a measure that is updated in place through ``set``.

        Each row keeps its basis bits bucketed by rank plus prefix ORs over
        the sorted ranks, so ``U``-masks are a bisection away.
        """
        self.mu = mu
        self.buckets = []
        for row in mu:
            b: dict = {}
            for u, r in enumerate(row):
                b[r] = b.get(r, 0) | 1 << u
            self.buckets.append(b)
        self.prefix = [None] * len(mu)

    def set(self, p: int, v: int, val: int):
        b = self.buckets[p]
        old = self.mu[p][v]
        rest = b[old] & ~(1 << v)
        if rest:
            b[old] = rest
        else:
            del b[old]
        b[val] = b.get(val, 0) | 1 << v
        self.mu[p][v] = val
        self.prefix[p] = None

    def _prefix(self, i: int):
        pre = self.prefix[i]
        if pre is None:
            keys = sorted(self.buckets[i])
            ors = [0]
            acc = 0
            for r in keys:
                acc |= self.buckets[i][r]
                ors.append(acc)
            pre = self.prefix[i] = (keys, ors)
        return pre

    def cached_masks(self, q: int) -> tuple:
        out = []
        for i in range(self.k + 1):
            s = self.tables[i][q]
            if s < 0:
                out.append(0)
                continue
            pre = self.prefix[i] or self._prefix(i)
            out.append(pre[1][bisect_right(pre[0], s)])
        return tuple(out)

    def holds(self, mu, v: int, p: int, q: int) -> bool:
        if mu is self.mu:
            masks = self.cached_masks(q)
        else:
            masks = tuple(self.u_mask(mu, i, q) for i in range(self.k + 1))
        return self.masked_image(p, masks) >> v & 1 == 1

    def lift(self, mu, v: int, p: int, start: int = 0) -> int:
        """Least rank ``q >= start`` satisfying the progress condition, or Z."""
        Z = self.Z
        if start >= Z:
            return Z
        if self.holds(mu, v, p, start):
            return start
        if self.scan == "linear":
            for q in range(start + 1, Z):
                if self.holds(mu, v, p, q):
                    return q
            return Z
        # the condition is monotone in q: gallop from the current value, then
        # bisect; nodes usually climb by a few ranks at a time
        lo, step = start + 1, 1
        while lo + step - 1 < Z and not self.holds(mu, v, p, lo + step - 1):
            lo += step
            step *= 2
        hi = min(lo + step - 1, Z)
        while lo < hi:
            mid = (lo + hi) // 2
            if self.holds(mu, v, p, mid):
                hi = mid
            else:
                lo = mid + 1
        return lo


def _to_ranks(lifter: _Lifter, measure: dict) -> list:
    tree = lifter.tree
    rows = []
    for i in range(lifter.k + 1):
        row = []
        for b in lifter.basis:
            val = measure[(b, i)]
            row.append(lifter.Z if val is STAR else tree.rank(val))
        rows.append(row)
    return rows


def _from_ranks(lifter: _Lifter, rows) -> dict:
    tree = lifter.tree
    out = {}
    for i, row in enumerate(rows):
        for v, r in enumerate(row):
            out[(lifter.basis[v], i)] = STAR if r >= lifter.Z else tree.leaf(r)
    return out


def minimal_measure(system: EquationSystem, tree: UniversalTree) -> dict:
    q0 = tree.min_leaf()
    return {(b, i): q0 for i in range(system.k + 1) for b in system.lattice.basis}


def u_component(system: EquationSystem, tree: UniversalTree, measure: dict, q, i: int):
    """``U_i^{mu,q}``: join of the basis elements ``u`` with ``mu(u, i) <= K_ad(i)(q)``."""
    lifter = _Lifter(system, tree)
    rows = _to_ranks(lifter, measure)
    return system.lattice.join_mask(lifter.u_mask(rows, i, tree.rank(q)))


def lift_node(system: EquationSystem, tree: UniversalTree, measure: dict, v, p: int):
    """The least leaf ``q`` with ``v <= f_p(U_0^{mu,q}, ..., U_k^{mu,q})``, or STAR."""
    lifter = _Lifter(system, tree, scan="linear")
    rows = _to_ranks(lifter, measure)
    r = lifter.lift(rows, system.lattice.basis.index(v), p)
    return STAR if r >= lifter.Z else tree.leaf(r)


def lift_operator(system: EquationSystem, tree: UniversalTree, measure: dict) -> dict:
    """One atomic application of Lift to a whole measure."""
    lifter = _Lifter(system, tree)
    rows = _to_ranks(lifter, measure)
    new = [[lifter.lift(rows, v, p) for v in range(lifter.n)] for p in range(lifter.k + 1)]
    return _from_ranks(lifter, new)


def _sweep(lifter: _Lifter, mu, nodes, schedule: str, rng) -> tuple[int, int]:
    """Gauss-Seidel round-robin sweeps until a full sweep changes nothing.

    A node whose last lift left it unchanged and happened after the latest
    change anywhere cannot move, so it is skipped.
    """
    n, k, Z = lifter.n, lifter.k, lifter.Z
    nodes = list(nodes)
    epoch = 0
    seen = [[-1] * n for _ in range(k + 1)]
    lifts = sweeps = 0
    changed = True
    while changed:
        changed = False
        sweeps += 1
        if schedule == "shuffle":
            rng.shuffle(nodes)
        for v, p in nodes:
            cur = mu[p][v]
            if cur >= Z or seen[p][v] == epoch:
                continue
            val = lifter.lift(mu, v, p, cur)
            if val != cur:
                lifter.set(p, v, val)
                lifts += 1
                epoch += 1
                changed = True
            else:
                seen[p][v] = epoch
    return lifts, sweeps



def lift_solve(
    system: EquationSystem,
    tree: UniversalTree | None = None,
    *,
    schedule: str = "forward",
    seed: int = 0,
    scan: str = "binary",
) -> SolveResult:
    """Least fixpoint of Lift above the minimal measure.

    Round-robin sweeps over the nodes ``(v, p)`` repeat until nothing can
    change.  Values only ever grow, so each lift resumes from the node's
    current value and STAR is never revisited.  ``schedule="jacobi"`` applies Lift
    atomically instead, against a snapshot of the previous measure.
    """
    if schedule not in SCHEDULES:
        raise ValueError(f"unknown schedule {schedule!r}")
    tree = tree or default_tree(system)
    lifter = _Lifter(system, tree, scan)
    n, k, Z = lifter.n, lifter.k, lifter.Z
    mu = [[0] * n for _ in range(k + 1)]
    nodes = [(v, p) for p in range(k + 1) for v in range(n)]
    if schedule == "backward":
        nodes.reverse()
    rng = random.Random(seed)
    lifts = sweeps = 0
    lifter.bind(mu)
    if schedule == "jacobi":
        changed = True
        while changed:
            changed = False
            sweeps += 1
            new = [row[:] for row in mu]
            for v, p in nodes:
                if mu[p][v] < Z:
                    new[p][v] = lifter.lift(mu, v, p, mu[p][v])
            for v, p in nodes:
                if new[p][v] != mu[p][v]:
                    lifts += 1
                    changed = True
            mu = new
            lifter.bind(mu)
    else:
        lifts, sweeps = _sweep(lifter, mu, nodes, schedule, rng)
    bound = iteration_bound(system, tree)
    assert lifts <= bound, f"lift count {lifts} exceeds bound {bound}"
    basis = lifter.basis
    lat = system.lattice
    E = frozenset((basis[v], p) for p in range(k + 1) for v in range(n) if mu[p][v] < Z)
    solutions = tuple(
        lat.join_mask(sum(1 << v for v in range(n) if mu[p][v] < Z)) for p in range(k + 1)
    )
    stats = {
        "lift_calls": lifts,
        "sweeps": sweeps,
        "tree_size": Z,
        "bound": bound,
        "evaluations": lifter.evaluations,
    }
    return SolveResult(E, solutions, _from_ranks(lifter, mu), stats, mu)


# -- witnesses ---------------------------------------------------------------


def extract_witness(system: EquationSystem, tree: UniversalTree, result: SolveResult, start) -> Witness:
    """Witness for ``start`` read off a stabilized measure.

    From ``(u, i)`` there is an edge labelled ``ad(j)`` to every ``(w, j)`` in
    ``E`` with ``mu(w, j) <= K_ad(j)(mu(u, i))``; only nodes reachable from
    ``start`` are kept.
    """
    if start not in result.E:
        raise ValueError(f"{start!r} is not in the solution set E")
    basis = system.lattice.basis
    index = {b: v for v, b in enumerate(basis)}
    tables = [tree.succ_table(a) for a in system.ad]
    rows = result.ranks or _to_ranks(_Lifter(system, tree), result.measure)
    Z = tree.size
    members = [(v, j) for j in range(system.k + 1) for v in range(len(basis)) if rows[j][v] < Z]
    seen = {(index[start[0]], start[1])}
    todo = [next(iter(seen))]
    edges = set()
    while todo:
        v, i = todo.pop()
        q = rows[i][v]
        for w, j in members:
            s = tables[j][q]
            if s >= 0 and rows[j][w] <= s:
                edges.add(((basis[v], i), system.ad[j], (basis[w], j)))
                if (w, j) not in seen:
                    seen.add((w, j))
                    todo.append((w, j))
    nodes = frozenset((basis[v], i) for v, i in seen)
    return Witness(nodes, frozenset(edges), start)


# -- chained product ---------------------------------------------------------


@dataclass
class ChainedResult:
    solutions: tuple
    masks: list = field(repr=False)  # masks[i][q]: basis indices u with (u, i, q) in the fixpoint
    tree: UniversalTree = field(repr=False, default=None)
    basis: tuple = field(repr=False, default=())
    stats: dict = field(default_factory=dict)

    def contains(self, u, i: int, q) -> bool:
        v = self.basis.index(u)
        return self.masks[i][self.tree.rank(q)] >> v & 1 == 1

    def members(self, i: int) -> list:
        """Basis elements ``u`` with ``(u, i, q)`` in the fixpoint for some ``q``."""
        acc = 0
        for m in self.masks[i]:
            acc |= m
        return [b for v, b in enumerate(self.basis) if acc >> v & 1]

    def triples(self):
        for i, row in enumerate(self.masks):
            for q, m in enumerate(row):
                for v, b in enumerate(self.basis):
                    if m >> v & 1:
                        yield (b, i, self.tree.leaf(q))


def chained_g(system: EquationSystem, tree: UniversalTree, U) -> frozenset:
    """One application of the chained-product function to a set of triples
    ``(u, i, q)``."""
    ev = _Evaluator(system, tree)
    lat = system.lattice
    index = {b: v for v, b in enumerate(ev.basis)}
    masks = [[0] * ev.Z for _ in range(ev.k + 1)]
    for u, i, q in U:
        masks[i][tree.rank(q)] |= 1 << index[u]
    out = set()
    for q in range(ev.Z):
        args = _chained_args(ev, masks, q)
        for p in range(ev.k + 1):
            img = ev.image_mask(p, args)
            for v in range(ev.n):
                if img >> v & 1:
                    out.add((ev.basis[v], p, tree.leaf(q)))
    return frozenset(out)


def _chained_args(ev: _Evaluator, masks, q: int) -> tuple:
    jm = ev.lat.join_mask
    bottom = ev.lat.bottom
    out = []
    for i in range(ev.k + 1):
        s = ev.tables[i][q]
        out.append(jm(masks[i][s]) if s >= 0 else bottom)
    return tuple(out)


def chained_solve(
    system: EquationSystem,
    tree: UniversalTree | None = None,
    *,
    cap: int = DEFAULT_CHAINED_CAP,
) -> ChainedResult:
    """Greatest fixpoint of the chained-product function, from the full product.

    Triples are stored as one basis bitmask per ``(i, q)``.  A worklist keeps
    the leaves whose arguments changed; a leaf's value only depends on the
    masks at ``K_ad(i)(q)``.
    """
    tree = tree or default_tree(system)
    ev = _Evaluator(system, tree)
    n, k, Z = ev.n, ev.k, ev.Z
    size = n * (k + 1) * Z
    if size > cap:
        raise SizeLimitError(f"chained product has {size} triples, cap is {cap}")
    full = (1 << n) - 1
    masks = [[full] * Z for _ in range(k + 1)]
    preimage = []
    for i in range(k + 1):
        pre = [[] for _ in range(Z)]
        for q, s in enumerate(ev.tables[i]):
            if s >= 0:
                pre[s].append(q)
        preimage.append(pre)
    work = deque(range(Z))
    queued = [True] * Z
    rounds = 0
    while work:
        q = work.popleft()
        queued[q] = False
        rounds += 1
        args = _chained_args(ev, masks, q)
        for p in range(k + 1):
            new = masks[p][q] & ev.image_mask(p, args)
            if new != masks[p][q]:
                masks[p][q] = new
                for q2 in preimage[p][q]:
                    if not queued[q2]:
                        queued[q2] = True
                        work.append(q2)
    lat = system.lattice
    sols = []
    for i in range(k + 1):
        acc = 0
        for m in masks[i]:
            acc |= m
        sols.append(lat.join_mask(acc))
    stats = {"tree_size": Z, "triples": size, "updates": rounds, "evaluations": ev.evaluations}
    return ChainedResult(tuple(sols), masks, tree, ev.basis, stats)


# -- dispatch ------------------------------------------------------------------

ALGORITHMS = ("lifting", "chained", "kleene", "zielonka")


def solve(
    system: EquationSystem,
    algo: str = "lifting",
    *,
    flavor: str = "succinct",
    height: int | None = None,
    chained_cap: int = DEFAULT_CHAINED_CAP,
    game_cap: int | None = None,
    schedule: str = "forward",
    seed: int = 0,
) -> tuple[tuple, dict]:
    """Solve with any backend; returns ``(solutions, stats)``.

    ``zielonka`` goes through the explicit fixpoint game and so only works
    for small enumerable lattices.
    """
    from .eqsys import kleene_solutions
    from .games import DEFAULT_GAME_CAP, fixpoint_game_solutions

    if algo not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algo!r}")
    stats: dict = {"algo": algo}
    if algo in ("lifting", "chained"):
        tree = default_tree(system, flavor, height)
        if algo == "lifting":
            res = lift_solve(system, tree, schedule=schedule, seed=seed)
            stats.update(res.stats)
            return res.solutions, stats
        ch = chained_solve(system, tree, cap=chained_cap)
        stats.update(ch.stats)
        return ch.solutions, stats
    if algo == "kleene":
        return kleene_solutions(system), stats
    return fixpoint_game_solutions(system, game_cap or DEFAULT_GAME_CAP), stats
