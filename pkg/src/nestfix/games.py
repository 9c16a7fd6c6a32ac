"""Explicit parity games, Zielonka's algorithm, fixpoint games and witnesses."""
from __future__ import annotations

import itertools
import sys
from dataclasses import dataclass, field
from typing import Hashable, Sequence

from .eqsys import EquationSystem, SizeLimitError
from .universal import LabelledGraph, find_odd_cycle

ELOISE, ABELARD = 0, 1
DEFAULT_GAME_CAP = 10 ** 4


class GameError(ValueError):
    pass


class ParityGame:
    """Nodes are ``0..n-1``; ``ids`` and ``names`` carry external labels.

    ``owner[v]`` is ELOISE (0) or ABELARD (1); Eloise wins a play when the
    largest priority seen infinitely often is even.
    """

    def __init__(
        self,
        owner: Sequence[int],
        priority: Sequence[int],
        succ: Sequence[Sequence[int]],
        ids: Sequence[int] | None = None,
        names: Sequence[str | None] | None = None,
        keys: Sequence[Hashable] | None = None,
    ):
        n = len(owner)
        if len(priority) != n or len(succ) != n:
            raise GameError("owner, priority and successor lists differ in length")
        self.owner = tuple(owner)
        self.priority = tuple(priority)
        self.succ = tuple(tuple(s) for s in succ)
        self.ids = tuple(ids) if ids is not None else tuple(range(n))
        self.names = tuple(names) if names is not None else (None,) * n
        self.keys = tuple(keys) if keys is not None else self.ids
        for v in range(n):
            if self.owner[v] not in (ELOISE, ABELARD):
                raise GameError(f"node {self.ids[v]}: owner must be 0 or 1")
            if self.priority[v] < 0:
                raise GameError(f"node {self.ids[v]}: negative priority")
            if not self.succ[v]:
                raise GameError(f"node {self.ids[v]} has no successors")
            for w in self.succ[v]:
                if not 0 <= w < n:
                    raise GameError(f"node {self.ids[v]}: successor index {w} out of range")
        self._index = {x: v for v, x in enumerate(self.ids)}

    def __len__(self):
        return len(self.owner)

    def __repr__(self):
        return f"ParityGame(n={len(self)}, max_priority={self.max_priority})"

    def __eq__(self, other):
        return isinstance(other, ParityGame) and (
            self.owner, self.priority, self.succ, self.ids, self.names
        ) == (other.owner, other.priority, other.succ, other.ids, other.names)

    @property
    def max_priority(self) -> int:
        return max(self.priority, default=0)

    @property
    def nodes(self) -> range:
        return range(len(self.owner))

    def index(self, node_id) -> int:
        return self._index[node_id]

    def predecessors(self) -> list[list[int]]:
        pred: list[list[int]] = [[] for _ in self.nodes]
        for v, ws in enumerate(self.succ):
            for w in ws:
                pred[w].append(v)
        return pred


def _attractor(game: ParityGame, pred, S: set, target: set, player: int, strat: dict) -> set:
    """``player``'s attractor to ``target`` inside subgame ``S``; attractor
    moves are recorded in ``strat``."""
    attr = set(target)
    count = {}
    queue = list(target)
    while queue:
        w = queue.pop()
        for v in pred[w]:
            if v not in S or v in attr:
                continue
            if game.owner[v] == player:
                attr.add(v)
                strat[v] = w
                queue.append(v)
            else:
                c = count.get(v)
                if c is None:
                    c = sum(1 for x in game.succ[v] if x in S)
                c -= 1
                count[v] = c
                if c == 0:
                    attr.add(v)
                    queue.append(v)
    return attr


def _zielonka(game, pred, S: set):
    if not S:
        return (set(), set()), ({}, {})
    top = max(game.priority[v] for v in S)
    a = top % 2
    b = 1 - a
    strat_a: dict = {}
    target = {v for v in S if game.priority[v] == top}
    A = _attractor(game, pred, S, target, a, strat_a)
    for v in target:
        if game.owner[v] == a:
            strat_a[v] = next(w for w in game.succ[v] if w in S)
    (w1, strats1) = _zielonka(game, pred, S - A)
    if not w1[b]:
        win = [set(), set()]
        win[a] = set(S)
        strats = [{}, {}]
        strats[a] = {**strat_a, **strats1[a]}
        return tuple(win), tuple(strats)
    strat_b: dict = {}
    B = _attractor(game, pred, S, w1[b], b, strat_b)
    (w2, strats2) = _zielonka(game, pred, S - B)
    win = [set(), set()]
    win[a] = w2[a]
    win[b] = w2[b] | B
    strats = [{}, {}]
    strats[a] = dict(strats2[a])
    strats[b] = {**strats2[b], **{v: s for v, s in strats1[b].items() if v in w1[b]}, **strat_b}
    return tuple(win), tuple(strats)


def zielonka(game: ParityGame):
    """Winning regions and history-free winning strategies of both players.

    Returns ``((win_eloise, win_abelard), (strategy_eloise, strategy_abelard))``
    over node indices; strategies are defined on the owner's nodes in its
    own winning region.
    """
    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 4 * len(game) + 1000))
    try:
        (we, wa), (se, sa) = _zielonka(game, game.predecessors(), set(game.nodes))
    finally:
        sys.setrecursionlimit(limit)
    se = {v: w for v, w in se.items() if v in we and game.owner[v] == ELOISE}
    sa = {v: w for v, w in sa.items() if v in wa and game.owner[v] == ABELARD}
    return (frozenset(we), frozenset(wa)), (se, sa)


def zielonka_solve(game: ParityGame) -> tuple[frozenset, frozenset]:
    """``(win_eloise, win_abelard)`` as sets of node indices."""
    return zielonka(game)[0]


# -- fixpoint games ----------------------------------------------------------


@dataclass
class FixpointGame:
    game: ParityGame
    eloise_nodes: dict  # (u, i) -> node index

    def eloise_wins(self, regions, u, i) -> bool:
        return self.eloise_nodes[(u, i)] in regions[0]


SINK_ELOISE_LOSES = "sink:eloise-stuck"
SINK_ABELARD_LOSES = "sink:abelard-stuck"


def build_fixpoint_game(system: EquationSystem, cap: int = DEFAULT_GAME_CAP) -> FixpointGame:
    """The fixpoint game of ``system`` as an explicit parity game.

    Eloise owns ``(u, i)`` with priority ``ad(i)`` and picks a tuple
    ``(U_0..U_k)`` with ``u <= f_i(U_0..U_k)``; Abelard owns the tuples
    (priority 0) and answers with some ``(u', j)`` where ``u' <= U_j``.
    A player without moves goes to a sink that is losing for them.
    """
    lat = system.lattice
    k = system.k
    elems = list(lat.elements())
    n_tuples = len(elems) ** (k + 1)
    if n_tuples > cap:
        raise SizeLimitError(f"fixpoint game needs {n_tuples} tuple nodes, cap is {cap}")
    basis = lat.basis
    keys: list = []
    owner: list = []
    prio: list = []
    eloise_nodes = {}
    for i in range(k + 1):
        for b in basis:
            eloise_nodes[(b, i)] = len(keys)
            keys.append((b, i))
            owner.append(ELOISE)
            prio.append(system.ad[i])
    tuples = list(itertools.product(elems, repeat=k + 1))
    tuple_node = {}
    for t in tuples:
        tuple_node[t] = len(keys)
        keys.append(t)
        owner.append(ABELARD)
        prio.append(0)
    sink_e = len(keys)
    sink_a = sink_e + 1
    keys += [SINK_ELOISE_LOSES, SINK_ABELARD_LOSES]
    owner += [ELOISE, ELOISE]
    prio += [1, 2]
    succ: list = [[] for _ in keys]
    images = {}
    for t in tuples:
        for i in range(k + 1):
            images[(i, t)] = system.evaluate(i, t)
    for (b, i), v in eloise_nodes.items():
        succ[v] = [tuple_node[t] for t in tuples if lat._leq(b, images[(i, t)])] or [sink_e]
    for t, v in tuple_node.items():
        succ[v] = [
            eloise_nodes[(b, j)] for j in range(k + 1) for b in basis if lat._leq(b, t[j])
        ] or [sink_a]
    succ[sink_e] = [sink_e]
    succ[sink_a] = [sink_a]
    game = ParityGame(owner, prio, succ, names=[str(x) for x in keys], keys=keys)
    return FixpointGame(game, eloise_nodes)


def fixpoint_game_solutions(system: EquationSystem, cap: int = DEFAULT_GAME_CAP) -> tuple:
    """Per-index solutions read off Eloise's winning region in the fixpoint game."""
    fg = build_fixpoint_game(system, cap)
    regions = zielonka_solve(fg.game)
    lat = system.lattice
    return tuple(
        lat.big_join(b for b in lat.basis if fg.eloise_wins(regions, b, i))
        for i in range(system.k + 1)
    )


# -- witnesses ---------------------------------------------------------------


@dataclass(frozen=True)
class Witness:
    """An even labelled graph over pairs ``(basis element, equation index)``."""

    nodes: frozenset
    edges: frozenset  # ((u, i), label, (w, j))
    start: tuple

    def successors(self, node) -> list:
        return sorted(((p, t) for s, p, t in self.edges if s == node), key=repr)

    def relabel(self, edge, label: int) -> "Witness":
        """Copy with one edge's label replaced."""
        if edge not in self.edges:
            raise KeyError(edge)
        s, _, t = edge
        return Witness(self.nodes, (self.edges - {edge}) | {(s, label, t)}, self.start)


@dataclass
class WitnessCheck:
    ok: bool
    diagnostic: str = ""

    def __bool__(self):
        return self.ok


def check_witness(system: EquationSystem, w: Witness) -> WitnessCheck:
    """Validate a witness: start node present, local inequalities, evenness.

    At node ``(v, p)`` the argument ``U_j`` is the join of all ``w`` such that
    ``(w, j)`` is reached by an edge labelled ``ad(j)``.
    """
    lat = system.lattice
    basis = set(lat.basis)
    k, d = system.k, system.d
    if w.start not in w.nodes:
        return WitnessCheck(False, f"start node {w.start!r} is not a witness node")
    for node in w.nodes:
        u, i = node
        if u not in basis or not 0 <= i <= k:
            return WitnessCheck(False, f"node {node!r} is not a (basis element, index) pair")
    out: dict = {node: [] for node in w.nodes}
    for edge in w.edges:
        s, p, t = edge
        if s not in w.nodes or t not in w.nodes:
            return WitnessCheck(False, f"edge {edge!r} leaves the node set")
        if not 0 <= p <= d:
            return WitnessCheck(False, f"edge {edge!r} has label outside 0..{d}")
        out[s].append((p, t))
    for node in sorted(w.nodes, key=repr):
        v, p = node
        parts = [[] for _ in range(k + 1)]
        for label, (u, j) in out[node]:
            if label == system.ad[j]:
                parts[j].append(u)
        args = tuple(lat.big_join(x) for x in parts)
        if not lat._leq(v, system.evaluate(p, args)):
            return WitnessCheck(False, f"local condition fails at node {node!r}")
    odd = find_odd_cycle(LabelledGraph(list(w.nodes), list(w.edges)))
    if odd is not None:
        return WitnessCheck(False, f"odd-dominated cycle through edge {odd!r}")
    return WitnessCheck(True)
