"""Parity, energy parity and probabilistic parity games as canonical systems.

Every encoding yields a monotone ``f_0`` of arity ``k + 1`` where ``k`` is
the largest priority; the game is solved by the canonical system built on
top of it, whose outermost component is Eloise's winning region (or credit
map, for energy games).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .eqsys import EquationSystem, canonical_system
from .games import ELOISE, GameError, ParityGame
from .lattice import PointwiseLattice, PowersetLattice


def _check_priorities(game_priorities: Sequence[int], k: int):
    for v, p in enumerate(game_priorities):
        if not 0 <= p <= k:
            raise GameError(f"node index {v}: priority {p} outside 0..{k}")


# -- standard parity games ---------------------------------------------------


def f_std(game: ParityGame, k: int | None = None):
    """Eloise's one-step function over ``PowersetLattice(nodes)``.

    An Eloise node belongs to the image if some successor lies in the
    argument indexed by its priority; an Abelard node if all successors do.
    """
    k = game.max_priority if k is None else k
    _check_priorities(game.priority, k)
    succ_masks = [sum(1 << w for w in set(ws)) for ws in game.succ]
    rows = [(v, game.priority[v], succ_masks[v], game.owner[v] == ELOISE) for v in game.nodes]

    def f(args):
        out = 0
        for v, p, sm, eloise in rows:
            a = args[p]
            ok = a & sm != 0 if eloise else sm & ~a == 0
            if ok:
                out |= 1 << v
        return out

    return f


def parity_system(game: ParityGame) -> EquationSystem:
    k = game.max_priority
    lat = PowersetLattice(game.nodes)
    return canonical_system(f_std(game, k), k, lat)


# -- energy parity games -----------------------------------------------------


@dataclass
class EnergyGame:
    """A parity game with integer weights aligned with ``game.succ``."""

    game: ParityGame
    weights: tuple  # weights[v][j] is the weight of the move v -> game.succ[v][j]
    declared_w: int | None = None

    def __post_init__(self):
        self.weights = tuple(tuple(ws) for ws in self.weights)
        if len(self.weights) != len(self.game):
            raise GameError("one weight list per node is required")
        for v, ws in enumerate(self.weights):
            if len(ws) != len(self.game.succ[v]):
                raise GameError(f"node {self.game.ids[v]}: weight list does not match successors")
        if self.declared_w is not None:
            if self.declared_w < 0:
                raise GameError("declared weight bound must be non-negative")
            for v, ws in enumerate(self.weights):
                for x in ws:
                    if abs(x) > self.declared_w:
                        raise GameError(
                            f"node {self.game.ids[v]}: weight {x} exceeds declared bound {self.declared_w}"
                        )

    @property
    def W(self) -> int:
        if self.declared_w is not None:
            return self.declared_w
        return max((abs(x) for ws in self.weights for x in ws), default=0)

    @property
    def b(self) -> int:
        """Credit bound: ``n * (number of distinct priorities) * W``."""
        return len(self.game) * len(set(self.game.priority)) * self.W

    def lattice(self, b: int | None = None) -> PointwiseLattice:
        return PointwiseLattice(self.game.nodes, (self.b if b is None else b) + 2)


def en(eg: EnergyGame, v: int, sigma: Sequence[int], b: int | None = None) -> set:
    """Credits needed at ``v`` for each move, given credits ``sigma`` at the
    targets; ``b + 1`` marks an overflow."""
    b = eg.b if b is None else b
    out = set()
    for u, w in zip(eg.game.succ[v], eg.weights[v]):
        need = sigma[u] - w
        if sigma[u] > b or need > b:
            out.add(b + 1)
        else:
            out.add(max(0, need))
    return out


def credits(x: tuple, b: int) -> tuple:
    """Decode a lattice element into credits.

    Coordinates store ``b + 1 - credit`` so that smaller credits sit higher
    in the lattice: greatest fixpoints then start from "credit 0 suffices"
    and solutions are Eloise-favourable least credits.
    """
    return tuple(b + 1 - c for c in x)


def encode_credits(c: Sequence[int], b: int) -> tuple:
    return tuple(b + 1 - x for x in c)


def f_energy(eg: EnergyGame, k: int | None = None, b: int | None = None):
    """Eloise takes the cheapest move, Abelard the most expensive one."""
    game = eg.game
    k = game.max_priority if k is None else k
    b = eg.b if b is None else b
    _check_priorities(game.priority, k)
    rows = [
        (game.priority[v], game.owner[v] == ELOISE, tuple(zip(game.succ[v], eg.weights[v])))
        for v in game.nodes
    ]
    top = b + 1

    def f(args):
        out = []
        for p, eloise, moves in rows:
            a = args[p]
            best = None
            for u, w in moves:
                cu = top - a[u]
                need = cu - w
                c = top if (cu > b or need > b) else (need if need > 0 else 0)
                if best is None or (c < best if eloise else c > best):
                    best = c
            out.append(top - best)
        return tuple(out)

    return f


def energy_system(eg: EnergyGame, b: int | None = None) -> EquationSystem:
    k = eg.game.max_priority
    b = eg.b if b is None else b
    return canonical_system(f_energy(eg, k, b), k, eg.lattice(b))


# -- probabilistic parity games ----------------------------------------------


@dataclass
class ProbabilisticGame:
    """Nodes ``0..n-1`` with exact distributions and thresholds."""

    distributions: tuple  # distributions[v] is a dict {w: Fraction}
    priority: tuple
    sigma: tuple
    ids: tuple = ()

    def __post_init__(self):
        n = len(self.distributions)
        self.distributions = tuple(
            {w: Fraction(p) for w, p in dict(d).items()} for d in self.distributions
        )
        self.priority = tuple(self.priority)
        self.sigma = tuple(Fraction(s) for s in self.sigma)
        self.ids = tuple(self.ids) if self.ids else tuple(range(n))
        if len(self.priority) != n or len(self.sigma) != n or len(self.ids) != n:
            raise GameError("distributions, priorities, thresholds and ids differ in length")
        for v, d in enumerate(self.distributions):
            name = self.ids[v]
            if not d:
                raise GameError(f"node {name} has an empty distribution")
            for w, p in d.items():
                if not 0 <= w < n:
                    raise GameError(f"node {name}: target index {w} out of range")
                if p < 0:
                    raise GameError(f"node {name}: negative probability")
            total = sum(d.values(), Fraction(0))
            if total != 1:
                raise GameError(f"node {name}: probabilities sum to {total}, not 1")
            if not 0 <= self.sigma[v] <= 1:
                raise GameError(f"node {name}: threshold {self.sigma[v]} outside [0, 1]")
            if self.priority[v] < 0:
                raise GameError(f"node {name}: negative priority")

    def __len__(self):
        return len(self.distributions)

    @property
    def nodes(self) -> range:
        return range(len(self.distributions))

    @property
    def max_priority(self) -> int:
        return max(self.priority, default=0)


def f_prob(pg: ProbabilisticGame, k: int | None = None):
    """Nodes whose move set inside the argument for their priority carries
    probability strictly above their threshold."""
    k = pg.max_priority if k is None else k
    _check_priorities(pg.priority, k)
    rows = [
        (v, pg.priority[v], pg.sigma[v], tuple((w, p) for w, p in pg.distributions[v].items() if p))
        for v in pg.nodes
    ]

    def f(args):
        out = 0
        for v, pr, s, dist in rows:
            a = args[pr]
            mass = sum((p for w, p in dist if a >> w & 1), Fraction(0))
            if mass > s:
                out |= 1 << v
        return out

    return f


def prob_system(pg: ProbabilisticGame) -> EquationSystem:
    k = pg.max_priority
    return canonical_system(f_prob(pg, k), k, PowersetLattice(pg.nodes))


def example_probabilistic_game() -> ProbabilisticGame:
    """The four-node game whose winning regions are {0, 2} / {1, 3}."""
    F = Fraction
    return ProbabilisticGame(
        distributions=(
            {0: F(1, 2), 1: F(1, 5), 2: F(3, 10)},
            {1: F(4, 5), 0: F(1, 5)},
            {2: F(2, 5), 3: F(3, 5)},
            {1: F(1)},
        ),
        priority=(0, 1, 2, 3),
        sigma=(F(7, 10), F(3, 10), F(1, 10), F(0)),
    )
