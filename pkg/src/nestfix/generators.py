"""Seeded random instances: games, monotone systems, even graphs, formulas, models.

Every generator takes a ``random.Random`` so that test suites can pin seeds.
"""
from __future__ import annotations

import itertools
import random
from fractions import Fraction

from .encodings import EnergyGame, ProbabilisticGame
from .eqsys import Equation, EquationSystem, Polarity
from .games import ParityGame
from .lattice import FiniteLattice, PowersetLattice
from .mucalc import INF, And, Atom, Bot, Fix, Modal, Model, Or, Top, Var
from .universal import LabelledGraph, find_odd_cycle


def parity_game(rng: random.Random, n: int, max_priority: int, max_out: int = 3) -> ParityGame:
    owner = [rng.randint(0, 1) for _ in range(n)]
    prio = [rng.randint(0, max_priority) for _ in range(n)]
    succ = [rng.sample(range(n), rng.randint(1, min(max_out, n))) for _ in range(n)]
    return ParityGame(owner, prio, succ)


def energy_game(rng: random.Random, n: int, max_priority: int, max_weight: int) -> EnergyGame:
    g = parity_game(rng, n, max_priority, max_out=2)
    weights = [[rng.randint(-max_weight, max_weight) for _ in g.succ[v]] for v in g.nodes]
    return EnergyGame(g, weights)


def _distribution(rng: random.Random, targets, denominator: int) -> dict:
    # split the unit mass into integer parts of 1/denominator
    cuts = sorted(rng.randint(0, denominator) for _ in range(len(targets) - 1))
    parts = [b - a for a, b in zip([0] + cuts, cuts + [denominator])]
    out = {}
    for t, p in zip(targets, parts):
        if p:
            out[t] = Fraction(p, denominator)
    if not out:
        out[targets[0]] = Fraction(1)
    return out


def probabilistic_game(rng: random.Random, n: int, max_priority: int) -> ProbabilisticGame:
    dists = []
    for _ in range(n):
        targets = rng.sample(range(n), rng.randint(1, min(3, n)))
        dists.append(_distribution(rng, targets, rng.choice([2, 4, 5, 10])))
    prio = [rng.randint(0, max_priority) for _ in range(n)]
    sigma = [Fraction(rng.randint(0, 9), 10) for _ in range(n)]
    return ProbabilisticGame(dists, prio, sigma)


def random_polarities(rng: random.Random, k: int) -> list:
    return [rng.choice((Polarity.LFP, Polarity.GFP)) for _ in range(k + 1)]


def _dnf_rhs(rng: random.Random, width: int, inputs: int, max_clauses: int = 3, max_lits: int = 3):
    """A monotone map on bitmasks: every output bit is a positive DNF over the
    ``inputs`` bits of the concatenated arguments."""
    bits = []
    for _ in range(width):
        clauses = []
        for _ in range(rng.randint(0, max_clauses)):
            size = rng.randint(0, min(max_lits, inputs))
            clauses.append(sum(1 << x for x in rng.sample(range(inputs), size)))
        bits.append(tuple(clauses))
    return bits


def powerset_system(rng: random.Random, m: int, k: int) -> EquationSystem:
    """Random monotone system over ``PowersetLattice(range(m))``."""
    lat = PowersetLattice(range(m))
    eqs = []
    for pol in random_polarities(rng, k):
        table = _dnf_rhs(rng, m, m * (k + 1))
        eqs.append(Equation(pol, _make_dnf(table, m)))
    return EquationSystem(lat, eqs)


def _make_dnf(table, m):
    def f(args):
        x = 0
        for j, a in enumerate(args):
            x |= a << (j * m)
        out = 0
        for bit, clauses in enumerate(table):
            for c in clauses:
                if x & c == c:
                    out |= 1 << bit
                    break
        return out

    return f


def monotone_table_system(rng: random.Random, lattice: FiniteLattice, k: int) -> EquationSystem:
    """Random monotone system over any enumerable lattice: each rhs is the
    monotone hull ``x -> join{g(y) | y <= x}`` of a random table ``g``."""
    elems = list(lattice.elements())
    tuples = list(itertools.product(elems, repeat=k + 1))
    eqs = []
    for pol in random_polarities(rng, k):
        g = {t: rng.choice(elems) for t in tuples}
        # keep images small on average so that the solutions are not all top
        for t in tuples:
            if rng.random() < 0.5:
                g[t] = lattice.bottom
        table = {}
        for t in tuples:
            acc = lattice.bottom
            for y in tuples:
                if all(lattice._leq(a, b) for a, b in zip(y, t)):
                    acc = lattice._join2(acc, g[y])
            table[t] = acc
        eqs.append(Equation(pol, table.__getitem__))
    return EquationSystem(lattice, eqs)


def even_graph(rng: random.Random, n_nodes: int, max_label: int, density: float = 0.4) -> LabelledGraph:
    """A random labelled graph made even by deleting offending odd edges."""
    nodes = list(range(n_nodes))
    edges = set()
    for v in nodes:
        for w in nodes:
            if rng.random() < density:
                edges.add((v, rng.randint(0, max_label), w))
    while True:
        bad = find_odd_cycle(LabelledGraph(nodes, list(edges)))
        if bad is None:
            break
        edges.discard(bad)
    return LabelledGraph(nodes, sorted(edges))


# -- formulas and models -----------------------------------------------------

_MODALS = {
    "kripke": ("dia", "box"),
    "multigraph": ("gdia", "gbox"),
    "markov": ("pdia", "pbox"),
}


def _param(rng, kind):
    if kind in ("gdia", "gbox"):
        return rng.randint(0, 2)
    if kind in ("pdia", "pbox"):
        return Fraction(rng.randint(0, 4), 4)
    return None


def formula(rng: random.Random, model_kind: str, max_depth: int = 3, atoms=("p", "q")):
    """A clean, closed random formula of depth at most ``max_depth``."""
    counter = itertools.count()

    def gen(d, scope):
        leaves = [Top(), Bot()] + [Atom(a) for a in atoms] + [Var(x) for x in scope]
        if d == 0:
            return rng.choice(leaves)
        r = rng.random()
        if r < 0.15:
            return rng.choice(leaves)
        if r < 0.35:
            return Or(gen(d - 1, scope), gen(d - 1, scope))
        if r < 0.5:
            return And(gen(d - 1, scope), gen(d - 1, scope))
        if r < 0.75:
            kind = rng.choice(_MODALS[model_kind])
            return Modal(kind, gen(d - 1, scope), _param(rng, kind))
        var = f"X{next(counter)}"
        eta = rng.choice((Polarity.LFP, Polarity.GFP))
        return Fix(eta, var, gen(d - 1, scope + [var]))

    return gen(max_depth, [])


def model(rng: random.Random, kind: str, n_states: int, atoms=("p", "q")) -> Model:
    states = list(range(n_states))
    trans: dict = {}
    for s in states:
        if kind == "kripke":
            trans[s] = rng.sample(states, rng.randint(0, min(2, n_states)))
        elif kind == "multigraph":
            trans[s] = {
                t: (INF if rng.random() < 0.1 else rng.randint(1, 3))
                for t in rng.sample(states, rng.randint(0, min(2, n_states)))
            }
        else:
            targets = rng.sample(states, rng.randint(1, min(3, n_states)))
            trans[s] = _distribution(rng, targets, rng.choice([2, 4]))
    labels = {a: [s for s in states if rng.random() < 0.5] for a in atoms}
    return Model(kind, states, trans, labels)
