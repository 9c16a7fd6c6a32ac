import random

import pytest

from nestfix import generators
from nestfix.encodings import parity_system
from nestfix.eqsys import Equation, EquationSystem, Polarity, SizeLimitError, canonical_system, kleene_solutions
from nestfix.games import check_witness, zielonka_solve
from nestfix.lattice import PointwiseLattice, PowersetLattice
from nestfix.solver import (
    STAR,
    chained_g,
    chained_solve,
    default_tree,
    extract_witness,
    iteration_bound,
    lift_node,
    lift_operator,
    lift_solve,
    minimal_measure,
    solve,
    u_component,
)
from nestfix.universal import CompleteTree, SuccinctTree

MU, NU = Polarity.LFP, Polarity.GFP
XY = PowersetLattice(["x", "y"])


def top_system():
    return canonical_system(lambda a: XY.top, 0, XY)


def swap_system():
    lat = PowersetLattice(["x"])
    return EquationSystem(lat, [Equation(NU, lambda a: a[1]), Equation(MU, lambda a: a[0])])


def region(game, mask):
    return {v for v in game.nodes if mask >> v & 1}


def test_u_component_examples():
    s = top_system()
    t = SuccinctTree(2, 1)
    star = {(b, 0): STAR for b in XY.basis}
    for q in t.leaves_in_order():
        assert u_component(s, t, star, q, 0) == XY.bottom
        assert u_component(s, t, minimal_measure(s, t), q, 0) == XY.top
    # label-1 successor of the least leaf is undefined
    s1 = EquationSystem(XY, [Equation(MU, lambda a: a[0])])
    assert u_component(s1, t, minimal_measure(s1, t), t.min_leaf(), 0) == XY.bottom


def test_lift_node_examples():
    t = SuccinctTree(2, 1)
    s = top_system()
    assert lift_node(s, t, minimal_measure(s, t), XY.element("x"), 0) == t.min_leaf()
    bot = canonical_system(lambda a: XY.bottom, 0, XY)
    assert lift_node(bot, t, minimal_measure(bot, t), XY.element("x"), 0) is STAR


def test_lift_solve_examples():
    res = lift_solve(top_system())
    assert res.E == {(XY.element("x"), 0), (XY.element("y"), 0)}
    assert res.solutions == (XY.top,)
    sw = lift_solve(swap_system())
    assert sw.E == frozenset() and sw.solutions == (0, 0)
    assert all(v is STAR for v in sw.measure.values())


def test_lift_operator_reaches_fixpoint():
    s = swap_system()
    t = default_tree(s)
    mu = minimal_measure(s, t)
    for _ in range(2 * iteration_bound(s, t)):
        nxt = lift_operator(s, t, mu)
        # Lift is inflationary
        assert all(t.leq(mu[key], nxt[key]) for key in mu)
        if nxt == mu:
            break
        mu = nxt
    assert mu == lift_solve(s, t).measure


def test_chained_examples():
    t = SuccinctTree(2, 1)
    s = top_system()
    ch = chained_solve(s, t)
    assert set(ch.triples()) == {(b, 0, q) for b in XY.basis for q in t.leaves_in_order()}
    assert ch.solutions == (XY.top,)
    assert chained_solve(swap_system()).solutions == (0, 0)
    assert list(chained_solve(swap_system()).triples()) == []


def test_chained_g_examples():
    t = CompleteTree(2, 1)
    strict = EquationSystem(XY, [Equation(MU, lambda a: a[0])])
    assert chained_g(strict, t, set()) == frozenset()
    full = {(b, 0, q) for b in XY.basis for q in t.leaves_in_order()}
    assert chained_g(top_system(), t, set()) == full
    # projection with an undefined label-1 successor at the least leaf
    out = chained_g(strict, t, full)
    assert out == {(b, 0, (1,)) for b in XY.basis}


def test_chained_g_iteration_matches_worklist():
    rng = random.Random(8)
    for _ in range(20):
        s = generators.powerset_system(rng, 2, rng.randint(0, 2))
        t = default_tree(s)
        U = frozenset((b, i, q) for i in range(s.k + 1) for b in s.lattice.basis for q in t.leaves_in_order())
        while True:
            nxt = chained_g(s, t, U)
            if nxt == U:
                break
            U = nxt
        assert U == frozenset(chained_solve(s, t).triples())


def test_chained_cap():
    with pytest.raises(SizeLimitError):
        chained_solve(top_system(), cap=1)


@pytest.mark.parametrize("schedule", ["forward", "backward", "shuffle", "jacobi"])
def test_lifting_matches_zielonka(schedule):
    rng = random.Random(21)
    for _ in range(40):
        g = generators.parity_game(rng, rng.randint(1, 7), rng.randint(0, 5))
        we, _ = zielonka_solve(g)
        res = lift_solve(parity_system(g), schedule=schedule, seed=3)
        assert region(g, res.solutions[-1]) == set(we)


def test_linear_scan_and_complete_tree_agree():
    rng = random.Random(5)
    for _ in range(25):
        g = generators.parity_game(rng, rng.randint(1, 5), rng.randint(0, 4))
        s = parity_system(g)
        base = lift_solve(s)
        assert lift_solve(s, scan="linear").measure == base.measure
        assert lift_solve(s, default_tree(s, "complete")).solutions == base.solutions
        assert lift_solve(s, default_tree(s, height=3)).solutions == base.solutions


def test_witnesses_from_lifting_are_valid():
    rng = random.Random(2)
    for _ in range(30):
        s = generators.powerset_system(rng, rng.randint(1, 3), rng.randint(0, 2))
        t = default_tree(s)
        res = lift_solve(s, t)
        for start in res.E:
            w = extract_witness(s, t, res, start)
            assert w.start == start and start in w.nodes
            assert len(w.nodes) <= len(s.lattice.basis) * (s.k + 1)
            assert check_witness(s, w), check_witness(s, w).diagnostic


def test_top_witness_example():
    s = top_system()
    t = default_tree(s)
    res = lift_solve(s, t)
    x = XY.element("x")
    w = extract_witness(s, t, res, (x, 0))
    assert all(p == 0 for _, p, _ in w.edges)
    assert ((x, 0), 0, (x, 0)) in w.edges
    with pytest.raises(ValueError):
        extract_witness(swap_system(), default_tree(swap_system()), lift_solve(swap_system()), (1, 0))


def test_pointwise_lattice_solvers_agree():
    rng = random.Random(9)
    lat = PointwiseLattice(["a", "b"], 3)
    for _ in range(10):
        s = generators.monotone_table_system(rng, lat, rng.randint(0, 1))
        K = kleene_solutions(s)
        assert lift_solve(s).solutions == K
        assert chained_solve(s).solutions == K


def test_solve_dispatch():
    s = swap_system()
    for algo in ("lifting", "chained", "kleene", "zielonka"):
        sols, stats = solve(s, algo)
        assert sols == (0, 0) and stats["algo"] == algo
    with pytest.raises(ValueError):
        solve(s, "magic")
    with pytest.raises(ValueError):
        default_tree(canonical_system(lambda a: a[0], 4, XY), height=1)


def test_stats_reported():
    res = lift_solve(top_system())
    assert set(res.stats) >= {"lift_calls", "sweeps", "tree_size", "bound", "evaluations"}
    assert res.stats["lift_calls"] <= res.stats["bound"]
