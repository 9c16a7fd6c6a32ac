import random
from fractions import Fraction as F
from pathlib import Path

import pytest

from nestfix import generators
from nestfix.encodings import example_probabilistic_game
from nestfix.eqsys import Polarity, kleene_solutions
from nestfix.formats import (
    ParseError,
    parse_bes,
    parse_energy,
    parse_formula,
    parse_model,
    parse_pgsolver,
    parse_prob,
    parse_rational,
    write_bes,
    write_energy,
    write_model,
    write_pgsolver,
    write_prob,
)
from nestfix.games import ABELARD, ELOISE, GameError
from nestfix.mucalc import INF, And, Atom, Fix, Modal, ModelError, Or, binder_depths, formula_ad

FIX = Path(__file__).parent / "fixtures"


def test_pgsolver_examples():
    g = parse_pgsolver("parity 1; 0 2 0 0;")
    assert len(g) == 1 and g.owner == (ELOISE,) and g.priority == (2,) and g.succ == ((0,),)
    g = parse_pgsolver("0 1 1 1; 1 2 0 0,1;")
    assert g.owner == (ABELARD, ELOISE) and g.succ == ((1,), (0, 1))
    with pytest.raises(ParseError):
        parse_pgsolver("0 1 0 ;")


def test_pgsolver_errors_carry_position():
    with pytest.raises(ParseError) as e:
        parse_pgsolver("parity 1;\n0 1 0 0;\n1 2 x 0;")
    assert e.value.line == 3
    with pytest.raises(GameError):
        parse_pgsolver("0 1 0 7;")
    with pytest.raises(GameError):
        parse_pgsolver("0 1 0 0; 0 2 0 0;")
    with pytest.raises(GameError):
        parse_pgsolver("parity 0; 0 1 0 1; 1 1 0 0;")


def test_pgsolver_names_and_ids():
    g = parse_pgsolver((FIX / "game.gm").read_text())
    assert len(g) == 5 and g.names[0] == "start"
    assert parse_pgsolver(write_pgsolver(g)) == g


def test_pgsolver_round_trip_random():
    rng = random.Random(1)
    for _ in range(30):
        g = generators.parity_game(rng, rng.randint(1, 6), 4)
        assert parse_pgsolver(write_pgsolver(g)) == g


def test_energy_examples():
    eg = parse_energy("energy 0; 0 0 0 0:-1;")
    assert eg.game.succ == ((0,),) and eg.weights == ((-1,),)
    eg = parse_energy((FIX / "single.energy").read_text())
    assert eg.declared_w == 2 and eg.W == 2
    again = parse_energy(write_energy(eg))
    assert again.game == eg.game and again.weights == eg.weights and again.declared_w == 2
    with pytest.raises(ParseError):
        parse_energy("energy 0; 0 0 0 0;")


def test_prob_examples():
    pg = parse_prob((FIX / "example.pg").read_text())
    ref = example_probabilistic_game()
    assert pg.distributions == ref.distributions and pg.sigma == ref.sigma and pg.priority == ref.priority
    again = parse_prob(write_prob(pg))
    assert again.distributions == pg.distributions and again.sigma == pg.sigma
    with pytest.raises(GameError):
        parse_prob("prob 0; 0 0 0 0:1/2;")


def test_prob_decimals_are_exact():
    pg = parse_prob("prob 1; 0 0 0.3 0:0.7,1:0.3; 1 1 0 1:1;")
    assert pg.sigma[0] == F(3, 10) and pg.distributions[0] == {0: F(7, 10), 1: F(3, 10)}
    assert parse_rational("0.1") == F(1, 10)
    assert parse_rational("-3/6") == F(-1, 2)


def test_model_files():
    m = parse_model((FIX / "chain.json").read_text())
    assert m.kind == "kripke" and m.members(m.labels["p"]) == ["z"]
    c = parse_model((FIX / "coin.json").read_text())
    assert c.trans[0] == {1: F(1, 2), 2: F(1, 2)}
    g = parse_model((FIX / "multi.json").read_text())
    assert g.trans[0] == {1: 2, 0: INF}
    for m in (m, c, g):
        again = parse_model(write_model(m))
        assert again.trans == m.trans and again.labels == m.labels and again.states == m.states
    with pytest.raises(ModelError):
        parse_model('{"kind": "markov", "states": ["s"], "transitions": {"s": [["s", 0.4]]}}')


def test_formula_examples():
    f = parse_formula("mu X. p | <> X")
    assert isinstance(f, Fix) and isinstance(f.body, Or)
    psi = parse_formula("nu X. mu Y. (p & <> X) | <> Y", closed=True)
    assert formula_ad(psi) == 2
    assert sorted(binder_depths(psi).values()) == [1, 2]
    with pytest.raises(Exception) as e:
        parse_formula("mu X. mu X. X")
    assert "clean" in str(e.value) or "bound" in str(e.value)


def test_formula_modalities():
    f = parse_formula("<p 2/5> p & [p 0.5] q")
    assert isinstance(f, And)
    assert f.left == Modal("pdia", Atom("p"), F(2, 5))
    assert f.right == Modal("pbox", Atom("q"), F(1, 2))
    g = parse_formula("<2> tt | [1] ff")
    assert g.left.kind == "gdia" and g.left.param == 2
    assert g.right == Modal("gbox", parse_formula("ff"), 1)
    assert parse_formula("[] X").kind == "box"
    with pytest.raises(ParseError):
        parse_formula("[0.5] q")
    with pytest.raises(ParseError):
        parse_formula("mu x. p")
    with pytest.raises(ParseError):
        parse_formula("p &")


def test_formula_print_parse_round_trip():
    rng = random.Random(5)
    for kind in ("kripke", "multigraph", "markov"):
        for _ in range(30):
            f = generators.formula(rng, kind, 3)
            assert parse_formula(str(f)) == f


def test_bes_file():
    bes = parse_bes((FIX / "alternating.bes").read_text())
    assert bes.names == ("X", "Y", "Z")
    assert bes.polarities == (Polarity.GFP, Polarity.LFP, Polarity.GFP)
    # hand evaluation: Y = mu Y. Y is false, and X, Z follow it
    assert kleene_solutions(bes.to_system()) == (0, 0, 0)
    again = parse_bes(write_bes(bes))
    assert again == bes


def test_bes_errors():
    with pytest.raises(ParseError):
        parse_bes("nu X = X &")
    with pytest.raises(Exception):
        parse_bes("nu X = Y")
