"""Text formats: PGSolver games, energy and probabilistic games, JSON models,
formulas and Boolean equation systems.

Parsers raise ParseError (with line and column) for malformed text and the
domain errors (GameError, ModelError, FormulaError) for well-formed input
that fails validation.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction

from .encodings import EnergyGame, ProbabilisticGame
from .eqsys import Equation, EquationSystem, Polarity
from .games import GameError, ParityGame
from .lattice import PowersetLattice
from .mucalc import (
    And,
    Atom,
    Bot,
    Fix,
    Formula,
    FormulaError,
    Modal,
    Model,
    ModelError,
    Or,
    Top,
    Var,
    validate,
)


class ParseError(ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        self.line, self.col = line, col
        super().__init__(f"{line}:{col}: {msg}" if line else msg)


# -- tokens for the line-based game formats ----------------------------------

_TOKEN = re.compile(
    r"""(?P<ws>\s+)
      | (?P<comment>\#[^\n]*)
      | (?P<num>-?\d+(?:\.\d+)?(?:/\d+)?)
      | (?P<word>[A-Za-z_][A-Za-z0-9_]*)
      | (?P<str>"(?:[^"\\\n]|\\.)*")
      | (?P<punct>[;,:])
    """,
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list:
    out = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            out.append(_Tok(kind, m.group(), line, m.start() - line_start + 1))
        chunk = m.group()
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = m.start() + chunk.rindex("\n") + 1
        pos = m.end()
    return out


class _Stream:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def at_end(self):
        return self.i >= len(self.toks)

    def next(self, what: str = "token"):
        t = self.peek()
        if t is None:
            last = self.toks[-1] if self.toks else _Tok("", "", 1, 1)
            raise ParseError(f"unexpected end of input, expected {what}", last.line, last.col + len(last.text))
        self.i += 1
        return t

    def expect(self, kind: str, text: str | None = None, what: str | None = None):
        t = self.next(what or text or kind)
        if t.kind != kind or (text is not None and t.text != text):
            raise ParseError(f"expected {what or text or kind}, found {t.text!r}", t.line, t.col)
        return t

    def accept(self, kind: str, text: str | None = None):
        t = self.peek()
        if t is not None and t.kind == kind and (text is None or t.text == text):
            self.i += 1
            return t
        return None


def _int(st: _Stream, what: str, signed: bool = False) -> int:
    t = st.expect("num", what=what)
    if not re.fullmatch(r"-?\d+" if signed else r"\d+", t.text):
        raise ParseError(f"expected {what}, found {t.text!r}", t.line, t.col)
    return int(t.text)


def parse_rational(text: str) -> Fraction:
    """Exact value of ``p/q``, a decimal literal, or an integer."""
    if not re.fullmatch(r"-?\d+(?:\.\d+)?(?:/\d+)?", text.strip()):
        raise ValueError(f"not a rational literal: {text!r}")
    if "/" in text:
        num, den = text.split("/")
        return Fraction(Decimal(num)) / Fraction(int(den))
    return Fraction(Decimal(text))


def _rat(st: _Stream, what: str) -> Fraction:
    t = st.expect("num", what=what)
    try:
        value = parse_rational(t.text)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"bad rational {t.text!r}", t.line, t.col) from None
    return value


def _header(st: _Stream, keyword: str, required: bool):
    t = st.peek()
    if t is not None and t.kind == "word" and t.text == keyword:
        st.next()
        max_id = _int(st, "maximal node id")
        extra = []
        while st.peek() is not None and st.peek().kind == "num":
            extra.append(_int(st, "header value"))
        st.expect("punct", ";")
        return max_id, extra, t
    if required:
        where = t or _Tok("", "", 1, 1)
        raise ParseError(f"expected header '{keyword} <maxId>;'", where.line, where.col)
    return None, [], None


def _check_ids(entries, max_id, header_tok):
    index = {}
    for e in entries:
        nid, tok = e[0], e[-1]
        if nid in index:
            raise GameError(f"line {tok.line}: duplicate node id {nid}")
        if max_id is not None and nid > max_id:
            raise GameError(f"line {tok.line}: node id {nid} exceeds declared maximum {max_id}")
        index[nid] = len(index)
    return index


def _resolve(index, nid, tok):
    try:
        return index[nid]
    except KeyError:
        raise GameError(f"line {tok.line}: unknown successor id {nid}") from None


# -- PGSolver ------------------------------------------------------------------


def parse_pgsolver(text: str) -> ParityGame:
    """``parity <maxId>;`` (optional) then ``<id> <priority> <owner>
    <succ>(,<succ>)* ["name"];`` per node; owner 0 is Eloise."""
    st = _Stream(text)
    max_id, _, htok = _header(st, "parity", required=False)
    entries = []
    while not st.at_end():
        first = st.peek()
        nid = _int(st, "node id")
        pri = _int(st, "priority")
        own = _int(st, "owner (0 or 1)")
        if own not in (0, 1):
            raise ParseError(f"owner must be 0 or 1, got {own}", first.line, first.col)
        succ = [_int(st, "successor id")]
        while st.accept("punct", ","):
            succ.append(_int(st, "successor id"))
        name = None
        s = st.accept("str")
        if s is not None:
            name = json.loads(s.text)
        st.expect("punct", ";")
        entries.append((nid, pri, own, succ, name, first))
    index = _check_ids(entries, max_id, htok)
    return ParityGame(
        owner=[e[2] for e in entries],
        priority=[e[1] for e in entries],
        succ=[[_resolve(index, w, e[5]) for w in e[3]] for e in entries],
        ids=[e[0] for e in entries],
        names=[e[4] for e in entries],
    )


def write_pgsolver(game: ParityGame) -> str:
    lines = [f"parity {max(game.ids, default=0)};"]
    for v in game.nodes:
        succ = ",".join(str(game.ids[w]) for w in game.succ[v])
        name = f" {json.dumps(game.names[v])}" if game.names[v] is not None else ""
        lines.append(f"{game.ids[v]} {game.priority[v]} {game.owner[v]} {succ}{name};")
    return "\n".join(lines) + "\n"


# -- energy games ---------------------------------------------------------------


def parse_energy(text: str) -> EnergyGame:
    """``energy <maxId> [<W>];`` then ``<id> <priority> <owner>
    <succ>:<weight>(,...)*;``.  A declared ``W`` bounds all weights."""
    st = _Stream(text)
    max_id, extra, htok = _header(st, "energy", required=True)
    if len(extra) > 1:
        raise ParseError("energy header takes at most one weight bound", htok.line, htok.col)
    declared = extra[0] if extra else None
    entries = []
    while not st.at_end():
        first = st.peek()
        nid = _int(st, "node id")
        pri = _int(st, "priority")
        own = _int(st, "owner (0 or 1)")
        if own not in (0, 1):
            raise ParseError(f"owner must be 0 or 1, got {own}", first.line, first.col)
        moves = []
        while True:
            tgt = _int(st, "successor id")
            st.expect("punct", ":")
            moves.append((tgt, _int(st, "weight", signed=True)))
            if not st.accept("punct", ","):
                break
        st.expect("punct", ";")
        entries.append((nid, pri, own, moves, first))
    index = _check_ids(entries, max_id, htok)
    game = ParityGame(
        owner=[e[2] for e in entries],
        priority=[e[1] for e in entries],
        succ=[[_resolve(index, t, e[4]) for t, _ in e[3]] for e in entries],
        ids=[e[0] for e in entries],
    )
    return EnergyGame(game, [[w for _, w in e[3]] for e in entries], declared)


def write_energy(eg: EnergyGame) -> str:
    g = eg.game
    bound = f" {eg.declared_w}" if eg.declared_w is not None else ""
    lines = [f"energy {max(g.ids, default=0)}{bound};"]
    for v in g.nodes:
        moves = ",".join(f"{g.ids[w]}:{x}" for w, x in zip(g.succ[v], eg.weights[v]))
        lines.append(f"{g.ids[v]} {g.priority[v]} {g.owner[v]} {moves};")
    return "\n".join(lines) + "\n"


# -- probabilistic games ----------------------------------------------------------


def parse_prob(text: str) -> ProbabilisticGame:
    """``prob <maxId>;`` then ``<id> <priority> <sigma> <succ>:<prob>(,...)*;``
    with exact rationals written ``p/q`` or as decimals."""
    st = _Stream(text)
    max_id, extra, htok = _header(st, "prob", required=True)
    if extra:
        raise ParseError("prob header takes only the maximal id", htok.line, htok.col)
    entries = []
    while not st.at_end():
        first = st.peek()
        nid = _int(st, "node id")
        pri = _int(st, "priority")
        sigma = _rat(st, "threshold")
        moves = []
        while True:
            tgt = _int(st, "successor id")
            st.expect("punct", ":")
            moves.append((tgt, _rat(st, "probability")))
            if not st.accept("punct", ","):
                break
        st.expect("punct", ";")
        entries.append((nid, pri, sigma, moves, first))
    index = _check_ids(entries, max_id, htok)
    dists = []
    for e in entries:
        d: dict = {}
        for t, p in e[3]:
            w = _resolve(index, t, e[4])
            d[w] = d.get(w, Fraction(0)) + p
        dists.append(d)
    return ProbabilisticGame(
        distributions=dists,
        priority=[e[1] for e in entries],
        sigma=[e[2] for e in entries],
        ids=[e[0] for e in entries],
    )


def _frac(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def write_prob(pg: ProbabilisticGame) -> str:
    lines = [f"prob {max(pg.ids, default=0)};"]
    for v in pg.nodes:
        moves = ",".join(f"{pg.ids[w]}:{_frac(p)}" for w, p in pg.distributions[v].items())
        lines.append(f"{pg.ids[v]} {pg.priority[v]} {_frac(pg.sigma[v])} {moves};")
    return "\n".join(lines) + "\n"


# -- models ---------------------------------------------------------------------


def _weight(kind, raw, where):
    if kind == "kripke":
        return None
    if kind == "multigraph":
        if raw is None:
            return 1
        if raw in ("inf", "infinity", "∞"):
            return float("inf")
        if type(raw) is int and raw >= 0:
            return raw
        raise ModelError(f"{where}: multiplicity {raw!r} is not a natural number or 'inf'")
    if raw is None:
        raise ModelError(f"{where}: markov transitions need a probability")
    try:
        return parse_rational(str(raw))
    except ValueError:
        raise ModelError(f"{where}: bad probability {raw!r}") from None


def parse_model(text: str) -> Model:
    """JSON ``{"kind", "states", "transitions": {s: [[t, w?], ...]}, "labels"}``."""
    try:
        data = json.loads(text, parse_float=Decimal)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, e.lineno, e.colno) from None
    if not isinstance(data, dict):
        raise ParseError("model must be a JSON object", 1, 1)
    kind = data.get("kind")
    states = data.get("states")
    if not isinstance(states, list):
        raise ModelError("'states' must be a list")
    state_set = {json.dumps(s) for s in states}
    by_name = {str(s): s for s in states}
    trans_in = data.get("transitions", {})
    if not isinstance(trans_in, dict):
        raise ModelError("'transitions' must be an object")
    trans = {}
    for src_name, moves in trans_in.items():
        src = by_name.get(src_name, src_name)
        if kind == "kripke":
            trans[src] = []
        else:
            trans[src] = {}
        if not isinstance(moves, list):
            raise ModelError(f"transitions of {src_name!r} must be a list")
        for mv in moves:
            if isinstance(mv, list) and 1 <= len(mv) <= 2:
                tgt, raw = mv[0], (mv[1] if len(mv) == 2 else None)
            else:
                tgt, raw = mv, None
            if json.dumps(tgt) not in state_set and str(tgt) in by_name:
                tgt = by_name[str(tgt)]
            w = _weight(kind, raw, f"transition {src_name}->{tgt}")
            if kind == "kripke":
                trans[src].append(tgt)
            else:
                trans[src][tgt] = trans[src].get(tgt, 0) + w
    labels = data.get("labels", {})
    if not isinstance(labels, dict):
        raise ModelError("'labels' must be an object")
    labels = {a: [by_name.get(str(s), s) for s in sts] for a, sts in labels.items()}
    return Model(kind, states, trans, labels)


def write_model(model: Model) -> str:
    def wv(w):
        if model.kind == "multigraph":
            return "inf" if w == float("inf") else w
        return _frac(w)

    trans = {}
    for i, s in enumerate(model.states):
        row = model.trans[i]
        if model.kind == "kripke":
            trans[str(s)] = [[model.states[t]] for t in sorted(row)]
        else:
            trans[str(s)] = [[model.states[t], wv(w)] for t, w in sorted(row.items())]
    labels = {a: model.members(m) for a, m in model.labels.items()}
    data = {"kind": model.kind, "states": list(model.states), "transitions": trans, "labels": labels}
    return json.dumps(data, indent=2) + "\n"


# -- formulas ---------------------------------------------------------------------

_FTOKEN = re.compile(
    r"""(?P<ws>\s+)
      | (?P<dia><>)
      | (?P<box>\[\])
      | (?P<pdia><\s*p\s*(?P<pdv>[^>]*)>)
      | (?P<pbox>\[\s*p\s*(?P<pbv>[^\]]*)\])
      | (?P<gdia><\s*(?P<gdv>\d+)\s*>)
      | (?P<gbox>\[\s*(?P<gbv>\d+)\s*\])
      | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
      | (?P<op>[|&.()])
    """,
    re.VERBOSE,
)


def _formula_tokens(text):
    out = []
    pos, line, ls = 0, 1, 0
    while pos < len(text):
        m = _FTOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - ls + 1)
        kind = None
        for g in ("pdia", "pbox", "gdia", "gbox", "dia", "box", "ident", "op", "ws"):
            if m.group(g) is not None:
                kind = g
                break
        col = pos - ls + 1
        if kind != "ws":
            val = m.group()
            if kind in ("pdia", "pbox"):
                raw = m.group("pdv" if kind == "pdia" else "pbv").strip()
                try:
                    val = parse_rational(raw)
                except (ValueError, ZeroDivisionError):
                    raise ParseError(f"bad probability {raw!r}", line, col) from None
                if not 0 <= val <= 1:
                    raise ParseError(f"probability {raw} outside [0, 1]", line, col)
            elif kind in ("gdia", "gbox"):
                val = int(m.group("gdv" if kind == "gdia" else "gbv"))
            out.append((kind, val, line, col))
        chunk = m.group()
        if "\n" in chunk:
            line += chunk.count("\n")
            ls = pos + chunk.rindex("\n") + 1
        pos = m.end()
    return out


class _FormulaParser:
    def __init__(self, text):
        self.toks = _formula_tokens(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def fail(self, msg):
        t = self.peek()
        if t is None:
            last = self.toks[-1] if self.toks else ("", "", 1, 0)
            raise ParseError(f"{msg} at end of input", last[2], last[3] + 1)
        raise ParseError(f"{msg}, found {t[1]!r}", t[2], t[3])

    def take(self, kind, val=None):
        t = self.peek()
        if t is not None and t[0] == kind and (val is None or t[1] == val):
            self.i += 1
            return t
        return None

    def parse(self):
        f = self.expr()
        if self.peek() is not None:
            self.fail("unexpected token")
        return f

    def expr(self):
        f = self.conj()
        while self.take("op", "|"):
            f = Or(f, self.conj())
        return f

    def conj(self):
        f = self.unary()
        while self.take("op", "&"):
            f = And(f, self.unary())
        return f

    def unary(self):
        t = self.peek()
        if t is None:
            self.fail("expected a formula")
        kind, val = t[0], t[1]
        if kind in ("dia", "box", "gdia", "gbox", "pdia", "pbox"):
            self.i += 1
            arg = self.unary()
            param = None if kind in ("dia", "box") else val
            return Modal(kind, arg, param)
        if kind == "op" and val == "(":
            self.i += 1
            f = self.expr()
            if not self.take("op", ")"):
                self.fail("expected ')'")
            return f
        if kind == "ident":
            self.i += 1
            if val in ("mu", "nu"):
                v = self.take("ident")
                if v is None or not v[1][0].isupper():
                    self.fail("expected an uppercase fixpoint variable")
                if not self.take("op", "."):
                    self.fail("expected '.'")
                body = self.expr()
                return Fix(Polarity.LFP if val == "mu" else Polarity.GFP, v[1], body)
            if val == "tt":
                return Top()
            if val == "ff":
                return Bot()
            if val[0].isupper():
                return Var(val)
            return Atom(val)
        self.fail("expected a formula")


def parse_formula(text: str, closed: bool = False) -> Formula:
    """Parse the formula syntax; unary operators bind tightest, then ``&``,
    then ``|``; binders extend as far right as possible.  The result must be
    clean, and closed if requested."""
    f = _FormulaParser(text).parse()
    validate(f, closed=closed)
    return f


# -- Boolean equation systems ---------------------------------------------------


@dataclass
class BesSystem:
    """Named Boolean equations in index order; the last one is outermost."""

    names: tuple
    polarities: tuple
    rhs: tuple  # expression trees: ("tt",), ("ff",), ("var", name), ("and"|"or", a, b)

    def __post_init__(self):
        self.names = tuple(self.names)
        self.polarities = tuple(self.polarities)
        self.rhs = tuple(self.rhs)
        seen = set()
        for n in self.names:
            if n in seen:
                raise FormulaError(f"variable {n} is defined more than once")
            seen.add(n)
        for n, e in zip(self.names, self.rhs):
            for ref in _bes_refs(e):
                if ref not in seen:
                    raise FormulaError(f"equation {n} refers to undefined variable {ref}")

    def to_system(self) -> EquationSystem:
        index = {n: i for i, n in enumerate(self.names)}
        lat = PowersetLattice(["true"])
        eqs = [Equation(p, _bes_compile(e, index)) for p, e in zip(self.polarities, self.rhs)]
        return EquationSystem(lat, eqs)


def _bes_refs(e):
    if e[0] == "var":
        yield e[1]
    elif e[0] in ("and", "or"):
        yield from _bes_refs(e[1])
        yield from _bes_refs(e[2])


def _bes_compile(e, index):
    tag = e[0]
    if tag == "tt":
        return lambda args: 1
    if tag == "ff":
        return lambda args: 0
    if tag == "var":
        j = index[e[1]]
        return lambda args: args[j]
    a, b = _bes_compile(e[1], index), _bes_compile(e[2], index)
    if tag == "and":
        return lambda args: a(args) & b(args)
    return lambda args: a(args) | b(args)


_BES_TOKEN = re.compile(r"\s*(?:(?P<ident>[A-Za-z_][A-Za-z0-9_']*)|(?P<op>[|&()=]))")


def parse_bes(text: str) -> BesSystem:
    """One ``mu|nu <Name> = <expr>`` equation per line; ``#`` starts a
    comment.  Expressions use ``tt``, ``ff``, names, ``&``, ``|`` and
    parentheses."""
    names, pols, rhss = [], [], []
    for ln, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0]
        if not body.strip():
            continue
        toks = []
        pos = 0
        while pos < len(body):
            if body[pos:].strip() == "":
                break
            m = _BES_TOKEN.match(body, pos)
            if not m or m.end() == pos:
                raise ParseError(f"unexpected character {body[pos:].lstrip()[:1]!r}", ln, pos + 1)
            kind = "ident" if m.group("ident") else "op"
            toks.append((kind, m.group(kind), m.start(kind) + 1))
            pos = m.end()
        if len(toks) < 4 or toks[0][1] not in ("mu", "nu") or toks[1][0] != "ident" or toks[2][1] != "=":
            raise ParseError("expected 'mu|nu <Name> = <expr>'", ln, toks[0][2] if toks else 1)
        p = _BesExpr(toks[3:], ln)
        e = p.expr()
        if p.i < len(p.toks):
            raise ParseError(f"unexpected token {p.toks[p.i][1]!r}", ln, p.toks[p.i][2])
        names.append(toks[1][1])
        pols.append(Polarity.LFP if toks[0][1] == "mu" else Polarity.GFP)
        rhss.append(e)
    if not names:
        raise ParseError("no equations", 1, 1)
    return BesSystem(names, pols, rhss)


class _BesExpr:
    def __init__(self, toks, line):
        self.toks, self.i, self.line = toks, 0, line

    def fail(self, msg):
        col = self.toks[self.i][2] if self.i < len(self.toks) else (self.toks[-1][2] + 1 if self.toks else 1)
        raise ParseError(msg, self.line, col)

    def take(self, val):
        if self.i < len(self.toks) and self.toks[self.i][1] == val:
            self.i += 1
            return True
        return False

    def expr(self):
        e = self.conj()
        while self.take("|"):
            e = ("or", e, self.conj())
        return e

    def conj(self):
        e = self.atom()
        while self.take("&"):
            e = ("and", e, self.atom())
        return e

    def atom(self):
        if self.i >= len(self.toks):
            self.fail("expected an expression")
        kind, val, _ = self.toks[self.i]
        if self.take("("):
            e = self.expr()
            if not self.take(")"):
                self.fail("expected ')'")
            return e
        if kind == "ident":
            self.i += 1
            if val in ("tt", "ff"):
                return (val,)
            return ("var", val)
        self.fail(f"unexpected token {val!r}")


def _bes_show(e, top=True):
    tag = e[0]
    if tag in ("tt", "ff"):
        return tag
    if tag == "var":
        return e[1]
    sym = " & " if tag == "and" else " | "
    s = _bes_show(e[1], False) + sym + _bes_show(e[2], False)
    return s if top else f"({s})"


def write_bes(bes: BesSystem) -> str:
    return "".join(
        f"{p.value} {n} = {_bes_show(e)}\n" for n, p, e in zip(bes.names, bes.polarities, bes.rhs)
    )
