"""The coalgebraic mu-calculus over relational, graded and probabilistic models.

Formulas are immutable trees.  Model checking goes through the model
checking function ``alpha_mc``, a monotone function over pairs (subformula,
state) whose canonical system is then handed to any equation-system
solver; ``direct_eval`` is the independent recursive evaluator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Mapping, Sequence

from .eqsys import EquationSystem, Polarity, alternation_depth, canonical_system
from .lattice import PowersetLattice


class FormulaError(ValueError):
    pass


class ModelError(ValueError):
    pass


# -- syntax ------------------------------------------------------------------


class Formula:
    __slots__ = ()

    def __str__(self):
        return show(self)


@dataclass(frozen=True)
class Top(Formula):
    pass


@dataclass(frozen=True)
class Bot(Formula):
    pass


@dataclass(frozen=True)
class Atom(Formula):
    name: str


@dataclass(frozen=True)
class Var(Formula):
    name: str


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


# modality kinds: relational dia/box, graded gdia/gbox, probabilistic pdia/pbox
MODAL_KINDS = {
    "dia": "kripke",
    "box": "kripke",
    "gdia": "multigraph",
    "gbox": "multigraph",
    "pdia": "markov",
    "pbox": "markov",
}
DUAL = {"dia": "box", "box": "dia", "gdia": "gbox", "gbox": "gdia", "pdia": "pbox", "pbox": "pdia"}


@dataclass(frozen=True)
class Modal(Formula):
    kind: str
    arg: Formula
    param: int | Fraction | None = None

    def __post_init__(self):
        if self.kind not in MODAL_KINDS:
            raise FormulaError(f"unknown modality {self.kind!r}")
        if self.kind in ("gdia", "gbox") and (type(self.param) is not int or self.param < 0):
            raise FormulaError("graded modalities need a natural number bound")
        if self.kind in ("pdia", "pbox"):
            if not isinstance(self.param, Fraction) or not 0 <= self.param <= 1:
                raise FormulaError("probabilistic modalities need a rational in [0, 1]")


@dataclass(frozen=True)
class Fix(Formula):
    eta: Polarity
    var: str
    body: Formula


def mu(var: str, body: Formula) -> Fix:
    return Fix(Polarity.LFP, var, body)


def nu(var: str, body: Formula) -> Fix:
    return Fix(Polarity.GFP, var, body)


def dia(f: Formula) -> Modal:
    return Modal("dia", f)


def box(f: Formula) -> Modal:
    return Modal("box", f)


def children(f: Formula) -> tuple:
    if isinstance(f, (Or, And)):
        return (f.left, f.right)
    if isinstance(f, Modal):
        return (f.arg,)
    if isinstance(f, Fix):
        return (f.body,)
    return ()


def size(f: Formula) -> int:
    """Number of operators and variables."""
    return 1 + sum(size(c) for c in children(f))


def depth(f: Formula) -> int:
    cs = children(f)
    return 0 if not cs else 1 + max(depth(c) for c in cs)


def show(f: Formula) -> str:
    """Render in the text syntax accepted by the formula parser."""
    if isinstance(f, Top):
        return "tt"
    if isinstance(f, Bot):
        return "ff"
    if isinstance(f, (Atom, Var)):
        return f.name
    if isinstance(f, Or):
        return f"({show(f.left)} | {show(f.right)})"
    if isinstance(f, And):
        return f"({show(f.left)} & {show(f.right)})"
    if isinstance(f, Modal):
        prefix = {
            "dia": "<>",
            "box": "[]",
            "gdia": f"<{f.param}>",
            "gbox": f"[{f.param}]",
            "pdia": f"<p {f.param}>",
            "pbox": f"[p {f.param}]",
        }[f.kind]
        return f"{prefix}{show(f.arg)}"
    if isinstance(f, Fix):
        return f"({f.eta.value} {f.var}. {show(f.body)})"
    raise FormulaError(f"not a formula: {f!r}")


def free_vars(f: Formula) -> set:
    if isinstance(f, Var):
        return {f.name}
    if isinstance(f, Fix):
        return free_vars(f.body) - {f.var}
    out: set = set()
    for c in children(f):
        out |= free_vars(c)
    return out


def binders(f: Formula) -> list:
    """Fixpoint subformulas in post-order (innermost first)."""
    out = []
    for c in children(f):
        out += binders(c)
    if isinstance(f, Fix):
        out.append(f)
    return out


def validate(f: Formula, closed: bool = True):
    """Reject formulas that bind a variable twice or, if ``closed``, have free
    variables."""
    seen = set()
    for b in binders(f):
        if b.var in seen:
            raise FormulaError(f"variable {b.var} is bound more than once (formula is not clean)")
        seen.add(b.var)
    if closed:
        fv = free_vars(f)
        if fv:
            raise FormulaError(f"free variables: {', '.join(sorted(fv))}")


def closure(chi: Formula) -> tuple[list, dict]:
    """All subformulas of ``chi`` in pre-order without repetitions, and the
    binder lookup ``theta`` from variable names to their fixpoint subformula."""
    validate(chi)
    order: list = []
    seen: set = set()

    def walk(f):
        if f not in seen:
            seen.add(f)
            order.append(f)
        for c in children(f):
            walk(c)

    walk(chi)
    theta = {b.var: b for b in binders(chi)}
    return order, theta


def binder_depths(chi: Formula) -> dict:
    """Alternation depth of each binder, read off the innermost-first
    equation ordering."""
    bs = binders(chi)
    ads = alternation_depth([b.eta for b in bs]) if bs else []
    out = {}
    for b, a in zip(bs, ads):
        out[b] = a
    return out


def formula_ad(chi: Formula) -> int:
    """Alternation depth of ``chi``: that of its outermost binder, 0 if none."""
    ds = binder_depths(chi)
    return max(ds.values(), default=0)


# -- models ------------------------------------------------------------------

INF = math.inf


class Model:
    """A finite coalgebra: states with transition data and atom labels.

    ``transitions`` maps every state to target data: a collection of
    successors (kripke), a ``{target: multiplicity}`` map with multiplicities
    in N or ``math.inf`` (multigraph), or a ``{target: probability}`` map
    summing to exactly 1 (markov).
    """

    KINDS = ("kripke", "multigraph", "markov")

    def __init__(
        self,
        kind: str,
        states: Sequence[Hashable],
        transitions: Mapping,
        labels: Mapping[str, Sequence[Hashable]] | None = None,
    ):
        if kind not in self.KINDS:
            raise ModelError(f"unknown model kind {kind!r}")
        self.kind = kind
        self.states = tuple(states)
        if len(set(self.states)) != len(self.states):
            raise ModelError("duplicate states")
        self.index = {s: i for i, s in enumerate(self.states)}
        m = len(self.states)
        self.full = (1 << m) - 1
        for s in transitions:
            if s not in self.index:
                raise ModelError(f"transition source {s!r} is not a state")
        self.trans: list = []
        for s in self.states:
            data = transitions.get(s, {} if kind != "kripke" else ())
            self.trans.append(self._normalize(s, data))
        self.labels = {}
        for atom, sts in (labels or {}).items():
            mask = 0
            for s in sts:
                if s not in self.index:
                    raise ModelError(f"label {atom!r} mentions unknown state {s!r}")
                mask |= 1 << self.index[s]
            self.labels[atom] = mask
        if kind == "kripke":
            self.succ_mask = [sum(1 << t for t in ts) for ts in self.trans]

    def _target(self, s, t):
        if t not in self.index:
            raise ModelError(f"state {s!r} has unknown target {t!r}")
        return self.index[t]

    def _normalize(self, s, data):
        if self.kind == "kripke":
            return frozenset(self._target(s, t) for t in data)
        out = {}
        for t, w in dict(data).items():
            i = self._target(s, t)
            if self.kind == "multigraph":
                if not (w == INF or (type(w) is int and w >= 0)):
                    raise ModelError(f"state {s!r}: multiplicity {w!r} is not in N or inf")
            else:
                w = Fraction(w)
                if w < 0:
                    raise ModelError(f"state {s!r}: negative probability")
            out[i] = out.get(i, 0) + w
        if self.kind == "markov":
            total = sum(out.values(), Fraction(0))
            if total != 1:
                raise ModelError(f"state {s!r}: probabilities sum to {total}, not 1")
        return out

    def __len__(self):
        return len(self.states)

    def __repr__(self):
        return f"Model({self.kind!r}, {list(self.states)!r})"

    def mask(self, states) -> int:
        return sum(1 << self.index[s] for s in set(states))

    def members(self, mask: int) -> list:
        return [s for i, s in enumerate(self.states) if mask >> i & 1]


def eval_one_step(model: Model, modal: Modal, arg: int) -> int:
    """States whose transition data satisfies ``modal`` applied to the state
    set ``arg`` (a bitmask).  Box-style modalities are computed from their
    diamonds by the complement identity."""
    family = MODAL_KINDS[modal.kind]
    if family != model.kind:
        raise ModelError(f"modality {modal.kind!r} needs a {family} model, got {model.kind}")
    if modal.kind in ("box", "gbox", "pbox"):
        flipped = Modal(DUAL[modal.kind], modal.arg, modal.param)
        return model.full & ~_diamond(model, flipped, model.full & ~arg)
    return _diamond(model, modal, arg)


def _diamond(model, modal, arg):
    out = 0
    if modal.kind == "dia":
        for x, sm in enumerate(model.succ_mask):
            if sm & arg:
                out |= 1 << x
        return out
    for x, row in enumerate(model.trans):
        total = sum((w for t, w in row.items() if arg >> t & 1), 0 if modal.kind == "gdia" else Fraction(0))
        if total > modal.param:
            out |= 1 << x
    return out


# -- direct evaluation -------------------------------------------------------


def direct_eval(model: Model, phi: Formula, valuation: Mapping[str, int] | None = None) -> int:
    """Extension of ``phi`` as a state bitmask, by structural recursion with
    Kleene iteration at binders.  ``valuation`` maps free variables to masks."""
    validate(phi, closed=False)
    env = dict(valuation or {})
    missing = free_vars(phi) - set(env)
    if missing:
        raise FormulaError(f"no value for free variables: {', '.join(sorted(missing))}")
    return _ev(model, phi, env)


def _ev(model, f, env):
    if isinstance(f, Top):
        return model.full
    if isinstance(f, Bot):
        return 0
    if isinstance(f, Atom):
        return model.labels.get(f.name, 0)
    if isinstance(f, Var):
        return env[f.name]
    if isinstance(f, Or):
        return _ev(model, f.left, env) | _ev(model, f.right, env)
    if isinstance(f, And):
        return _ev(model, f.left, env) & _ev(model, f.right, env)
    if isinstance(f, Modal):
        return eval_one_step(model, f, _ev(model, f.arg, env))
    if isinstance(f, Fix):
        x = model.full if f.eta is Polarity.GFP else 0
        while True:
            inner = dict(env)
            inner[f.var] = x
            y = _ev(model, f.body, inner)
            if y == x:
                return x
            x = y
    raise FormulaError(f"not a formula: {f!r}")


# -- the model checking function -----------------------------------------------


@dataclass
class ModelCheckingProblem:
    system: EquationSystem
    closure: list
    model: Model

    def truth_set(self, solution: int, formula: Formula | None = None) -> int:
        """States ``x`` with ``(formula, x)`` in ``solution`` (default: the target)."""
        fi = 0 if formula is None else self.closure.index(formula)
        m = len(self.model)
        return (solution >> (fi * m)) & self.model.full


def alpha_mc(model: Model, chi: Formula) -> ModelCheckingProblem:
    """The model checking function of ``chi`` over ``model`` as a canonical
    system on ``PowersetLattice(Cl(chi) x C)``.

    Argument ``j`` of the function plays the role of ``U_{j+1}``: unfolding
    steps read argument 0, and a variable ``X`` reads argument
    ``ad(theta(X))``.  The target's truth set is the ``chi`` slice of the
    outermost solution component.
    """
    cl, theta = closure(chi)
    depths = binder_depths(chi)
    k = max(depths.values(), default=0)
    m = len(model)
    full = model.full
    pos = {f: i for i, f in enumerate(cl)}
    lattice = PowersetLattice((f, s) for f in cl for s in model.states)
    for f in cl:
        if isinstance(f, Modal) and MODAL_KINDS[f.kind] != model.kind:
            raise ModelError(f"modality {f.kind!r} needs a {MODAL_KINDS[f.kind]} model, got {model.kind}")
    plan = []
    for i, f in enumerate(cl):
        shift = i * m
        if isinstance(f, Top):
            plan.append(("const", shift, full))
        elif isinstance(f, Bot):
            plan.append(("const", shift, 0))
        elif isinstance(f, Atom):
            plan.append(("const", shift, model.labels.get(f.name, 0)))
        elif isinstance(f, Modal):
            plan.append(("modal", shift, (f, pos[f.arg] * m)))
        elif isinstance(f, Or):
            plan.append(("or", shift, (pos[f.left] * m, pos[f.right] * m)))
        elif isinstance(f, And):
            plan.append(("and", shift, (pos[f.left] * m, pos[f.right] * m)))
        elif isinstance(f, Fix):
            plan.append(("unfold", shift, (0, pos[f.body] * m)))
        elif isinstance(f, Var):
            b = theta[f.name]
            plan.append(("unfold", shift, (depths[b], pos[b] * m)))
        else:
            raise FormulaError(f"not a formula: {f!r}")

    def f0(args):
        u1 = args[0]
        out = 0
        for op, shift, data in plan:
            if op == "const":
                val = data
            elif op == "modal":
                modal, src = data
                val = eval_one_step(model, modal, (u1 >> src) & full)
            elif op == "or":
                val = ((u1 >> data[0]) | (u1 >> data[1])) & full
            elif op == "and":
                val = (u1 >> data[0]) & (u1 >> data[1]) & full
            else:
                j, src = data
                val = (args[j] >> src) & full
            out |= val << shift
        return out

    return ModelCheckingProblem(canonical_system(f0, k, lattice), cl, model)
