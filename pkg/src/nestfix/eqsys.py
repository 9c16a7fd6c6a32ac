"""Systems of nested fixpoint equations and the naive Kleene oracle.

A system consists of equations ``X_i =_{eta_i} f_i(X_0, ..., X_k)`` over a
finite lattice.  Right-hand sides are opaque callables receiving a tuple of
``k + 1`` lattice elements.  The equation with the highest index is the
outermost one.
"""
from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from .lattice import FiniteLattice, LatticeError


class SizeLimitError(RuntimeError):
    """Raised when an explicit construction would exceed its configured cap."""


class Polarity(enum.Enum):
    LFP = "mu"
    GFP = "nu"

    def __str__(self):
        return self.value


Rhs = Callable[[tuple], object]


@dataclass(frozen=True)
class Equation:
    polarity: Polarity
    rhs: Rhs


def alternation_depth(polarities: Sequence[Polarity]) -> list[int]:
    """Alternation depth of every equation.

    Computed with the mutual recursion on the ``ad_mu`` / ``ad_nu``
    sequences: an equation gets its predecessor's depth when the polarity
    is unchanged and one more when it flips; the first equation starts at
    0 (GFP) or 1 (LFP).
    """
    ad = []
    mu_prev = nu_prev = None
    prev_pol = None
    for i, pol in enumerate(polarities):
        if i == 0:
            mu, nu = 1, 0
        elif prev_pol is Polarity.LFP:
            mu, nu = mu_prev, mu_prev + 1
        else:
            mu, nu = nu_prev + 1, nu_prev
        ad.append(mu if pol is Polarity.LFP else nu)
        mu_prev, nu_prev, prev_pol = mu, nu, pol
    return ad


class EquationSystem:
    """An immutable system of ``k + 1`` fixpoint equations over ``lattice``."""

    def __init__(self, lattice: FiniteLattice, equations: Sequence[Equation]):
        if not equations:
            raise ValueError("a system needs at least one equation")
        self.lattice = lattice
        self.equations = tuple(equations)
        self.polarities = tuple(eq.polarity for eq in self.equations)
        self.ad = tuple(alternation_depth(self.polarities))

    @property
    def k(self) -> int:
        return len(self.equations) - 1

    @property
    def d(self) -> int:
        return self.ad[-1]

    def __len__(self):
        return len(self.equations)

    def __repr__(self):
        pols = ",".join(str(p) for p in self.polarities)
        return f"EquationSystem({self.lattice!r}, [{pols}])"

    def evaluate(self, i: int, args: tuple):
        """Apply ``f_i`` and check that it returned an element of the lattice."""
        out = self.equations[i].rhs(args)
        if not self.lattice.is_element(out):
            raise LatticeError(
                f"equation {i} returned {out!r}, not an element of {self.lattice!r}"
            )
        return out


def canonical_system(f0: Rhs, k: int, lattice: FiniteLattice) -> EquationSystem:
    """``X_0 =_GFP f0(X_0..X_k)`` followed by ``X_i = X_{i-1}``, alternating.

    Equations with odd index are least fixpoints, even ones greatest.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    eqs = [Equation(Polarity.GFP, f0)]
    for i in range(1, k + 1):
        pol = Polarity.LFP if i % 2 else Polarity.GFP
        eqs.append(Equation(pol, _projection(i - 1)))
    return EquationSystem(lattice, eqs)


def _projection(j: int) -> Rhs:
    def proj(args):
        return args[j]

    proj.__name__ = f"proj_{j}"
    return proj


def kleene_solve(system: EquationSystem, i: int, sigma: Mapping[int, object] | None = None):
    """``[[X_i]]^sigma`` by nested Kleene iteration, following the recursive
    definition literally.

    Lower-indexed variables are re-solved for every candidate value of
    ``X_i``; higher-indexed variables missing from ``sigma`` are free and are
    solved recursively as well.
    """
    return _KleeneSolver(system).solve(i, sigma or {})


def kleene_solutions(system: EquationSystem) -> tuple:
    """Solution of every component, outermost first.

    Component ``k`` is ``[[X_k]]^eps``; component ``i < k`` is solved with
    the components above it fixed to their solutions (so ``X_i`` is nested
    inside them, as in the fixpoint game).
    """
    solver = _KleeneSolver(system)
    sols: dict[int, object] = {}
    for i in range(system.k, -1, -1):
        sols[i] = solver.solve(i, dict(sols))
    return tuple(sols[i] for i in range(system.k + 1))


class _KleeneSolver:
    def __init__(self, system: EquationSystem):
        self.system = system
        self.memo: dict = {}
        self.evaluations = 0

    def solve(self, i: int, sigma: Mapping[int, object]):
        k = self.system.k
        if not 0 <= i <= k:
            raise IndexError(f"equation index {i} out of range 0..{k}")
        lat = self.system.lattice
        vec = tuple(lat.check(sigma[j]) if j in sigma else None for j in range(k + 1))
        return self._sem(i, vec)

    def _sem(self, i: int, sigma: tuple):
        # sigma(i) is overridden by the fixpoint variable, so it is not part of the key
        key = (i, sigma[:i] + (None,) + sigma[i + 1:])
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        system = self.system
        lat = system.lattice
        x = lat.top if system.polarities[i] is Polarity.GFP else lat.bottom
        while True:
            s2 = sigma[:i] + (x,) + sigma[i + 1:]
            args = []
            for j in range(system.k + 1):
                if j < i:
                    args.append(self._sem(j, s2))
                elif j == i:
                    args.append(x)
                elif s2[j] is not None:
                    args.append(s2[j])
                else:
                    args.append(self._sem(j, s2))
            self.evaluations += 1
            y = system.evaluate(i, tuple(args))
            if y == x:
                break
            x = y
        self.memo[key] = x
        return x


@dataclass
class MonotonicityReport:
    samples: int
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def check_monotone(system: EquationSystem, samples: int = 200, seed: int = 0) -> MonotonicityReport:
    """Randomized spot check that every rhs is monotone.

    Each sample draws an upper argument tuple and a pointwise-smaller one and
    compares the images.  Violations are collected as ``(i, lower, upper)``.
    """
    rng = random.Random(seed)
    lat = system.lattice
    report = MonotonicityReport(samples)
    n_args = system.k + 1
    for _ in range(samples):
        upper = tuple(lat.random_element(rng) for _ in range(n_args))
        lower = tuple(lat.random_below(u, rng) for u in upper)
        for i in range(n_args):
            lo = system.evaluate(i, lower)
            hi = system.evaluate(i, upper)
            if not lat._leq(lo, hi):
                report.violations.append((i, lower, upper))
    return report
