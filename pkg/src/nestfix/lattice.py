"""Finite lattices with a distinguished basis.

Two concrete instances are provided: the powerset lattice over a finite
carrier (elements are int bitmasks) and the lattice of total maps from a
finite carrier into ``{0, ..., n-1}`` ordered pointwise (elements are
tuples of ints).  Both expose the same interface, which is all the solvers
rely on.
"""
from __future__ import annotations

import abc
import itertools
import random
from functools import reduce
from typing import Hashable, Iterable, Iterator, Sequence


class LatticeError(ValueError):
    """Raised when a value is not an element of the lattice it is used with."""


class FiniteLattice(abc.ABC):
    """A finite lattice together with a basis that excludes bottom.

    Subclasses implement the unchecked primitives (``_leq``, ``_join2``,
    ``_meet2``) plus ``check``; the public methods validate their inputs.
    Solvers call the unchecked primitives on values they produced themselves.
    """

    basis: tuple

    @property
    @abc.abstractmethod
    def top(self): ...

    @property
    @abc.abstractmethod
    def bottom(self): ...

    @abc.abstractmethod
    def is_element(self, x) -> bool: ...

    @abc.abstractmethod
    def _leq(self, a, b) -> bool: ...

    @abc.abstractmethod
    def _join2(self, a, b): ...

    @abc.abstractmethod
    def _meet2(self, a, b): ...

    @abc.abstractmethod
    def elements(self) -> Iterator:
        """Enumerate every element (only sensible for desk-scale lattices)."""

    @abc.abstractmethod
    def random_element(self, rng: random.Random): ...

    @property
    @abc.abstractmethod
    def size(self) -> int:
        """Number of elements."""

    def check(self, x):
        if not self.is_element(x):
            raise LatticeError(f"{x!r} is not an element of {self!r}")
        return x

    def leq(self, a, b) -> bool:
        return self._leq(self.check(a), self.check(b))

    def join2(self, a, b):
        return self._join2(self.check(a), self.check(b))

    def meet2(self, a, b):
        return self._meet2(self.check(a), self.check(b))

    def big_join(self, elements: Iterable):
        """Least upper bound; the empty join is bottom."""
        return reduce(self._join2, (self.check(x) for x in elements), self.bottom)

    def big_meet(self, elements: Iterable):
        """Greatest lower bound; the empty meet is top."""
        return reduce(self._meet2, (self.check(x) for x in elements), self.top)

    def decompose(self, l) -> list:
        """Basis elements below ``l``, in basis order."""
        self.check(l)
        return [b for b in self.basis if self._leq(b, l)]

    # Bitmask helpers over basis indices, used by the solvers.

    def basis_mask(self, l) -> int:
        """Bitmask of the basis indices below ``l``."""
        mask = 0
        for idx, b in enumerate(self.basis):
            if self._leq(b, l):
                mask |= 1 << idx
        return mask

    def join_mask(self, mask: int):
        """Join of the basis elements whose indices are set in ``mask``."""
        acc = self.bottom
        idx = 0
        while mask:
            if mask & 1:
                acc = self._join2(acc, self.basis[idx])
            mask >>= 1
            idx += 1
        return acc

    def random_below(self, x, rng: random.Random):
        """A random element below ``x``."""
        return self._meet2(x, self.random_element(rng))


class PowersetLattice(FiniteLattice):
    """Subsets of a finite carrier, encoded as bitmasks in carrier order."""

    def __init__(self, carrier: Iterable[Hashable]):
        self.carrier = tuple(carrier)
        if len(set(self.carrier)) != len(self.carrier):
            raise ValueError("carrier has duplicate points")
        self._index = {u: i for i, u in enumerate(self.carrier)}
        self._full = (1 << len(self.carrier)) - 1
        self.basis = tuple(1 << i for i in range(len(self.carrier)))

    def __repr__(self):
        return f"PowersetLattice({list(self.carrier)!r})"

    def __eq__(self, other):
        return isinstance(other, PowersetLattice) and other.carrier == self.carrier

    def __hash__(self):
        return hash(("powerset", self.carrier))

    @property
    def top(self) -> int:
        return self._full

    @property
    def bottom(self) -> int:
        return 0

    @property
    def size(self) -> int:
        return 1 << len(self.carrier)

    def is_element(self, x) -> bool:
        return type(x) is int and 0 <= x <= self._full

    def _leq(self, a, b):
        return a & ~b == 0

    def _join2(self, a, b):
        return a | b

    def _meet2(self, a, b):
        return a & b

    def basis_mask(self, l):
        return l

    def join_mask(self, mask):
        return mask

    def elements(self):
        return iter(range(self._full + 1))

    def random_element(self, rng):
        return rng.getrandbits(len(self.carrier)) if self.carrier else 0

    def element(self, points: Iterable[Hashable]) -> int:
        """Encode a collection of carrier points as a lattice element."""
        mask = 0
        for u in points:
            try:
                mask |= 1 << self._index[u]
            except KeyError:
                raise LatticeError(f"{u!r} is not in the carrier") from None
        return mask

    def members(self, x: int) -> list:
        """Carrier points of ``x`` in carrier order."""
        self.check(x)
        return [u for i, u in enumerate(self.carrier) if x >> i & 1]

    def complement(self, x: int) -> int:
        return self._full & ~self.check(x)


class PointwiseLattice(FiniteLattice):
    """Total maps ``carrier -> {0, ..., n-1}`` ordered pointwise.

    Elements are tuples indexed like ``carrier``.  The basis consists of the
    spike maps that take a value ``m >= 1`` at a single point and 0 elsewhere,
    ordered by (point index, value).
    """

    def __init__(self, carrier: Iterable[Hashable], n: int):
        self.carrier = tuple(carrier)
        if n < 1:
            raise ValueError("value bound must be at least 1")
        if len(set(self.carrier)) != len(self.carrier):
            raise ValueError("carrier has duplicate points")
        self.n = n
        self._index = {u: i for i, u in enumerate(self.carrier)}
        m = len(self.carrier)
        self.basis = tuple(
            tuple(v if j == i else 0 for j in range(m))
            for i in range(m)
            for v in range(1, n)
        )
        self._top = (n - 1,) * m
        self._bottom = (0,) * m
        self._mask_cache: dict[int, tuple] = {}

    def __repr__(self):
        return f"PointwiseLattice({list(self.carrier)!r}, {self.n})"

    def __eq__(self, other):
        return (
            isinstance(other, PointwiseLattice)
            and other.carrier == self.carrier
            and other.n == self.n
        )

    def __hash__(self):
        return hash(("pointwise", self.carrier, self.n))

    @property
    def top(self):
        return self._top

    @property
    def bottom(self):
        return self._bottom

    @property
    def size(self) -> int:
        return self.n ** len(self.carrier)

    def is_element(self, x) -> bool:
        return (
            type(x) is tuple
            and len(x) == len(self.carrier)
            and all(type(v) is int and 0 <= v < self.n for v in x)
        )

    def _leq(self, a, b):
        return all(x <= y for x, y in zip(a, b))

    def _join2(self, a, b):
        return tuple(map(max, a, b))

    def _meet2(self, a, b):
        return tuple(map(min, a, b))

    def basis_mask(self, l):
        # spike (i, v) sits at index i*(n-1) + (v-1)
        mask = 0
        width = self.n - 1
        for i, v in enumerate(l):
            if v:
                mask |= ((1 << v) - 1) << (i * width)
        return mask

    def join_mask(self, mask):
        cached = self._mask_cache.get(mask)
        if cached is not None:
            return cached
        width = self.n - 1
        out = []
        for i in range(len(self.carrier)):
            chunk = (mask >> (i * width)) & ((1 << width) - 1)
            out.append(chunk.bit_length())
        result = tuple(out)
        if len(self._mask_cache) < 1 << 16:
            self._mask_cache[mask] = result
        return result

    def elements(self):
        return (tuple(t) for t in itertools.product(range(self.n), repeat=len(self.carrier)))

    def random_element(self, rng):
        return tuple(rng.randrange(self.n) for _ in self.carrier)

    def element(self, values: dict | Sequence[int]) -> tuple:
        """Build an element from a ``{point: value}`` mapping or a sequence."""
        if isinstance(values, dict):
            out = [0] * len(self.carrier)
            for u, v in values.items():
                try:
                    out[self._index[u]] = v
                except KeyError:
                    raise LatticeError(f"{u!r} is not in the carrier") from None
            values = out
        return self.check(tuple(values))

    def value(self, x: tuple, point: Hashable) -> int:
        return self.check(x)[self._index[point]]

    def as_dict(self, x: tuple) -> dict:
        self.check(x)
        return dict(zip(self.carrier, x))
