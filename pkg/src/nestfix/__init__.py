"""Solvers for systems of nested fixpoint equations over finite lattices."""
from .eqsys import (
    Equation,
    EquationSystem,
    Polarity,
    SizeLimitError,
    alternation_depth,
    canonical_system,
    check_monotone,
    kleene_solutions,
    kleene_solve,
)
from .lattice import FiniteLattice, LatticeError, PointwiseLattice, PowersetLattice
from .solver import chained_solve, extract_witness, lift_solve, solve
from .universal import STAR, CompleteTree, SuccinctTree

__version__ = "0.1.0"

__all__ = [
    "CompleteTree",
    "Equation",
    "EquationSystem",
    "FiniteLattice",
    "LatticeError",
    "PointwiseLattice",
    "Polarity",
    "PowersetLattice",
    "STAR",
    "SizeLimitError",
    "SuccinctTree",
    "alternation_depth",
    "canonical_system",
    "chained_solve",
    "check_monotone",
    "extract_witness",
    "kleene_solutions",
    "kleene_solve",
    "lift_solve",
    "solve",
]
