"""Constraint-commuting driver Hamiltonians for constrained quantum annealing."""

from .constraints import (
    ClauseIndicator,
    Gf2Solution,
    InfeasibleError,
    LinearZ,
    SectorBasis,
    ZParity,
    constraint_as_hamiltonian,
    eval_constraint,
    gf2_solve,
    sector_basis,
)
from .pauli import DimensionError, Hamiltonian, PauliTerm, commutator_norm, commutes, multiply, to_matrix

__version__ = "0.1.0"

__all__ = [
    "ClauseIndicator",
    "DimensionError",
    "Gf2Solution",
    "Hamiltonian",
    "InfeasibleError",
    "LinearZ",
    "PauliTerm",
    "SectorBasis",
    "ZParity",
    "commutator_norm",
    "commutes",
    "constraint_as_hamiltonian",
    "eval_constraint",
    "gf2_solve",
    "multiply",
    "sector_basis",
    "to_matrix",
]
