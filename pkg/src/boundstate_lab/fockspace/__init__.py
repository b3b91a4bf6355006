"""Exact finite Fock spaces on a periodic chain and the auxiliary composite space."""

from .auxiliary import (
    AuxiliarySpace,
    EffectiveHamiltonian,
    effective_hamiltonian,
    galilean_boost_check,
    lattice_momentum,
    momentum_mode_sum,
    tilde_anticommutators,
    tilde_field,
    translation_operator,
)
from .compare import effective_vs_exact, exact_space_for
from .composite import composite_operator, placement_state, verify_orthonormality
from .lattice import (
    LatticeConfig,
    LatticeFockSpace,
    OperatorMatrix,
    PairPotential,
    anticommutator,
    basis_size,
    commutator,
    enumerate_basis,
    exact_hamiltonian,
    field_operator,
    identity,
    number_operator,
)
from .pair import PairSpectrum, PairState, solve_pair_problem

__all__ = [
    "AuxiliarySpace", "EffectiveHamiltonian", "LatticeConfig", "LatticeFockSpace",
    "OperatorMatrix", "PairPotential", "PairSpectrum", "PairState", "anticommutator",
    "basis_size", "commutator", "composite_operator", "effective_hamiltonian",
    "effective_vs_exact", "enumerate_basis", "exact_hamiltonian", "exact_space_for",
    "field_operator", "galilean_boost_check", "identity", "lattice_momentum",
    "momentum_mode_sum", "number_operator", "placement_state", "solve_pair_problem",
    "tilde_anticommutators", "tilde_field", "translation_operator", "verify_orthonormality",
]
