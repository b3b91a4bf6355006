"""Hydrogen-like bound states, matrix elements and transition form factors."""

from .model import AtomModel
from .radial import AnalyticRadial, GridRadial, PseudoSpectrum, RadialGrid, solve_radial
from .states import (
    BoundState,
    dipole_matrix,
    hydrogenic_state,
    momentum_matrix,
    parse_label,
    position_matrix,
    radial_integral,
    second_moment_matrix,
    solve_hydrogenic,
)
from .formfactor import FormFactor, form_factors

__all__ = [
    "AtomModel",
    "AnalyticRadial",
    "BoundState",
    "FormFactor",
    "GridRadial",
    "PseudoSpectrum",
    "RadialGrid",
    "dipole_matrix",
    "form_factors",
    "hydrogenic_state",
    "momentum_matrix",
    "parse_label",
    "position_matrix",
    "radial_integral",
    "second_moment_matrix",
    "solve_hydrogenic",
    "solve_radial",
]
