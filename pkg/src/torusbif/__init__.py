"""Spectral Galerkin continuation for L u = lambda u + |u|^p on the torus."""
from .errors import TorusBifError
from .field import CosineField, GridSamples, Norms, apply_L, dealias_size, from_grid, nonlinearity, norms, to_grid
from .multiplier import MultiplierSpec, operator_symbol, symbol, validate
from .operator import (
    ProblemSpec,
    jacobian_apply,
    jacobian_matrix,
    newton_solve,
    residual,
    second_derivative,
    third_derivative,
)

__version__ = "0.1.0"

__all__ = [
    "CosineField",
    "GridSamples",
    "MultiplierSpec",
    "Norms",
    "ProblemSpec",
    "TorusBifError",
    "apply_L",
    "dealias_size",
    "from_grid",
    "jacobian_apply",
    "jacobian_matrix",
    "newton_solve",
    "nonlinearity",
    "norms",
    "operator_symbol",
    "residual",
    "second_derivative",
    "symbol",
    "third_derivative",
    "to_grid",
    "validate",
]
