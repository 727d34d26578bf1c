"""Inverse scattering for the Ward equation (C++ core)."""

from ._ward import (
    Grid,
    WardError,
    contour_nodes,
    eigenfunction,
    evolve_data,
    forward,
    gaussian_potential,
    ldu,
    oracle_suite,
    p1_norm,
    reconstruct,
    validate,
    ward_pde_residual,
)

__all__ = [
    "Grid",
    "WardError",
    "contour_nodes",
    "eigenfunction",
    "evolve_data",
    "forward",
    "gaussian_potential",
    "ldu",
    "oracle_suite",
    "p1_norm",
    "reconstruct",
    "validate",
    "ward_pde_residual",
]
