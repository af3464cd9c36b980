"""Spectral solver for the spatially homogeneous non-cutoff Boltzmann equation."""

from ._core import (
    AdmissibilityError,
    CoverageError,
    DomainError,
    Error,
    IoError,
    StiffnessError,
    SupportError,
    Table,
    build_table,
    eigenvalue,
    load_table,
    parse_init,
    random_state,
    reconstruct,
    run_suite,
    solve_cascade,
    solve_galerkin,
    suite_names,
)

__all__ = [
    "AdmissibilityError",
    "CoverageError",
    "DomainError",
    "Error",
    "IoError",
    "StiffnessError",
    "SupportError",
    "Table",
    "build_table",
    "eigenvalue",
    "load_table",
    "parse_init",
    "random_state",
    "reconstruct",
    "run_suite",
    "solve_cascade",
    "solve_galerkin",
    "suite_names",
]
