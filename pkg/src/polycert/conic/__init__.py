"""Solver-agnostic conic programming: IR, backend adapters, contract tests."""

from .program import (
    ConicProgram,
    ConicSolution,
    RotatedCone,
    primal_residuals,
    program_from_text,
    program_to_text,
    required_capabilities,
)
from .backends import (
    Backend,
    ClarabelBackend,
    ScipyHighsBackend,
    SolverFailureError,
    UnsupportedConeError,
    available_backends,
    get_backend,
    register_backend,
    solve,
)
from .contract import run_contract_battery

__all__ = [
    "Backend",
    "ClarabelBackend",
    "ConicProgram",
    "ConicSolution",
    "RotatedCone",
    "ScipyHighsBackend",
    "SolverFailureError",
    "UnsupportedConeError",
    "available_backends",
    "get_backend",
    "primal_residuals",
    "program_from_text",
    "program_to_text",
    "register_backend",
    "required_capabilities",
    "run_contract_battery",
    "solve",
]
