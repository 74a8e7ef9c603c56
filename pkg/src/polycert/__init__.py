"""Certified polynomial nonnegativity over semialgebraic sets.

Nonnegativity assertions lower to linear, second-order-cone, or semidefinite
programs (DSOS / SDSOS / SOS Gram cones), producing Putinar-style
certificates that re-verify independently of the solver. Application layers
build on the same machinery: coverage power minimization, barrier-certificate
collision avoidance, and region-of-attraction estimation.
"""

from .certify import (
    CERT_TOL,
    ConeTag,
    DegreeOverflowError,
    GramCertificate,
    InfeasibleError,
    PolyVar,
    PutinarCertificate,
    SemialgebraicSet,
    VerificationReport,
    add_putinar_constraint,
    certificate_from_text,
    certificate_to_text,
    constrain_in_cone,
    declare_poly_var,
    putinar_feasibility,
    verify_certificate,
)
from .cones import SddWitness, is_dd, is_psd, is_sdd
from .conic import (
    Backend,
    ConicProgram,
    ConicSolution,
    SolverFailureError,
    UnsupportedConeError,
    available_backends,
    get_backend,
    register_backend,
    run_contract_battery,
    solve,
)
from .poly import (
    Monomial,
    Polynomial,
    lie_derivative,
    monomial_basis,
    partial_derivative,
    poly_from_text,
    poly_to_text,
    substitute_affine,
    taylor_trig,
)

__version__ = "0.1.0"

__all__ = [
    "CERT_TOL",
    "Backend",
    "ConeTag",
    "ConicProgram",
    "ConicSolution",
    "DegreeOverflowError",
    "GramCertificate",
    "InfeasibleError",
    "Monomial",
    "PolyVar",
    "Polynomial",
    "PutinarCertificate",
    "SddWitness",
    "SemialgebraicSet",
    "SolverFailureError",
    "UnsupportedConeError",
    "VerificationReport",
    "add_putinar_constraint",
    "available_backends",
    "certificate_from_text",
    "certificate_to_text",
    "constrain_in_cone",
    "declare_poly_var",
    "get_backend",
    "is_dd",
    "is_psd",
    "is_sdd",
    "lie_derivative",
    "monomial_basis",
    "partial_derivative",
    "poly_from_text",
    "poly_to_text",
    "putinar_feasibility",
    "register_backend",
    "run_contract_battery",
    "solve",
    "substitute_affine",
    "taylor_trig",
    "verify_certificate",
]
