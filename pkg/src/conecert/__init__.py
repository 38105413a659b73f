"""Exact certificates for area-minimizing cones over orbits of s-representations."""
from .errors import ConeCertError
from .orbit import BasePoint, minimal_point
from .pipeline import Run, evaluate_table, run_certify
from .polynomial import Poly, Radical, MonomialExpr, clear_powers, nonneg_certificate
from .product import compose, profile_check
from .retraction import Ansatz, assemble_jacobian, validate_ansatz
from .rootdata import RootSystem, build_root_system, orbit_dimension
from .certify import ThresholdSpec, certify_numeric, certify_symbolic
from .verdict import Verdict

__version__ = "0.1.0"

__all__ = [
    "Ansatz", "BasePoint", "ConeCertError", "MonomialExpr", "Poly", "Radical", "RootSystem", "Run",
    "ThresholdSpec", "Verdict", "assemble_jacobian", "build_root_system", "certify_numeric",
    "certify_symbolic", "clear_powers", "compose", "evaluate_table", "minimal_point",
    "nonneg_certificate", "orbit_dimension", "profile_check", "run_certify", "validate_ansatz",
    "__version__",
]
