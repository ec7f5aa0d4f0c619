"""Exact certification and randomized search for rigid combinatorial structures."""

from .core import (BudgetExceeded, DivisibilityError, DomainError,
                   FrameworkConstants, Instance, IsolationFamily, RigidgenError,
                   SparseDomainVector, SymmetryWitness, UnsupportedFeatureError,
                   admissible_N, check_boundedness, check_divisibility,
                   expected_vector, isolation_family, phi_sum,
                   verify_isolation_family, verify_solution, verify_symmetry)
from .design import DesignParams, build_design_instance, verify_design
from .io import ParseError, read_object, write_object
from .oa import OAParams, build_oa_instance, verify_oa
from .perm import build_perm_spanning_instance, verify_t_wise, verify_x_uniform
from .sampler import SampleConfig, search

__version__ = "0.1.0"

__all__ = [
    "BudgetExceeded", "DesignParams", "DivisibilityError", "DomainError",
    "FrameworkConstants", "Instance", "IsolationFamily", "OAParams",
    "ParseError", "RigidgenError", "SampleConfig", "SparseDomainVector",
    "SymmetryWitness", "UnsupportedFeatureError", "admissible_N",
    "build_design_instance", "build_oa_instance", "build_perm_spanning_instance",
    "check_boundedness", "check_divisibility", "expected_vector",
    "isolation_family", "phi_sum", "read_object", "search", "verify_design",
    "verify_isolation_family", "verify_oa", "verify_solution", "verify_symmetry",
    "verify_t_wise", "verify_x_uniform", "write_object",
]
