"""Guaranteed a posteriori energy-error bounds for 2D diffusion problems
with nonsymmetric coefficient matrices.

The bound (the majorant) is globally minimized over a Raviart-Thomas
flux space by alternating exact minimizations in the flux and in the
scalar weight beta; the squared majorant is then a guaranteed upper
bound for the squared energy norm of the discretization error of any
conforming approximation.
"""

from . import errors
from .assembly import (MajorantSystem, assemble_majorant, assemble_primal,
                       energy_error, solve_primal)
from .mesh import TriMesh, build_rect_mesh, mesh_to_text
from .minimize import (MajorantResult, eval_majorant, guaranteed_bound_check,
                       minimize_majorant)
from .problem import (CoefficientModel, ProblemSpec, compute_B,
                      compute_lambda_low, csb_inequality_check,
                      example1_problem, friedrichs_constant)
from .quadrature import MAX_DEGREE, QuadRule, rule_for_degree
from .sparse import (CSRMatrix, assemble_from_triplets, cg_solve,
                     kernel_backend, nonsym_solve)
from .spaces import (FluxSpace, ScalarField, ScalarSpace, eval_flux_basis,
                     eval_scalar_basis)
from .study import StudyConfig, StudyRow, emit_table, load_config, run_study

__version__ = "0.1.0"

__all__ = [
    "TriMesh", "build_rect_mesh", "mesh_to_text",
    "QuadRule", "rule_for_degree", "MAX_DEGREE",
    "ScalarSpace", "FluxSpace", "ScalarField",
    "eval_scalar_basis", "eval_flux_basis",
    "CoefficientModel", "ProblemSpec",
    "compute_B", "compute_lambda_low", "friedrichs_constant",
    "csb_inequality_check", "example1_problem",
    "CSRMatrix", "assemble_from_triplets", "cg_solve", "nonsym_solve",
    "kernel_backend",
    "MajorantSystem", "assemble_primal", "assemble_majorant",
    "solve_primal", "energy_error",
    "MajorantResult", "minimize_majorant", "eval_majorant",
    "guaranteed_bound_check",
    "StudyConfig", "StudyRow", "run_study", "emit_table", "load_config",
    "errors",
    "__version__",
]
