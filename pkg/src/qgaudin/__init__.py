"""Coalgebra-symmetric integrable chains on the sl_q^kappa(2) Poisson algebra.

Cluster variables, Hamiltonian flows, closed-form cluster solutions and
the solvable-group realization of the deformed coproduct.
"""
from .algebra import (
    DeformParams, SiteState, basis_from_x, basis_to_x, casimir, casimir_gradient, jacobi_residual,
    structure_matrix,
)
from .chain import (
    ChainState, ClusterVars, Deltas, casimir_tower, chain_from, cluster, cluster_jacobian,
    complementary_cluster, compose, deltas, random_sites,
)
from .closedform import (
    KinkParams, QCGConstants, cg_solution, cluster_casimirs, deformed_frequency, fit_qpg_kink, fit_qrs_kink,
    qcg_constants, qcg_solution, qpg_s3_logcosh, qpg_solution, qrs_s3n, qrs_solution,
)
from .errors import (
    AperiodicError, ConfigurationError, DegenerateError, DivergenceError, DomainError, FitRangeError,
    NumericalError, QGaudinError, StiffnessError,
)
from .grouprep import GroupElement, group_product, lie_generators, matrix_of, poisson_lie_check
from .integrate import (
    RK4_FIXED, RK45_ADAPTIVE, IntegratorConfig, Trajectory, integrate, integrate_many, invariant_drift,
    measure_period,
)
from .systems import (
    SystemKind, Tag, cluster_rhs_gaudin, cluster_rhs_qrs, grad_hamiltonian, hamiltonian, linear_matrix_cg,
    qrs_deltas, vector_field,
)

__version__ = "0.1.0"

__all__ = [
    "DeformParams",
    "SiteState",
    "basis_from_x",
    "basis_to_x",
    "casimir",
    "casimir_gradient",
    "jacobi_residual",
    "structure_matrix",
    "ChainState",
    "ClusterVars",
    "Deltas",
    "casimir_tower",
    "chain_from",
    "cluster",
    "cluster_jacobian",
    "complementary_cluster",
    "compose",
    "deltas",
    "random_sites",
    "KinkParams",
    "QCGConstants",
    "cg_solution",
    "cluster_casimirs",
    "deformed_frequency",
    "fit_qpg_kink",
    "fit_qrs_kink",
    "qcg_constants",
    "qcg_solution",
    "qpg_s3_logcosh",
    "qpg_solution",
    "qrs_s3n",
    "qrs_solution",
    "AperiodicError",
    "ConfigurationError",
    "DegenerateError",
    "DivergenceError",
    "DomainError",
    "FitRangeError",
    "NumericalError",
    "QGaudinError",
    "StiffnessError",
    "RK4_FIXED",
    "RK45_ADAPTIVE",
    "IntegratorConfig",
    "Trajectory",
    "integrate",
    "integrate_many",
    "invariant_drift",
    "measure_period",
    "SystemKind",
    "Tag",
    "cluster_rhs_gaudin",
    "cluster_rhs_qrs",
    "grad_hamiltonian",
    "hamiltonian",
    "linear_matrix_cg",
    "qrs_deltas",
    "vector_field",
    "GroupElement",
    "group_product",
    "lie_generators",
    "matrix_of",
    "poisson_lie_check",
]
