"""Quantum Markov chain states of the Ising model on the comb graph.

Construction of the transition kernels, solution of the boundary
fixed-point equations, evaluation of the state on local observables by
independent routes, and measurement of correlation decay.
"""

from .comb_graph import Vertex, VertexClass, classify, level, successors, translate, volume
from .op_algebra import (
    ID2,
    SIGMA_Z,
    LocalOperator,
    embed,
    is_positive,
    normalized_trace,
    partial_trace_onto,
    sandwich,
    tensor,
)
from .ising_kernels import ModelParams, kernel_l1, kernel_l2, layer_kernel, model_params
from .boundary_solver import (
    BoundaryField,
    BranchTag,
    SolutionBranch,
    check_theorem44,
    enumerate_branches,
    residual_l1,
    residual_l2,
)
from .qmc_engine import (
    ClusteringReport,
    EvalReport,
    Observable,
    check_compatibility,
    clustering_report,
    evaluate_iterative,
    evaluate_product,
    evaluate_report,
    two_point,
)
from .oracle import brute_force_phi, verify_localization

__version__ = "0.1.0"

__all__ = [
    "Vertex", "VertexClass", "classify", "level", "successors", "translate", "volume",
    "ID2", "SIGMA_Z", "LocalOperator", "embed", "is_positive", "normalized_trace",
    "partial_trace_onto", "sandwich", "tensor",
    "ModelParams", "kernel_l1", "kernel_l2", "layer_kernel", "model_params",
    "BoundaryField", "BranchTag", "SolutionBranch", "check_theorem44",
    "enumerate_branches", "residual_l1", "residual_l2",
    "ClusteringReport", "EvalReport", "Observable", "check_compatibility",
    "clustering_report", "evaluate_iterative", "evaluate_product",
    "evaluate_report", "two_point",
    "brute_force_phi", "verify_localization",
]
