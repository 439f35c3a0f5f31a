"""Sparse graph Laplacian estimation with an edge budget.

Maximum-likelihood estimation of a Laplacian-constrained precision matrix
with at most ``s`` edges, solved by gradient projection with backtracking.
"""

__version__ = "0.1.0"

from .datagen import (
    GroundTruthGraph,
    SampleSet,
    erdos_renyi_weighted,
    sample_covariance,
    sample_lggm,
)
from .laplacian_ops import (
    adjoint,
    edge_index,
    edge_pair,
    laplacian_from_weights,
    num_edges,
    num_vertices,
    weights_from_laplacian,
)
from .metrics import EdgeSet, edge_set_from_weights, f_score, modularity
from .objective import ObjectiveEvaluation, SampleCovariance, evaluate, gradient
from .projection import project_sparse_nonneg
from .solver import SolverConfig, SolverResult, solve

__all__ = [
    "EdgeSet",
    "GroundTruthGraph",
    "ObjectiveEvaluation",
    "SampleCovariance",
    "SampleSet",
    "SolverConfig",
    "SolverResult",
    "adjoint",
    "edge_index",
    "edge_pair",
    "edge_set_from_weights",
    "erdos_renyi_weighted",
    "evaluate",
    "f_score",
    "gradient",
    "laplacian_from_weights",
    "modularity",
    "num_edges",
    "num_vertices",
    "project_sparse_nonneg",
    "sample_covariance",
    "sample_lggm",
    "solve",
    "weights_from_laplacian",
]
