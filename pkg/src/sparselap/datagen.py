"""Synthetic graphs and samples from Laplacian-constrained Gaussian models."""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .laplacian_ops import laplacian_from_weights, num_edges, num_vertices, support_is_connected
from .objective import SampleCovariance

MAX_CONNECT_ATTEMPTS = 50


class GenerationError(RuntimeError):
    """Raised when no connected graph could be drawn."""


def default_edge_prob(p):
    """``2 ln(p) / p``, capped at 1: comfortably above the connectivity threshold."""
    return min(1.0, 2.0 * np.log(p) / p)


@dataclass(frozen=True)
class GroundTruthGraph:
    """Weighted undirected graph given by its edge-weight vector."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        num_vertices(w.size)
        if np.any(w < 0):
            raise ValueError("edge weights must be nonnegative")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def p(self):
        return num_vertices(self.weights.size)

    @property
    def num_edges(self):
        return int(np.count_nonzero(self.weights))

    @cached_property
    def laplacian(self):
        return laplacian_from_weights(self.weights)

    @property
    def adjacency(self):
        W = -self.laplacian
        np.fill_diagonal(W, 0.0)
        return W

    @property
    def degrees(self):
        return np.diag(np.diagonal(self.laplacian))

    def is_connected(self):
        return support_is_connected(self.weights)


@dataclass(frozen=True)
class SampleSet:
    samples: np.ndarray
    rng_seed: object = None

    @property
    def n(self):
        return self.samples.shape[0]

    @property
    def p(self):
        return self.samples.shape[1]


def erdos_renyi_weighted(p, edge_prob=None, weight_low=2.0, weight_high=5.0, seed=None):
    """Draw a connected Erdos-Renyi graph with uniform random edge weights.

    Every vertex pair is an edge independently with probability
    ``edge_prob``; edge weights are ``Uniform(weight_low, weight_high)``.
    Disconnected draws are discarded and redrawn from scratch, at most
    ``MAX_CONNECT_ATTEMPTS`` times.

    Parameters
    ----------
    p : int
        Number of vertices (>= 2).
    edge_prob : float, optional
        Defaults to :func:`default_edge_prob`.
    weight_low, weight_high : float
    seed : int, SeedSequence or Generator, optional

    Returns
    -------
    GroundTruthGraph

    Raises
    ------
    GenerationError
        After ``MAX_CONNECT_ATTEMPTS`` consecutive disconnected draws.
    """
    if p < 2:
        raise ValueError(f"p must be >= 2, got {p}")
    if edge_prob is None:
        edge_prob = default_edge_prob(p)
    if not 0 <= edge_prob <= 1:
        raise ValueError(f"edge_prob must lie in [0, 1], got {edge_prob}")
    if not 0 < weight_low < weight_high:
        raise ValueError(f"need 0 < weight_low < weight_high, got {weight_low}, {weight_high}")

    rng = np.random.default_rng(seed)
    d = num_edges(p)
    for _ in range(MAX_CONNECT_ATTEMPTS):
        mask = rng.random(d) < edge_prob
        w = np.where(mask, rng.uniform(weight_low, weight_high, size=d), 0.0)
        if support_is_connected(w, p):
            return GroundTruthGraph(w)
    raise GenerationError(
        f"no connected graph in {MAX_CONNECT_ATTEMPTS} draws with edge_prob={edge_prob} (p={p})"
    )


def sample_lggm(graph, n, seed=None):
    """Draw ``n`` samples whose precision matrix is the graph Laplacian.

    Uses ``y = sum_i lambda_i^{-1/2} z_i u_i`` over the nonzero eigenpairs
    of ``L``, so the covariance is the pseudo-inverse of ``L`` and every
    sample is orthogonal to the all-ones vector.
    """
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    if not graph.is_connected():
        raise ValueError("graph is not connected")
    lam, U = np.linalg.eigh(graph.laplacian)
    # connected: exactly one zero eigenvalue, the smallest
    scale = U[:, 1:] / np.sqrt(lam[1:])
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, graph.p - 1))
    return SampleSet(z @ scale.T, rng_seed=seed)


def sample_covariance(samples):
    """``(1/n) sum_k y_k y_k^T`` over the rows of ``samples``."""
    Y = samples.samples if isinstance(samples, SampleSet) else np.asarray(samples, dtype=float)
    if Y.ndim != 2:
        raise ValueError(f"samples must be 2-D, got shape {Y.shape}")
    n = Y.shape[0]
    if n == 0:
        raise ValueError("no samples")
    S = Y.T @ Y / n
    # exact symmetry; the product is symmetric up to summation order
    S = 0.5 * (S + S.T)
    return SampleCovariance(S, n=n)
