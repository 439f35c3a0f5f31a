"""Gradient projection with Armijo-type backtracking for sparse Laplacian MLE.

Each outer iteration tries step sizes ``sigma * beta**m`` for
``m = 0, 1, ..., m_max`` and accepts the first trial point that is
feasible (``Lx + J`` positive definite) and satisfies

    f(trial) <= f(x) - alpha * eta * ||(x - trial) / eta||**2

with the same ``eta`` that produced the trial.

The edge budget makes the problem nonconvex, so :func:`solve` runs the
iteration from a few deterministic starting points and keeps the best.
"""

import logging
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse
import scipy.sparse.csgraph

from .laplacian_ops import num_edges, vertex_pairs
from .objective import SampleCovariance, evaluate, gradient
from .projection import project_sparse_nonneg

logger = logging.getLogger(__name__)

CONVERGED = "converged"
MAX_ITERATIONS = "max-iterations"
LINE_SEARCH_STALLED = "line-search-stalled"

DEFAULT_STARTS = ("dense", "greedy")


@dataclass(frozen=True)
class SolverConfig:
    """Hyperparameters of the gradient projection method.

    ``s`` is the edge budget; the remaining fields default to standard
    Armijo settings.
    """

    s: int
    sigma: float = 1.0
    beta: float = 0.5
    alpha: float = 1e-4
    tol: float = 1e-6
    max_iter: int = 10000
    m_max: int = 60

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")
        if not 0 < self.beta < 1:
            raise ValueError(f"beta must lie in (0, 1), got {self.beta}")
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not self.tol > 0:
            raise ValueError(f"tol must be > 0, got {self.tol}")
        if self.max_iter < 0:
            raise ValueError(f"max_iter must be >= 0, got {self.max_iter}")
        if self.m_max < 1:
            raise ValueError(f"m_max must be >= 1, got {self.m_max}")
        if self.s < 0:
            raise ValueError(f"s must be >= 0, got {self.s}")


@dataclass
class SolverResult:
    x: np.ndarray
    objective_trace: list = field(default_factory=list)
    iterations: int = 0
    status: str = MAX_ITERATIONS
    final_gradient_mapping_norm: float = np.inf
    start: str = "x0"

    @property
    def objective(self):
        return self.objective_trace[-1]

    @property
    def converged(self):
        return self.status == CONVERGED


@dataclass(frozen=True)
class Step:
    """Accepted line-search step."""

    eta: float
    x: np.ndarray
    value: float
    factor: np.ndarray
    mapping_norm: float
    backtracks: int


def check_budget(s, p):
    """Reject budgets that cannot hold a connected graph on ``p`` vertices."""
    d = num_edges(p)
    if s < p - 1:
        raise ValueError(f"s={s} is below p-1={p - 1}: no connected graph fits the budget")
    if s > d:
        raise ValueError(f"s={s} exceeds the number of vertex pairs d={d}")


def trial_point(x, eta, grad, s):
    """Projected gradient step ``P(x - eta * grad)``."""
    if not eta > 0:
        raise ValueError(f"step size must be > 0, got {eta}")
    return project_sparse_nonneg(np.asarray(x) - eta * np.asarray(grad), s)


def gradient_mapping(x, trial, eta):
    """``(x - trial) / eta``; reduces to the gradient when no constraint binds."""
    if not eta > 0:
        raise ValueError(f"step size must be > 0, got {eta}")
    return (np.asarray(x) - np.asarray(trial)) / eta


def line_search(x, f_x, grad, S, cfg):
    """Backtrack from ``eta = sigma`` until the trial is feasible and decreases enough.

    Returns
    -------
    Step or None
        None when all ``m_max + 1`` step sizes were rejected.
    """
    eta = cfg.sigma
    for m in range(cfg.m_max + 1):
        trial = trial_point(x, eta, grad, cfg.s)
        ev = evaluate(trial, S)
        if ev.is_positive_definite:
            G = gradient_mapping(x, trial, eta)
            g2 = float(G @ G)
            if ev.value <= f_x - cfg.alpha * eta * g2:
                return Step(eta, trial, ev.value, ev.factor, np.sqrt(g2), m)
        eta *= cfg.beta
    return None


def _as_covariance(S):
    return S if isinstance(S, SampleCovariance) else SampleCovariance(np.asarray(S, dtype=float))


def _iterate(S, cfg, x, callback=None):
    """Run the method from a feasible ``x`` with at most ``s`` edges."""
    ev = evaluate(x, S)
    f_x, factor = ev.value, ev.factor
    result = SolverResult(x=x, objective_trace=[f_x])

    for k in range(cfg.max_iter + 1):
        grad = gradient(x, S, factor)
        step = line_search(x, f_x, grad, S, cfg)
        if step is None:
            result.status = LINE_SEARCH_STALLED
            logger.debug("line search stalled at iteration %d", k)
            break
        result.final_gradient_mapping_norm = step.mapping_norm
        # converged: report this iterate, whose mapping was just measured
        if step.mapping_norm <= cfg.tol * (1.0 + np.linalg.norm(x)):
            result.status = CONVERGED
            break
        if k == cfg.max_iter:
            result.status = MAX_ITERATIONS
            break
        x, f_x, factor = step.x, step.value, step.factor
        result.objective_trace.append(f_x)
        result.iterations = k + 1
        if callback is not None:
            callback(k + 1, x, f_x)

    result.x = x
    return result


# -- starting points ---------------------------------------------------------


def _ray_minimizer(S, support):
    # on a spanning support det(w L + J) = w**(p-1) det*(L), so the best
    # uniform weight is (p-1) / sum of L*S over the support
    total = float(S.linear_term[support].sum())
    return (S.p - 1) / total if total > 0 else 1.0 / S.p


def _spanning_support(weights, s, p):
    """Maximum spanning tree under ``weights``, topped up to ``s`` edges by weight."""
    rows, cols = vertex_pairs(p)
    # strictly positive edge costs so that every pair stays in the graph
    cost = weights.max() - weights + 1.0
    G = scipy.sparse.coo_matrix((cost, (rows, cols)), shape=(p, p))
    tree = scipy.sparse.csgraph.minimum_spanning_tree(G).tocoo()
    in_tree = np.zeros(p * p, dtype=bool)
    in_tree[np.maximum(tree.row, tree.col) * p + np.minimum(tree.row, tree.col)] = True
    support = in_tree[rows * p + cols]
    extra = s - int(support.sum())
    if extra > 0:
        order = np.argsort(-weights, kind="stable")
        support[order[~support[order]][:extra]] = True
    return support


def dense_start(S, cfg):
    """Start from the budget-free solution cut down to ``s`` edges.

    Runs the method with ``s = d`` (a convex problem) from the complete
    graph with the best uniform weight, at a loose tolerance of 1e-4, then
    keeps a maximum spanning tree of that solution plus its largest
    remaining weights. Forced tree edges with vanishing weight get a small
    positive floor so that the start stays connected.
    """
    S = _as_covariance(S)
    p = S.p
    d = num_edges(p)
    check_budget(cfg.s, p)

    complete = np.ones(d, dtype=bool)
    dense_cfg = replace(cfg, s=d, tol=max(cfg.tol, 1e-4))
    x_dense = _iterate(S, dense_cfg, np.full(d, _ray_minimizer(S, complete))).x
    if cfg.s == d:
        return x_dense
    support = _spanning_support(x_dense, cfg.s, p)
    return np.where(support, np.maximum(x_dense, 1e-3 * x_dense.max()), 0.0)


def greedy_start(S, cfg):
    """Grow the optimal spanning tree toward ``s`` edges.

    With ``c = L*S``, a tree's best weights are ``1/c_e`` and its objective
    is ``sum(log c_e)`` up to a constant, so the minimum spanning tree
    under ``c`` is optimal among trees. Edges are then added in rounds, a
    quarter of the remaining budget at a time, choosing the most negative
    gradient entries and re-solving loosely after each round.
    """
    S = _as_covariance(S)
    p = S.p
    check_budget(cfg.s, p)
    c = S.linear_term
    if np.any(c <= 0):
        # degenerate covariance: no finite tree optimum
        return dense_start(S, cfg)

    support = _spanning_support(-c, p - 1, p)
    x = np.where(support, 1.0 / c, 0.0)
    k = p - 1
    loose = replace(cfg, tol=max(cfg.tol, 1e-4))
    while k < cfg.s:
        add = max(1, (cfg.s - k) // 4)
        grad = gradient(x, S, evaluate(x, S).factor)
        grad[x > 0] = np.inf
        new = np.argsort(grad, kind="stable")[:add]
        x = x.copy()
        x[new] = 1e-3 * x.max()
        k += add
        x = _iterate(S, replace(loose, s=k), x).x
    return x


_STARTS = {"dense": dense_start, "greedy": greedy_start}


def solve(S, cfg, x0=None, callback=None, starts=DEFAULT_STARTS):
    """Estimate sparse Laplacian weights from a sample covariance.

    Parameters
    ----------
    S : SampleCovariance or array_like, shape (p, p)
    cfg : SolverConfig
    x0 : array_like, shape (d,), optional
        Single starting point; must give a positive-definite ``Lx0 + J``.
        A start with more than ``s`` edges is first cut down to its ``s``
        largest. When given, ``starts`` is ignored.
    callback : callable, optional
        Called as ``callback(k, x, value)`` after each accepted iterate;
        ``k`` restarts at 1 for every starting point.
    starts : sequence of str
        Built-in starting points (``"dense"``, ``"greedy"``) to run from
        when ``x0`` is None. The run with the lowest final objective wins;
        ties go to the earlier entry.

    Returns
    -------
    SolverResult
        Each run stops once ``||G|| <= tol * (1 + ||x||)`` at the current
        iterate (status ``converged``; ``x`` is that iterate), after
        ``max_iter`` accepted steps, or when the line search stalls.
    """
    S = _as_covariance(S)
    p = S.p
    check_budget(cfg.s, p)

    if x0 is not None:
        x = np.array(x0, dtype=float)
        if x.shape != (num_edges(p),):
            raise ValueError(f"x0 has shape {x.shape}, expected ({num_edges(p)},)")
        if np.any(x < 0):
            raise ValueError("x0 has negative weights")
        if not evaluate(x, S).is_positive_definite:
            raise ValueError("x0 is infeasible: L x0 + J is not positive definite")
        # sufficient decrease is unattainable from outside the budget
        x = project_sparse_nonneg(x, cfg.s)
        if not evaluate(x, S).is_positive_definite:
            raise ValueError("x0 is infeasible: its top-s edges do not form a connected graph")
        return _iterate(S, cfg, x, callback)

    starts = tuple(starts)
    if not starts:
        raise ValueError("at least one starting point is required")
    unknown = [name for name in starts if name not in _STARTS]
    if unknown:
        raise ValueError(f"unknown starting point(s) {unknown}; choose from {sorted(_STARTS)}")

    best = None
    for name in starts:
        result = _iterate(S, cfg, _STARTS[name](S, cfg), callback)
        result.start = name
        logger.debug(
            "start %s: status=%s iterations=%d f=%.12g",
            name, result.status, result.iterations, result.objective,
        )
        if best is None or result.objective < best.objective:
            best = result
    return best
