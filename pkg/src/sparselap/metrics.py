"""Edge-recovery F-score and weighted Newman modularity."""

from dataclasses import dataclass

import numpy as np

from .laplacian_ops import laplacian_from_weights, num_vertices, vertex_pairs

DEFAULT_THRESHOLD = 1e-8


@dataclass(frozen=True)
class EdgeSet:
    """Unordered vertex pairs stored as 1-based ``(i, j)`` with ``i > j``."""

    p: int
    edges: frozenset

    def __post_init__(self):
        normalized = set()
        for a, b in self.edges:
            a, b = int(a), int(b)
            if a == b:
                raise ValueError(f"self-loop at vertex {a}")
            if not (1 <= a <= self.p and 1 <= b <= self.p):
                raise ValueError(f"pair ({a}, {b}) outside 1..{self.p}")
            normalized.add((max(a, b), min(a, b)))
        object.__setattr__(self, "edges", frozenset(normalized))

    def __len__(self):
        return len(self.edges)

    def __iter__(self):
        return iter(sorted(self.edges, key=lambda e: (e[1], e[0])))


def edge_set_from_weights(x, threshold=DEFAULT_THRESHOLD):
    """Support of ``x``: pairs whose weight exceeds ``threshold``."""
    if threshold < 0:
        raise ValueError(f"threshold must be >= 0, got {threshold}")
    x = np.asarray(x, dtype=float)
    p = num_vertices(x.size)
    rows, cols = vertex_pairs(p)
    keep = np.flatnonzero(x > threshold)
    return EdgeSet(p, frozenset(zip((rows[keep] + 1).tolist(), (cols[keep] + 1).tolist())))


def confusion_counts(truth, estimate):
    if truth.p != estimate.p:
        raise ValueError(f"vertex counts differ: {truth.p} vs {estimate.p}")
    tp = len(truth.edges & estimate.edges)
    fp = len(estimate.edges - truth.edges)
    fn = len(truth.edges - estimate.edges)
    return tp, fp, fn


def f_score(truth, estimate):
    """``2tp / (2tp + fp + fn)``; two empty edge sets score 1."""
    tp, fp, fn = confusion_counts(truth, estimate)
    denom = 2 * tp + fp + fn
    if denom == 0:
        return 1.0
    return 2 * tp / denom


def modularity(weights, labels):
    """Weighted Newman modularity of a vertex labeling.

    Parameters
    ----------
    weights : array_like, shape (d,)
        Edge weights of the graph.
    labels : sequence, length p
        Community label of each vertex (any hashable values).

    Returns
    -------
    float
        ``(1/2m) sum_ij (A_ij - k_i k_j / 2m) [c_i == c_j]``.
    """
    w = np.asarray(weights, dtype=float)
    A = -laplacian_from_weights(w)
    np.fill_diagonal(A, 0.0)
    p = A.shape[0]
    labels = list(labels)
    if len(labels) != p:
        raise ValueError(f"{len(labels)} labels for {p} vertices")
    k = A.sum(axis=1)
    two_m = k.sum()
    if not two_m > 0:
        raise ValueError("modularity is undefined for a graph with zero total weight")

    codes = {}
    ids = np.array([codes.setdefault(label, len(codes)) for label in labels])
    q = 0.0
    for c in range(len(codes)):
        members = ids == c
        inside = A[np.ix_(members, members)].sum()
        degree = k[members].sum()
        q += inside / two_m - (degree / two_m) ** 2
    return float(q)
