"""Linear operator mapping edge weights to a combinatorial graph Laplacian.

Edge weights live in a vector ``x`` of length ``d = p(p-1)/2``. Entry ``k``
(1-based) corresponds to the vertex pair ``(i, j)`` with ``i > j`` and

    k = i - j + (j - 1)(2p - j) / 2,

which enumerates the strict lower triangle column by column. The public
functions here are vectorized; ``edge_index`` and ``edge_pair`` expose the
1-based map itself.
"""

from functools import lru_cache

import numpy as np


class NotALaplacianError(ValueError):
    """Raised when a matrix is not a combinatorial graph Laplacian."""


def num_edges(p):
    """Number of candidate edges ``d`` for ``p`` vertices."""
    return p * (p - 1) // 2


def num_vertices(d):
    """Recover ``p`` from a weight-vector length ``d``.

    Raises
    ------
    ValueError
        If ``d`` is not of the form ``p(p-1)/2`` with ``p >= 2``.
    """
    p = int(round((1 + np.sqrt(1 + 8 * d)) / 2))
    if p < 2 or num_edges(p) != d:
        raise ValueError(f"length {d} is not p(p-1)/2 for any p >= 2")
    return p


def edge_index(i, j, p):
    """1-based vector index of the vertex pair ``(i, j)``, ``i > j``.

    Parameters
    ----------
    i, j : int
        1-based vertex labels with ``1 <= j < i <= p``.
    p : int
        Number of vertices.

    Returns
    -------
    int
        ``k`` in ``1..p(p-1)/2``.
    """
    if p < 2:
        raise ValueError(f"p must be >= 2, got {p}")
    if not (1 <= j < i <= p):
        raise ValueError(f"need 1 <= j < i <= p, got i={i}, j={j}, p={p}")
    return i - j + (j - 1) * (2 * p - j) // 2


def edge_pair(k, p):
    """Inverse of :func:`edge_index`: the 1-based pair ``(i, j)`` for index ``k``."""
    d = num_edges(p)
    if not (1 <= k <= d):
        raise ValueError(f"index {k} out of range 1..{d}")
    rows, cols = _pairs(p)
    return int(rows[k - 1]) + 1, int(cols[k - 1]) + 1


@lru_cache(maxsize=64)
def _pairs(p):
    # 0-based (i, j), i > j, in the order of the index map. Transposing the
    # row-major strict upper triangle gives exactly that order.
    upper_r, upper_c = np.triu_indices(p, k=1)
    rows, cols = upper_c, upper_r
    rows.setflags(write=False)
    cols.setflags(write=False)
    return rows, cols


def vertex_pairs(p):
    """0-based arrays ``(rows, cols)`` with ``rows[k-1] > cols[k-1]`` for each index ``k``."""
    return _pairs(p)


def _check_vector(x, p=None):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError(f"weight vector must be 1-D, got shape {x.shape}")
    q = num_vertices(x.size)
    if p is not None and p != q:
        raise ValueError(f"weight vector of length {x.size} does not match p={p}")
    return x, q


def laplacian_from_weights(x, p=None):
    """Apply the Laplacian operator: build ``Lx`` from edge weights.

    Off-diagonal entries are ``-x_k``; each diagonal entry is the negated
    sum of its row's off-diagonals. The output is exactly symmetric.

    Parameters
    ----------
    x : array_like, shape (d,)
        Edge weights.
    p : int, optional
        Vertex count; inferred from ``len(x)`` if omitted.

    Returns
    -------
    ndarray, shape (p, p)
    """
    x, p = _check_vector(x, p)
    rows, cols = _pairs(p)
    L = np.zeros((p, p))
    L[rows, cols] = -x
    L[cols, rows] = -x
    L[np.diag_indices(p)] = -L.sum(axis=1)
    return L


def adjoint(Y):
    """Adjoint of :func:`laplacian_from_weights`.

    Entry ``k`` is ``Y_ii - Y_ij - Y_ji + Y_jj`` for the pair of ``k``.
    ``Y`` need not be symmetric.
    """
    Y = np.asarray(Y, dtype=float)
    if Y.ndim != 2 or Y.shape[0] != Y.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {Y.shape}")
    p = Y.shape[0]
    if p < 2:
        raise ValueError("matrix must be at least 2x2")
    rows, cols = _pairs(p)
    diag = np.diagonal(Y)
    return diag[rows] - Y[rows, cols] - Y[cols, rows] + diag[cols]


def weights_from_laplacian(M, atol=1e-9):
    """Recover ``x`` from a combinatorial Laplacian ``M = Lx``.

    Raises
    ------
    NotALaplacianError
        If ``M`` is asymmetric, has a positive off-diagonal entry, or a
        nonzero row sum (all checked to ``atol``). The message names the
        first offending entry using 1-based indices.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 2:
        raise NotALaplacianError(f"expected a square matrix with p >= 2, got shape {M.shape}")
    p = M.shape[0]

    asym = np.abs(M - M.T) > atol
    if asym.any():
        i, j = np.argwhere(asym)[0]
        raise NotALaplacianError(
            f"not symmetric at ({i + 1}, {j + 1}): {M[i, j]!r} vs {M[j, i]!r}"
        )
    off = M.copy()
    np.fill_diagonal(off, 0.0)
    positive = off > atol
    if positive.any():
        i, j = np.argwhere(positive)[0]
        raise NotALaplacianError(f"positive off-diagonal entry at ({i + 1}, {j + 1}): {M[i, j]!r}")
    row_sums = M.sum(axis=1)
    bad = np.flatnonzero(np.abs(row_sums) > atol)
    if bad.size:
        i = bad[0]
        raise NotALaplacianError(f"row {i + 1} sums to {row_sums[i]!r}, expected 0")

    rows, cols = _pairs(p)
    x = -M[rows, cols]
    # tolerated -0.0 / tiny positive off-diagonals must not yield negative weights
    return np.maximum(x, 0.0)


def support_is_connected(x, p=None, threshold=0.0):
    """Whether the graph formed by edges with ``x_k > threshold`` is connected."""
    x, p = _check_vector(x, p)
    rows, cols = _pairs(p)
    parent = list(range(p))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    components = p
    for k in np.flatnonzero(x > threshold):
        ra, rb = find(rows[k]), find(cols[k])
        if ra != rb:
            parent[ra] = rb
            components -= 1
            if components == 1:
                return True
    return components == 1
