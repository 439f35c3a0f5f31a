"""Negative log-likelihood of a Laplacian-constrained Gaussian model.

    f(x) = -log det(Lx + J) + tr(S Lx),    J = ones((p, p)) / p

The trace term equals ``<L*S, x>``, so the linear coefficient is computed
once per covariance (:class:`SampleCovariance.linear_term`). A Cholesky
factorization of ``Lx + J`` both evaluates the log-determinant and decides
membership in the feasible set; failure is reported, not raised.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg

from .laplacian_ops import adjoint, laplacian_from_weights, num_edges


@dataclass(frozen=True)
class SampleCovariance:
    """Symmetric ``p x p`` second-moment matrix and the sample count behind it."""

    matrix: np.ndarray
    n: int = 0

    def __post_init__(self):
        S = np.array(self.matrix, dtype=float)
        if S.ndim != 2 or S.shape[0] != S.shape[1] or S.shape[0] < 2:
            raise ValueError(f"covariance must be square with p >= 2, got shape {S.shape}")
        if not np.all(np.isfinite(S)):
            raise ValueError("covariance has non-finite entries")
        scale = max(1.0, float(np.abs(S).max()))
        if np.abs(S - S.T).max() > 1e-12 * scale:
            raise ValueError("covariance is not symmetric")
        if np.any(np.diagonal(S) < 0):
            raise ValueError("covariance has a negative diagonal entry")
        if self.n < 0:
            raise ValueError(f"sample count must be >= 0, got {self.n}")
        S.setflags(write=False)
        object.__setattr__(self, "matrix", S)

    @property
    def p(self):
        return self.matrix.shape[0]

    @cached_property
    def linear_term(self):
        """``L*S``: coefficients of the trace term in ``x``."""
        c = adjoint(self.matrix)
        c.setflags(write=False)
        return c


@dataclass(frozen=True)
class ObjectiveEvaluation:
    value: float
    is_positive_definite: bool
    factor: np.ndarray | None = field(default=None, repr=False)


def _as_covariance(S):
    return S if isinstance(S, SampleCovariance) else SampleCovariance(np.asarray(S, dtype=float))


def evaluate(x, S):
    """Objective value at ``x`` and whether ``Lx + J`` is positive definite.

    Parameters
    ----------
    x : array_like, shape (d,)
    S : SampleCovariance or array_like, shape (p, p)

    Returns
    -------
    ObjectiveEvaluation
        ``value`` is ``inf`` and ``factor`` is None when the factorization
        fails; otherwise ``factor`` is the lower Cholesky factor.
    """
    S = _as_covariance(S)
    x = np.asarray(x, dtype=float)
    p = S.p
    if x.ndim != 1 or x.size != num_edges(p):
        raise ValueError(f"weight vector of length {x.size} does not match p={p}")

    A = laplacian_from_weights(x, p)
    A += 1.0 / p
    try:
        # no jitter: a disconnected support must fail here
        factor = scipy.linalg.cholesky(A, lower=True, check_finite=True)
    except (np.linalg.LinAlgError, ValueError):
        return ObjectiveEvaluation(np.inf, False)
    diag = np.diagonal(factor)
    # a singular A can still factor with a round-off sized pivot
    floor = np.sqrt(p * np.finfo(float).eps * np.diagonal(A).max())
    if not np.all(diag > floor):
        return ObjectiveEvaluation(np.inf, False)
    value = -2.0 * np.log(diag).sum() + float(S.linear_term @ x)
    return ObjectiveEvaluation(float(value), True, factor)


def gradient(x, S, factor):
    """Gradient ``L*(S - (Lx + J)^{-1})`` using the factor from :func:`evaluate`."""
    if factor is None:
        raise ValueError("gradient requires the Cholesky factor of a positive-definite point")
    S = _as_covariance(S)
    p = S.p
    inv = scipy.linalg.cho_solve((factor, True), np.eye(p), check_finite=False)
    return S.linear_term - adjoint(inv)
