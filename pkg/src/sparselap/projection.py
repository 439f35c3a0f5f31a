"""Euclidean projection onto nonnegative vectors with at most ``s`` nonzeros."""

import numpy as np


def project_sparse_nonneg(z, s):
    """Clamp ``z`` at zero and keep its ``s`` largest entries.

    Among entries tied for the last kept slot, smaller indices win, so the
    result is deterministic. Selection is an ``argpartition`` (linear time)
    rather than a full sort.

    Parameters
    ----------
    z : array_like, shape (d,)
    s : int
        Sparsity budget, ``0 <= s <= d``.

    Returns
    -------
    ndarray, shape (d,)
    """
    z = np.asarray(z, dtype=float)
    if z.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {z.shape}")
    d = z.size
    s = int(s)
    if s < 0 or s > d:
        raise ValueError(f"sparsity budget s={s} outside 0..{d}")

    out = np.maximum(z, 0.0)
    if s == d:
        return out
    if s == 0:
        return np.zeros(d)

    # s-th largest value is the cut; strictly larger entries are always kept
    cut = out[np.argpartition(out, d - s)[d - s]]
    if cut == 0.0:
        # fewer than s positive entries: zeroing the rest changes nothing
        return out
    above = out > cut
    n_tied_kept = s - int(above.sum())
    tied = np.flatnonzero(out == cut)
    keep = above
    keep[tied[:n_tied_kept]] = True
    out[~keep] = 0.0
    return out
