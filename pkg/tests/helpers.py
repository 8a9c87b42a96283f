"""Shared brute-force oracles for the test suite.

These stay deliberately independent of the library code paths they check:
plain grid enumeration and direct numpy arithmetic.
"""

import itertools

import numpy as np


def grid_relabel_optimum(points_dist, y, beta, budget, step=0.05):
    """Exhaustive minimum of mean |f - y| over grid labelings whose
    empirical smoothness (mean of per-point max slopes) is within budget.

    points_dist is the pairwise distance matrix.  Only feasible for tiny n.
    """
    n = len(y)
    levels = np.round(np.arange(0.0, 1.0 + step / 2, step), 12)
    dpow = np.where(points_dist > 0, points_dist, 1.0) ** beta
    pos = points_dist > 0
    best = np.inf
    for combo in itertools.product(levels, repeat=n):
        f = np.asarray(combo)
        quot = np.where(pos, np.abs(f[:, None] - f[None, :]) / dpow, 0.0)
        lam = np.mean(np.max(quot, axis=1)) if n > 1 else 0.0
        if lam <= budget + 1e-9:
            obj = float(np.mean(np.abs(f - y)))
            if obj < best:
                best = obj
    return best


def grid_relabel_optimum_fast(points_dist, y, beta, budget, step=0.05):
    """Vectorized version of grid_relabel_optimum for n <= 4."""
    n = len(y)
    levels = np.round(np.arange(0.0, 1.0 + step / 2, step), 12)
    grids = np.meshgrid(*([levels] * n), indexing="ij")
    cand = np.stack([g.ravel() for g in grids], axis=1)
    pos = points_dist > 0
    dpow = np.where(pos, points_dist, 1.0) ** beta
    diff = np.abs(cand[:, :, None] - cand[:, None, :])
    quot = np.where(pos[None, :, :], diff / dpow[None, :, :], 0.0)
    lam = np.mean(np.max(quot, axis=2), axis=1)
    obj = np.mean(np.abs(cand - np.asarray(y)[None, :]), axis=1)
    feasible = lam <= budget + 1e-9
    return float(np.min(obj[feasible]))
