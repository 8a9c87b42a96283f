"""Per-point slopes, empirical average smoothness, and Holder seminorms.

The beta-slope of a value table f at sample point i is

    w(i) = max over j with rho(i, j) > 0 of |f_i - f_j| / rho(i, j)^beta .

Averaging w over the sample gives the empirical smoothness; taking the max
gives the (finite-sample) Holder seminorm.  The average can be far below the
max -- that gap is what makes smoothness-on-average a useful budget.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .metric import FiniteMetric


@dataclass(frozen=True)
class LabeledSample:
    """Sample points with labels in [0, 1]."""

    space: FiniteMetric
    labels: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.labels, dtype=float)
        object.__setattr__(self, "labels", y)
        if y.ndim != 1 or len(y) != self.space.n:
            raise ValueError("labels must align one-to-one with points")
        if np.any(y < 0) or np.any(y > 1):
            raise ValueError("labels must lie in [0, 1]")

    @property
    def n(self) -> int:
        return self.space.n


@dataclass(frozen=True)
class SlopeProfile:
    """Per-point slopes w(i), their mean (empirical smoothness) and max."""

    beta: float
    per_point_slope: np.ndarray
    empirical_avg: float
    max_slope: float

    def to_dict(self) -> dict:
        return {
            "beta": self.beta,
            "per_point_slope": self.per_point_slope.tolist(),
            "empirical_avg": self.empirical_avg,
            "max_slope": self.max_slope,
        }


def _check_beta(beta: float) -> None:
    if not (0 < beta <= 1):
        raise ValueError(f"beta must be in (0, 1], got {beta}")


def _powered_distances(dist: np.ndarray, beta: float) -> np.ndarray:
    """rho^beta via exp(beta*log(rho)) on positive entries; 0 stays 0."""
    out = np.zeros_like(dist)
    pos = dist > 0
    out[pos] = np.exp(beta * np.log(dist[pos]))
    return out


def slope_table(space: FiniteMetric, values, beta: float) -> np.ndarray:
    """All per-point slopes at once; zero-distance pairs are excluded.

    Points with no positive-distance partner get NaN (callers decide
    whether that is an error for them).
    """
    _check_beta(beta)
    v = np.asarray(values, dtype=float)
    if v.shape != (space.n,):
        raise ValueError("values must align one-to-one with points")
    D = space.distance_matrix
    quot = np.full((space.n, space.n), -np.inf)
    pos = D > 0
    dpow = _powered_distances(D, beta)
    diff = np.abs(v[:, None] - v[None, :])
    quot[pos] = diff[pos] / dpow[pos]
    w = np.max(quot, axis=1)
    w[np.isneginf(w)] = np.nan
    return w


def point_slope(space: FiniteMetric, values, beta: float, i: int) -> float:
    """Slope w(i) = max_{rho(i,j)>0} |f_i - f_j| / rho(i,j)^beta."""
    _check_beta(beta)
    v = np.asarray(values, dtype=float)
    if v.shape != (space.n,):
        raise ValueError("values must align one-to-one with points")
    if not 0 <= i < space.n:
        raise IndexError(f"point index {i} out of range")
    d = space.distance_matrix[i]
    pos = d > 0
    if not np.any(pos):
        raise ValueError(
            f"slope undefined at point {i}: every other point coincides with it"
        )
    dpow = np.exp(beta * np.log(d[pos]))
    return float(np.max(np.abs(v[i] - v[pos]) / dpow))


def empirical_smoothness(space: FiniteMetric, values, beta: float) -> SlopeProfile:
    """SlopeProfile with all per-point slopes and their exact mean."""
    w = slope_table(space, values, beta)
    if np.any(np.isnan(w)):
        bad = int(np.nonzero(np.isnan(w))[0][0])
        raise ValueError(
            f"slope undefined at point {bad}: every other point coincides with it"
        )
    return SlopeProfile(
        beta=float(beta),
        per_point_slope=w,
        empirical_avg=float(np.mean(w)),
        max_slope=float(np.max(w)),
    )


def holder_seminorm(space: FiniteMetric, values, beta: float) -> float:
    """Worst-case slope max_i w(i) on the finite sample."""
    if space.n < 2:
        raise ValueError("Holder seminorm needs at least 2 points")
    w = slope_table(space, values, beta)
    if np.all(np.isnan(w)):
        raise ValueError("Holder seminorm needs at least 2 distinct points")
    return float(np.nanmax(w))
