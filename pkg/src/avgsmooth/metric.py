"""Finite metric spaces: distances, nets, covers, and covering numbers.

A :class:`FiniteMetric` is either a set of coordinate points under the
euclidean or l-infinity metric, or an explicit (validated) distance matrix.
Everything downstream -- slope computation, net construction, the extension
predictor -- talks to the space only through pairwise distances, so arbitrary
metric structure is supported.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

# Full O(k^3) triangle-inequality validation up to this many points; random
# triple sampling above it (fail fast on malformed data without cubic cost).
TRIANGLE_CHECK_LIMIT = 2000
_TRIANGLE_SAMPLE_TRIPLES = 200_000
_TRIANGLE_SLACK = 1e-12

# Exact covering numbers are a set-cover search; cap the instance size.
EXACT_COVER_LIMIT = 12

_COORD_KINDS = ("euclidean", "linf")
_KINDS = _COORD_KINDS + ("matrix",)


def pairwise_distances(points: np.ndarray, kind: str) -> np.ndarray:
    """All pairwise distances for an (n, d) coordinate array."""
    diff = points[:, None, :] - points[None, :, :]
    if kind == "euclidean":
        return np.sqrt(np.sum(diff * diff, axis=-1))
    if kind == "linf":
        return np.max(np.abs(diff), axis=-1)
    raise ValueError(f"unknown coordinate metric {kind!r}")


def distances_to(points: np.ndarray, x: np.ndarray, kind: str) -> np.ndarray:
    """Distances from a single query point x to each row of `points`."""
    diff = points - np.asarray(x, dtype=float)[None, :]
    if kind == "euclidean":
        return np.sqrt(np.sum(diff * diff, axis=-1))
    if kind == "linf":
        return np.max(np.abs(diff), axis=-1)
    raise ValueError(f"unknown coordinate metric {kind!r}")


def _validate_matrix(dist: np.ndarray) -> None:
    if dist.ndim != 2 or dist.shape[0] != dist.shape[1]:
        raise ValueError("distance matrix must be square")
    k = dist.shape[0]
    if np.any(dist < 0):
        raise ValueError("distances must be nonnegative")
    if np.any(np.diag(dist) != 0):
        raise ValueError("distance matrix diagonal must be zero")
    if not np.array_equal(dist, dist.T):
        raise ValueError("distance matrix must be symmetric")
    if k <= TRIANGLE_CHECK_LIMIT:
        for j in range(k):
            bound = dist[:, j, None] + dist[None, j, :]
            if np.any(dist > bound + _TRIANGLE_SLACK):
                i, l = np.unravel_index(np.argmax(dist - bound), dist.shape)
                raise ValueError(
                    f"triangle inequality violated: d({i},{l}) > d({i},{j}) + d({j},{l})"
                )
    else:
        rng = np.random.default_rng(0)
        idx = rng.integers(0, k, size=(_TRIANGLE_SAMPLE_TRIPLES, 3))
        i, j, l = idx[:, 0], idx[:, 1], idx[:, 2]
        if np.any(dist[i, l] > dist[i, j] + dist[j, l] + _TRIANGLE_SLACK):
            raise ValueError("triangle inequality violated (sampled triples)")


@dataclass(frozen=True)
class FiniteMetric:
    """A finite point set with a metric distance oracle.

    kind is one of "euclidean", "linf" (coordinate-based) or "matrix"
    (explicit symmetric distance matrix, validated on construction).
    """

    kind: str
    points: np.ndarray | None = None
    dist: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown metric kind {self.kind!r}")
        if self.kind == "matrix":
            if self.dist is None:
                raise ValueError("matrix metric requires a distance matrix")
            _validate_matrix(self.dist)
        else:
            if self.points is None:
                raise ValueError("coordinate metric requires points")
            if self.points.ndim != 2:
                raise ValueError("points must be a 2-d array (n, d)")

    @classmethod
    def from_points(cls, points, kind: str = "euclidean") -> "FiniteMetric":
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[0] == 1 and pts.shape[1] > 1 and np.ndim(points) == 1:
            pts = pts.T  # a flat list is n points on the line
        return cls(kind=kind, points=pts)

    @classmethod
    def from_matrix(cls, dist) -> "FiniteMetric":
        return cls(kind="matrix", dist=np.asarray(dist, dtype=float))

    @property
    def n(self) -> int:
        if self.kind == "matrix":
            return self.dist.shape[0]
        return self.points.shape[0]

    def __len__(self) -> int:
        return self.n

    @cached_property
    def distance_matrix(self) -> np.ndarray:
        if self.kind == "matrix":
            return self.dist
        return pairwise_distances(self.points, self.kind)

    def distance(self, i: int, j: int) -> float:
        n = self.n
        if not (0 <= i < n and 0 <= j < n):
            raise IndexError(f"point index out of range: ({i}, {j}) with n={n}")
        return float(self.distance_matrix[i, j])

    def subset(self, indices) -> "FiniteMetric":
        """The induced metric on a subset of points (sample spaces, nets)."""
        idx = np.asarray(indices, dtype=int)
        if self.kind == "matrix":
            return FiniteMetric(kind="matrix", dist=self.dist[np.ix_(idx, idx)])
        return FiniteMetric(kind=self.kind, points=self.points[idx])

    # --- dataset file format ---------------------------------------------

    def to_dict(self) -> dict:
        if self.kind == "matrix":
            return {"metric": "matrix", "dist": self.dist.tolist()}
        return {"metric": self.kind, "points": self.points.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "FiniteMetric":
        kind = data.get("metric")
        if kind == "matrix":
            return cls.from_matrix(data["dist"])
        if kind in _COORD_KINDS:
            return cls.from_points(data["points"], kind=kind)
        raise ValueError(f"unknown metric kind in dataset: {kind!r}")

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path) -> "FiniteMetric":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class Net:
    """A t-net: pairwise center distances >= t and every point within t."""

    center_indices: tuple
    scale: float

    def __len__(self) -> int:
        return len(self.center_indices)


def greedy_net(space: FiniteMetric, subset, t: float) -> Net:
    """Build a t-net of `subset` by greedy scan in ascending index order.

    A point becomes a center iff its distance to every existing center
    is >= t (exact float comparison, no epsilon slack).  Duplicates of an
    existing center are at distance 0 < t and therefore skipped, so the
    net keeps one representative per location.
    """
    if t <= 0:
        raise ValueError("net scale t must be positive")
    idx = sorted(int(i) for i in subset)
    if not idx:
        raise ValueError("cannot build a net of an empty subset")
    D = space.distance_matrix
    centers = [idx[0]]
    for i in idx[1:]:
        if np.min(D[i, centers]) >= t:
            centers.append(i)
    return Net(center_indices=tuple(centers), scale=float(t))


def is_net(space: FiniteMetric, subset, net: Net) -> bool:
    """Exhaustively verify both net invariants (packing and covering)."""
    D = space.distance_matrix
    c = np.asarray(net.center_indices, dtype=int)
    sub = np.asarray(sorted(int(i) for i in subset), dtype=int)
    if len(c) == 0:
        return False
    pair = D[np.ix_(c, c)]
    packing = np.all(pair[np.triu_indices(len(c), k=1)] >= net.scale)
    covering = np.all(np.min(D[np.ix_(sub, c)], axis=1) <= net.scale)
    return bool(packing and covering)


def covering_number(space: FiniteMetric, t: float, mode: str = "greedy_upper") -> int:
    """t-covering number of the whole space.

    greedy_upper returns the size of the greedy net (an upper bound on the
    true covering number, since a t-net is a t-cover).  exact runs a
    set-cover enumeration over ball centers chosen among the space's own
    points; limited to small instances.
    """
    if t <= 0:
        raise ValueError("scale t must be positive")
    n = space.n
    if mode == "greedy_upper":
        return len(greedy_net(space, range(n), t))
    if mode != "exact":
        raise ValueError(f"unknown covering mode {mode!r}")
    if n > EXACT_COVER_LIMIT:
        raise ValueError(
            f"exact covering number limited to {EXACT_COVER_LIMIT} points (got {n})"
        )
    D = space.distance_matrix
    balls = [int(np.sum(1 << np.nonzero(D[i] <= t)[0])) for i in range(n)]
    full = (1 << n) - 1
    for r in range(1, n + 1):
        for combo in itertools.combinations(range(n), r):
            mask = 0
            for i in combo:
                mask |= balls[i]
            if mask == full:
                return r
    raise AssertionError("unreachable: singleton balls always cover")


def interval_cover_bound(epsilon: float, d: int, diameter: float = 1.0) -> int:
    """Grid-cover count ceil(diameter/(2*eps))^d for a d-dimensional cube.

    Standard instantiation of the doubling-space covering estimate
    N(eps) <~ (1/eps)^d; used to evaluate the rate formulas.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if d < 1:
        raise ValueError("dimension must be >= 1")
    per_axis = max(1, math.ceil(diameter / (2.0 * epsilon)))
    return per_axis**d
