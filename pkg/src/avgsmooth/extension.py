"""Approximate Holder extension: trim rough points, net, two-point inference.

Fitting sorts the sample by per-point slope, drops the floor(gamma*n)
roughest points, builds a gamma^(1/beta)-net of the rest, and keeps the
labels on the net.  Inference at x looks for the ordered pair of net points
(u, v) maximizing

    (f(v) - f(u)) / (rho(x,u)^beta + rho(x,v)^beta)

and interpolates between their labels with weight rho(x,u)^beta /
(rho(x,u)^beta + rho(x,v)^beta).  The result always lies in [0, 1] and
agrees with the stored label on every net point.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .metric import FiniteMetric, distances_to, greedy_net
from .smoothness import LabeledSample, slope_table


@dataclass(frozen=True)
class ExtensionModel:
    """Trained predictor: net points, their labels, and the exponent."""

    beta: float
    gamma: float
    metric_kind: str
    net_points: np.ndarray  # (k, d) coordinates, or (k,) indices for "matrix"
    net_labels: np.ndarray  # values in [0, 1]
    trimmed_count: int = 0

    def __post_init__(self):
        if len(self.net_labels) != len(self.net_points):
            raise ValueError("net labels must align with net points")
        if len(self.net_labels) < 1:
            raise ValueError("net must contain at least one point")
        if np.any(self.net_labels < 0) or np.any(self.net_labels > 1):
            raise ValueError("net labels must lie in [0, 1]")

    @property
    def net_size(self) -> int:
        return len(self.net_labels)

    # --- serialization: JSON {beta, gamma, net: [{point, label}]} ----------

    def to_dict(self) -> dict:
        pts = self.net_points.tolist()
        return {
            "beta": self.beta,
            "gamma": self.gamma,
            "metric": self.metric_kind,
            "net": [{"point": p, "label": float(l)} for p, l in zip(pts, self.net_labels)],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExtensionModel":
        kind = data.get("metric", "euclidean")
        pts = [entry["point"] for entry in data["net"]]
        labels = np.array([entry["label"] for entry in data["net"]], dtype=float)
        if kind == "matrix":
            points = np.asarray(pts, dtype=int)
        else:
            points = np.asarray(pts, dtype=float)
        return cls(
            beta=float(data["beta"]),
            gamma=float(data["gamma"]),
            metric_kind=kind,
            net_points=points,
            net_labels=labels,
            trimmed_count=int(data.get("trimmed", 0)),
        )

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path) -> "ExtensionModel":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def fit_extension(sample: LabeledSample, beta: float, gamma: float) -> ExtensionModel:
    """Fit the extension model on a labeled sample (labels act as f-hat).

    Trims the floor(gamma*n) points with largest slope (ties broken by
    original index), then nets the remainder at scale gamma^(1/beta).
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    space, values = sample.space, sample.labels
    n = space.n
    trim = math.floor(gamma * n)
    if trim >= n:
        raise ValueError(
            f"gamma={gamma} trims the whole sample (floor(gamma*n)={trim} >= n={n})"
        )
    if n == 1:
        w = np.zeros(1)
    else:
        w = slope_table(space, values, beta)
        if np.any(np.isnan(w)):
            bad = int(np.nonzero(np.isnan(w))[0][0])
            raise ValueError(
                f"slope undefined at point {bad}: every other point coincides with it"
            )
    order = np.lexsort((np.arange(n), w))
    retained = np.sort(order[: n - trim])
    scale = gamma ** (1.0 / beta)
    net = greedy_net(space, retained, scale)
    centers = np.asarray(net.center_indices, dtype=int)
    if space.kind == "matrix":
        net_points = centers
    else:
        net_points = space.points[centers]
    return ExtensionModel(
        beta=float(beta),
        gamma=float(gamma),
        metric_kind=space.kind,
        net_points=net_points,
        net_labels=values[centers],
        trimmed_count=trim,
    )


def _interpolate_single(dpow: np.ndarray, labels: np.ndarray) -> float:
    """Two-point inference given powered distances to the net points."""
    k = len(labels)
    hit = np.nonzero(dpow == 0.0)[0]
    if len(hit) > 0:
        return float(labels[hit[0]])
    if k == 1:
        return float(labels[0])
    best = 0.0
    best_u = best_v = 0  # objective 0 fallback: all labels equal
    for u in range(k):
        for v in range(k):
            if u == v:
                continue
            obj = (labels[v] - labels[u]) / (dpow[u] + dpow[v])
            if obj > best:
                best, best_u, best_v = obj, u, v
    lam = dpow[best_u] / (dpow[best_u] + dpow[best_v])
    value = labels[best_u] + lam * (labels[best_v] - labels[best_u])
    assert 0.0 <= value <= 1.0, f"interpolation left [0,1]: {value}"
    return float(value)


def _powered(dist: np.ndarray, beta: float) -> np.ndarray:
    out = np.zeros_like(dist)
    pos = dist > 0
    out[pos] = np.exp(beta * np.log(dist[pos]))
    return out


def predict(model: ExtensionModel, x) -> float:
    """Predict at a single point of the space.

    For coordinate metrics x is a coordinate vector (or scalar on the
    line).  Models fitted on explicit-matrix spaces have no coordinates;
    use :func:`predict_from_distances` with a distance vector instead.
    """
    if model.metric_kind == "matrix":
        raise ValueError(
            "matrix-backed model: use predict_from_distances with distances to the net"
        )
    q = np.atleast_1d(np.asarray(x, dtype=float))
    d = distances_to(model.net_points, q, model.metric_kind)
    return _interpolate_single(_powered(d, model.beta), model.net_labels)


def predict_from_distances(model: ExtensionModel, dist_to_net) -> float:
    """Predict given the vector of distances from the query to each net point."""
    d = np.asarray(dist_to_net, dtype=float)
    if d.shape != (model.net_size,):
        raise ValueError("need one distance per net point")
    if np.any(d < 0):
        raise ValueError("distances must be nonnegative")
    return _interpolate_single(_powered(d, model.beta), model.net_labels)


def predict_many(model: ExtensionModel, X) -> np.ndarray:
    """Vectorized prediction.  Matches predict() exactly, tie-breaks included.

    Cost is O(k^2) per query over net size k, vectorized across queries in
    the pair loop.
    """
    pts = np.asarray(X, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if model.metric_kind == "matrix":
        raise ValueError(
            "matrix-backed model: use predict_from_distances per query instead"
        )
    m = pts.shape[0]
    if m == 0:
        return np.zeros(0)
    diff = pts[:, None, :] - model.net_points[None, :, :]
    if model.metric_kind == "euclidean":
        D = np.sqrt(np.sum(diff * diff, axis=-1))
    else:
        D = np.max(np.abs(diff), axis=-1)
    dpow = np.zeros_like(D)
    pos = D > 0
    dpow[pos] = np.exp(model.beta * np.log(D[pos]))

    labels = model.net_labels
    k = model.net_size
    out = np.empty(m)
    exact = np.zeros(m, dtype=bool)
    for a in range(k):  # queries sitting on a net point get its label
        hit = (~exact) & (dpow[:, a] == 0.0)
        out[hit] = labels[a]
        exact |= hit
    live = ~exact
    if k == 1:
        out[live] = labels[0]
        return out
    best = np.zeros(m)
    best_u = np.zeros(m, dtype=np.int64)
    best_v = np.zeros(m, dtype=np.int64)
    for u in range(k):
        du = dpow[:, u]
        for v in range(k):
            if u == v:
                continue
            gain = labels[v] - labels[u]
            if gain <= 0.0:  # objective <= 0 can never beat the running max
                continue
            obj = gain / (du + dpow[:, v])
            better = live & (obj > best)
            best[better] = obj[better]
            best_u[better] = u
            best_v[better] = v
    fu = labels[best_u[live]]
    fv = labels[best_v[live]]
    du = dpow[live, best_u[live]]
    dv = dpow[live, best_v[live]]
    lam = du / (du + dv)
    vals = fu + lam * (fv - fu)
    assert np.all((vals >= 0.0) & (vals <= 1.0)), "interpolation left [0,1]"
    out[live] = vals
    return out
