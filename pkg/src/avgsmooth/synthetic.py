"""Ground-truth generators: spaces, densities with spike regions, piecewise
linear targets, and bounded label noise.

Scenarios know their own closed forms: the exact pointwise slope of a
piecewise-linear target on the interval, its exact average under the
scenario density (worst-case slope vs average slope can differ by orders of
magnitude when the rough region carries little mass), and the risk of the
target under the scenario noise.

Randomness uses the Philox counter-based generator keyed by a 64-bit seed.
Draw order is fixed per spec kind and documented on :func:`sample`, so
identical (scenario, n) pairs produce bit-identical samples on any platform.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import quad

from .metric import FiniteMetric
from .smoothness import LabeledSample

_QUAD_OPTS = {"epsabs": 1e-11, "epsrel": 1e-11, "limit": 400}


@dataclass(frozen=True)
class Scenario:
    """Sampling scenario: space, density, target, noise, seed.

    space:   {"kind": "interval"}
             {"kind": "cube", "d": int, "metric": "euclidean"|"linf"}
             {"kind": "finite", "points": [[...]], "metric": ...}
    density: {"kind": "uniform"}
             {"kind": "spike", "mass": p, "center": c, "width": w}
               (mass p on [c-w, c+w], the rest uniform on the complement)
             {"kind": "weights", "weights": [...]}   (finite spaces)
    target:  {"kind": "pwl", "knots": [...], "values": [...]}
               (piecewise linear; applied to the first coordinate on cubes)
             {"kind": "table", "values": [...]}      (finite spaces)
    noise:   {"kind": "none"}
             {"kind": "uniform", "halfwidth": m}   (reflected at 0 and 1)
             {"kind": "flip", "prob": q}           (label replaced by U[0,1])
    """

    space: dict
    density: dict
    target: dict
    noise: dict
    seed: int

    def __post_init__(self):
        if self.target["kind"] == "pwl":
            knots = np.asarray(self.target["knots"], dtype=float)
            vals = np.asarray(self.target["values"], dtype=float)
            if len(knots) != len(vals) or len(knots) < 2:
                raise ValueError("piecewise-linear target needs matching knots/values")
            if knots[0] != 0.0 or knots[-1] != 1.0 or np.any(np.diff(knots) <= 0):
                raise ValueError("knots must increase strictly from 0 to 1")
            if np.any(vals < 0) or np.any(vals > 1):
                raise ValueError("target values must lie in [0, 1]")
        if self.density["kind"] == "spike":
            p, c, w = (self.density[k] for k in ("mass", "center", "width"))
            if not (0 < p < 1):
                raise ValueError("spike mass must lie in (0, 1)")
            if not (0 < w and 0 <= c - w and c + w <= 1):
                raise ValueError("spike region must fit inside [0, 1]")
        if self.noise["kind"] == "uniform" and not (0 < self.noise["halfwidth"] <= 1):
            raise ValueError("uniform noise halfwidth must lie in (0, 1]")
        if self.noise["kind"] == "flip" and not (0 <= self.noise["prob"] <= 1):
            raise ValueError("flip probability must lie in [0, 1]")

    def with_seed(self, seed: int) -> "Scenario":
        return replace(self, seed=int(seed))

    def rng(self) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(key=self.seed))

    # --- target -----------------------------------------------------------

    def target_values(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.target["kind"] == "pwl":
            coord = x if x.ndim == 1 else x[:, 0]
            return np.interp(
                coord, self.target["knots"], self.target["values"]
            )
        if self.target["kind"] == "table":
            idx = np.asarray(x, dtype=int)
            return np.asarray(self.target["values"], dtype=float)[idx]
        raise ValueError(f"unknown target kind {self.target['kind']!r}")

    # --- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "space": self.space,
            "density": self.density,
            "target": self.target,
            "noise": self.noise,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Scenario":
        return cls(
            space=data["space"],
            density=data["density"],
            target=data["target"],
            noise=data["noise"],
            seed=int(data["seed"]),
        )

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path) -> "Scenario":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def trial_seed(master: int, index: int) -> int:
    """Deterministic per-trial seed derived from a master seed."""
    ss = np.random.SeedSequence(entropy=int(master), spawn_key=(int(index),))
    return int(ss.generate_state(1, np.uint64)[0])


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def _sample_interval_positions(scenario: Scenario, rng, n: int) -> np.ndarray:
    d = scenario.density
    if d["kind"] == "uniform":
        return rng.random(n)
    if d["kind"] == "spike":
        p, c, w = d["mass"], d["center"], d["width"]
        lo, hi = c - w, c + w
        sel = rng.random(n)
        u = rng.random(n)
        x = np.empty(n)
        inside = sel < p
        x[inside] = lo + u[inside] * (hi - lo)
        # complement split [0, lo) and (hi, 1], mapped length-proportionally
        left = lo
        total = left + (1.0 - hi)
        uo = u[~inside] * total
        xo = np.where(uo < left, uo, hi + (uo - left))
        x[~inside] = xo
        return x
    raise ValueError(f"density {d['kind']!r} not valid on the interval")


def sample(scenario: Scenario, n: int) -> LabeledSample:
    """Draw n i.i.d. pairs; deterministic given the scenario seed.

    Stream order: position draws first (uniform: one block of n, or n*d on
    cubes; spike: selector block then position block; finite: one selector
    block), then noise draws (uniform: one block; flip: selector block then
    value block).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = scenario.rng()
    kind = scenario.space["kind"]
    if kind == "interval":
        x = _sample_interval_positions(scenario, rng, n)
        points = x[:, None]
        space = FiniteMetric(kind="euclidean", points=points)
        f = scenario.target_values(x)
    elif kind == "cube":
        d = int(scenario.space["d"])
        if scenario.density["kind"] != "uniform":
            raise ValueError("cube scenarios support only the uniform density")
        points = rng.random((n, d))
        space = FiniteMetric(kind=scenario.space.get("metric", "euclidean"), points=points)
        f = scenario.target_values(points)
    elif kind == "finite":
        pts = np.asarray(scenario.space["points"], dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if scenario.density["kind"] == "uniform":
            weights = np.full(len(pts), 1.0 / len(pts))
        elif scenario.density["kind"] == "weights":
            weights = np.asarray(scenario.density["weights"], dtype=float)
            if len(weights) != len(pts) or not math.isclose(weights.sum(), 1.0):
                raise ValueError("weights must match points and sum to 1")
        else:
            raise ValueError("finite spaces use uniform or explicit weights")
        cum = np.cumsum(weights)
        idx = np.searchsorted(cum, rng.random(n), side="right")
        idx = np.minimum(idx, len(pts) - 1)
        points = pts[idx]
        space = FiniteMetric(
            kind=scenario.space.get("metric", "euclidean"), points=points
        )
        f = scenario.target_values(idx)
    else:
        raise ValueError(f"unknown space kind {kind!r}")

    noise = scenario.noise
    if noise["kind"] == "none":
        y = f
    elif noise["kind"] == "uniform":
        m = noise["halfwidth"]
        e = (2.0 * rng.random(n) - 1.0) * m
        y = f + e
        y = np.where(y < 0.0, -y, y)
        y = np.where(y > 1.0, 2.0 - y, y)
    elif noise["kind"] == "flip":
        q = noise["prob"]
        flip = rng.random(n) < q
        u = rng.random(n)
        y = np.where(flip, u, f)
    else:
        raise ValueError(f"unknown noise kind {noise['kind']!r}")
    return LabeledSample(space=space, labels=y)


# ---------------------------------------------------------------------------
# Closed forms (interval, piecewise-linear target, beta = 1; finite spaces)
# ---------------------------------------------------------------------------


def pointwise_slope(scenario: Scenario, x) -> np.ndarray:
    """Exact slope sup_y |f(x)-f(y)|/|x-y| of the piecewise-linear target.

    For piecewise-linear f the chord slope from x is monotone along each
    target segment, so the sup is attained either at a knot or in the local
    limit y -> x; both are evaluated exactly.
    """
    if scenario.space["kind"] != "interval" or scenario.target["kind"] != "pwl":
        raise ValueError("closed-form slope needs an interval scenario")
    knots = np.asarray(scenario.target["knots"], dtype=float)
    vals = np.asarray(scenario.target["values"], dtype=float)
    slopes = np.diff(vals) / np.diff(knots)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    fx = np.interp(x, knots, vals)
    seg = np.clip(np.searchsorted(knots, x, side="right") - 1, 0, len(slopes) - 1)
    local = np.abs(slopes[seg])
    at_knot = np.isin(x, knots)
    kidx = np.searchsorted(knots, x)
    left_seg = np.clip(kidx - 1, 0, len(slopes) - 1)
    local = np.where(at_knot, np.maximum(np.abs(slopes[left_seg]), local), local)
    dist = np.abs(x[:, None] - knots[None, :])
    gap = np.abs(fx[:, None] - vals[None, :])
    chord = np.where(dist > 0, gap / np.where(dist > 0, dist, 1.0), 0.0)
    return np.maximum(local, np.max(chord, axis=1))


def _density_pieces(scenario: Scenario):
    """(lo, hi, density) pieces of the scenario density on [0, 1]."""
    d = scenario.density
    if d["kind"] == "uniform":
        return [(0.0, 1.0, 1.0)]
    if d["kind"] == "spike":
        p, c, w = d["mass"], d["center"], d["width"]
        lo, hi = c - w, c + w
        out_density = (1.0 - p) / (1.0 - (hi - lo))
        pieces = []
        if lo > 0:
            pieces.append((0.0, lo, out_density))
        pieces.append((lo, hi, p / (hi - lo)))
        if hi < 1:
            pieces.append((hi, 1.0, out_density))
        return pieces
    raise ValueError(f"density {d['kind']!r} has no interval closed form")


def true_average_smoothness(scenario: Scenario) -> float:
    """Exact average slope of the target under the scenario density (beta=1).

    Interval scenarios integrate the exact pointwise slope piecewise with
    adaptive quadrature (1e-11 tolerances); finite scenarios sum exactly.
    """
    kind = scenario.space["kind"]
    if kind == "finite":
        pts = np.asarray(scenario.space["points"], dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        space = FiniteMetric(
            kind=scenario.space.get("metric", "euclidean"), points=pts
        )
        vals = np.asarray(scenario.target["values"], dtype=float)
        if scenario.density["kind"] == "weights":
            w = np.asarray(scenario.density["weights"], dtype=float)
        else:
            w = np.full(len(pts), 1.0 / len(pts))
        D = space.distance_matrix
        quot = np.zeros_like(D)
        pos = D > 0
        quot[pos] = np.abs(vals[:, None] - vals[None, :])[pos] / D[pos]
        return float(np.sum(w * np.max(quot, axis=1)))
    if kind != "interval" or scenario.target["kind"] != "pwl":
        raise ValueError("no closed form for this scenario")
    knots = list(np.asarray(scenario.target["knots"], dtype=float))
    total = 0.0
    for lo, hi, dens in _density_pieces(scenario):
        cuts = sorted({lo, hi, *[k for k in knots if lo < k < hi]})
        for a, b in zip(cuts[:-1], cuts[1:]):
            val, _ = quad(
                lambda t: pointwise_slope(scenario, t)[0] * dens, a, b, **_QUAD_OPTS
            )
            total += val
    return total


def holder_seminorm_exact(scenario: Scenario) -> float:
    """Worst-case slope of the target: max segment slope (interval) or
    max pairwise quotient (finite)."""
    if scenario.space["kind"] == "interval" and scenario.target["kind"] == "pwl":
        knots = np.asarray(scenario.target["knots"], dtype=float)
        vals = np.asarray(scenario.target["values"], dtype=float)
        return float(np.max(np.abs(np.diff(vals) / np.diff(knots))))
    if scenario.space["kind"] == "finite":
        sub = replace(scenario, density={"kind": "uniform"})
        pts = np.asarray(scenario.space["points"], dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        space = FiniteMetric(
            kind=scenario.space.get("metric", "euclidean"), points=pts
        )
        vals = np.asarray(scenario.target["values"], dtype=float)
        D = space.distance_matrix
        pos = D > 0
        quot = np.abs(vals[:, None] - vals[None, :])[pos] / D[pos]
        return float(np.max(quot))
    raise ValueError("no closed form for this scenario")


def _uniform_noise_pointwise_risk(t: float, m: float) -> float:
    """E|reflect(t + U(-m, m)) - t| in closed form, handling the folds."""
    if m > 0.5:
        raise ValueError("closed-form risk needs halfwidth <= 0.5")

    def one_side(t):  # fold at 0 only matters when t < m
        if t >= m:
            return m / 2.0
        inner = (t * t + m * m) / 2.0  # integral of |e| over [-t, m]
        lo = 2.0 * t - m
        if lo < 0:
            folded = (m - 2.0 * t) ** 2 / 2.0 + t * t / 2.0
        else:
            folded = (t * t - lo * lo) / 2.0
        return (inner + folded) / (2.0 * m)

    if t <= 0.5:
        return one_side(t)
    return one_side(1.0 - t)  # fold at 1 is the mirror image


def bayes_risk(scenario: Scenario) -> float:
    """Risk of the scenario's own target under the scenario noise.

    This is the natural reference point for excess-risk experiments; it
    upper-bounds the best in-class risk and equals it when the target lies
    in the learned class.
    """
    noise = scenario.noise
    if noise["kind"] == "none":
        return 0.0

    if scenario.space["kind"] == "finite":
        vals = np.asarray(scenario.target["values"], dtype=float)
        if scenario.density["kind"] == "weights":
            w = np.asarray(scenario.density["weights"], dtype=float)
        else:
            w = np.full(len(vals), 1.0 / len(vals))
        if noise["kind"] == "uniform":
            m = noise["halfwidth"]
            per = np.array([_uniform_noise_pointwise_risk(t, m) for t in vals])
            return float(np.sum(w * per))
        q = noise["prob"]
        return float(q * np.sum(w * (vals**2 + (1.0 - vals) ** 2) / 2.0))

    if scenario.space["kind"] != "interval":
        raise ValueError("no closed form for this scenario")

    if noise["kind"] == "uniform":
        m = noise["halfwidth"]
        vals = np.asarray(scenario.target["values"], dtype=float)
        if np.all(vals >= m) and np.all(vals <= 1.0 - m):
            return m / 2.0  # no reflection anywhere

        def integrand(t):
            return _uniform_noise_pointwise_risk(
                float(scenario.target_values(np.array([t]))[0]), m
            )

    else:  # flip-to-uniform: q * E[(f^2 + (1-f)^2) / 2]
        q = noise["prob"]

        def integrand(t):
            ft = float(scenario.target_values(np.array([t]))[0])
            return q * (ft * ft + (1.0 - ft) ** 2) / 2.0

    knots = list(np.asarray(scenario.target["knots"], dtype=float))
    total = 0.0
    for lo, hi, dens in _density_pieces(scenario):
        cuts = sorted({lo, hi, *[k for k in knots if lo < k < hi]})
        for a, b in zip(cuts[:-1], cuts[1:]):
            val, _ = quad(lambda t: integrand(t) * dens, a, b, **_QUAD_OPTS)
            total += val
    return total


# ---------------------------------------------------------------------------
# Scenario factories
# ---------------------------------------------------------------------------


def zigzag_target(slope: float, lo: float, hi: float) -> dict:
    """Piecewise-linear zigzag bouncing between lo and hi at the given slope."""
    if not (0 <= lo < hi <= 1):
        raise ValueError("need 0 <= lo < hi <= 1")
    span = hi - lo
    if slope * 1.0 < span:
        raise ValueError("slope too small to reach both levels")
    knots = [0.0]
    vals = [lo]
    up = True
    while knots[-1] < 1.0:
        step = span / slope
        nxt = knots[-1] + step
        if nxt >= 1.0:
            frac = (1.0 - knots[-1]) * slope
            vals.append(vals[-1] + frac if up else vals[-1] - frac)
            knots.append(1.0)
            break
        knots.append(nxt)
        vals.append(hi if up else lo)
        up = not up
    return {"kind": "pwl", "knots": knots, "values": vals}


def lipschitz_scenario(
    slope: float = 1.0,
    lo: float = 0.2,
    hi: float = 0.8,
    noise: dict | None = None,
    seed: int = 0,
) -> Scenario:
    """Uniform density on [0, 1] with a slope-bounded zigzag target."""
    return Scenario(
        space={"kind": "interval"},
        density={"kind": "uniform"},
        target=zigzag_target(slope, lo, hi),
        noise=noise or {"kind": "none"},
        seed=seed,
    )


def spike_scenario(
    height: float = 0.1,
    worst_slope: float = 100.0,
    mass: float = 0.001,
    base_slope: float = 1.0,
    center: float = 0.5,
    noise: dict | None = None,
    seed: int = 0,
) -> Scenario:
    """Gentle zigzag plus a narrow tent spike in a low-mass density region.

    The spike's steep flank has slope exactly `worst_slope`, so the target's
    worst-case smoothness is worst_slope while its average smoothness under
    the spike-avoiding density stays near base_slope (compute it exactly
    with :func:`true_average_smoothness`).
    """
    width = height / (worst_slope - base_slope)
    base = zigzag_target(base_slope, 0.3, 0.6)
    knots = np.asarray(base["knots"], dtype=float)
    vals = np.asarray(base["values"], dtype=float)
    lo, hi = center - width, center + width
    seg_lo = np.searchsorted(knots, lo, side="right") - 1
    seg_hi = np.searchsorted(knots, hi, side="left") - 1
    if seg_lo != seg_hi or lo == knots[seg_lo] or hi == knots[seg_hi + 1]:
        raise ValueError("spike must sit strictly inside one base segment")
    fl, fc, fr = np.interp([lo, center, hi], knots, vals)
    peak = fc + height
    if peak > 1.0:
        raise ValueError("spike peak leaves [0, 1]")
    keep = (knots < lo) | (knots > hi)
    new_knots = np.concatenate([knots[keep], [lo, center, hi]])
    new_vals = np.concatenate([vals[keep], [fl, peak, fr]])
    order = np.argsort(new_knots)
    target = {
        "kind": "pwl",
        "knots": new_knots[order].tolist(),
        "values": new_vals[order].tolist(),
    }
    return Scenario(
        space={"kind": "interval"},
        density={"kind": "spike", "mass": mass, "center": center, "width": width},
        target=target,
        noise=noise or {"kind": "none"},
        seed=seed,
    )


def finite_scenario(
    points, values, weights=None, metric: str = "euclidean", noise: dict | None = None,
    seed: int = 0,
) -> Scenario:
    pts = np.asarray(points, dtype=float)
    density = (
        {"kind": "weights", "weights": list(map(float, weights))}
        if weights is not None
        else {"kind": "uniform"}
    )
    return Scenario(
        space={"kind": "finite", "points": pts.tolist(), "metric": metric},
        density=density,
        target={"kind": "table", "values": list(map(float, values))},
        noise=noise or {"kind": "none"},
        seed=seed,
    )
