"""Evaluable generalization-bound formulas and brute-force bracketing oracles.

The formulas here turn the theory into numbers: a bracketing-entropy bound
for average-smoothness classes, a uniform deviation bound driven by
bracketing entropy, the loss-domain bracket construction that transfers
function brackets to the L1 loss class, and the predicted excess-risk decay
exponent on d-dimensional spaces.

Log conventions: natural log everywhere except where a base-2 log is
explicit in the entropy formula's inner factor.  Hidden constants are fixed
to named implementation values (DEVIATION_CONSTANT); scaling tests never
rely on them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .metric import FiniteMetric

# Constant in front of the sqrt deviation term (Hoeffding + union bound
# over the lower and upper bracket families).
DEVIATION_CONSTANT = 2.0

# Exact bracketing oracle limits: beyond these, use the greedy upper bound.
EXACT_BRACKETING_MAX_POINTS = 3
EXACT_BRACKETING_MAX_LEVELS = 5


@dataclass(frozen=True)
class Bracket:
    """Envelope pair l <= u on a finite domain, as value tables."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float)
        up = np.asarray(self.upper, dtype=float)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", up)
        if lo.shape != up.shape:
            raise ValueError("bracket envelopes must share a shape")
        if np.any(lo > up):
            raise ValueError("bracket requires lower <= upper pointwise")

    def width(self, weights) -> float:
        """L1 width sum_i mu_i * (upper_i - lower_i) under a probability table."""
        w = np.asarray(weights, dtype=float)
        if w.shape != self.lower.shape:
            raise ValueError("weights must match the bracket domain")
        return float(np.sum(w * (self.upper - self.lower)))

    def contains(self, values) -> bool:
        v = np.asarray(values, dtype=float)
        return bool(np.all(self.lower <= v) and np.all(v <= self.upper))


def bracketing_entropy_bound(epsilon: float, L: float, beta: float, covering) -> float:
    """Entropy bound N_cov((eps/(128 L log(1/eps)))^(1/beta)) * log(16 log2(1/eps)/eps).

    `covering` maps a scale t to a covering number of the instance space.
    Requires 0 < eps < min(L, 1) so both logs are positive.
    """
    if not (0 < epsilon < 1):
        raise ValueError("epsilon must lie in (0, 1)")
    if epsilon >= L:
        raise ValueError("epsilon must be below the smoothness budget L")
    scale = (epsilon / (128.0 * L * math.log(1.0 / epsilon))) ** (1.0 / beta)
    cover = covering(scale)
    return cover * math.log(16.0 * math.log2(1.0 / epsilon) / epsilon)


def deviation_bound(
    alpha: float, n: int, delta: float, log_bracketing: float
) -> float:
    """alpha + C*sqrt((log_bracketing + log(1/delta)) / n) with C = 2."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not (0 < delta < 1):
        raise ValueError("delta must lie in (0, 1)")
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    return alpha + DEVIATION_CONSTANT * math.sqrt(
        (log_bracketing + math.log(1.0 / delta)) / n
    )


def loss_bracket(f_bracket: Bracket, y_grid) -> Bracket:
    """Transfer a function bracket to the L1-loss domain on an (x, y) grid.

    For f_L(x) <= y <= f_U(x) the loss envelope is (0, f_U(x) - f_L(x));
    below the band it is (f_L(x)-y, f_U(x)-y); above it, (y-f_U(x),
    y-f_L(x)).  The width f_U(x) - f_L(x) is preserved pointwise in x,
    independent of y.
    """
    y = np.asarray(y_grid, dtype=float)
    fl = f_bracket.lower[:, None]
    fu = f_bracket.upper[:, None]
    yy = y[None, :]
    lower = np.where(yy < fl, fl - yy, np.where(yy > fu, yy - fu, 0.0))
    upper = np.where(yy < fl, fu - yy, np.where(yy > fu, yy - fl, fu - fl))
    return Bracket(lower=lower, upper=upper)


def rate_exponent(d: int, beta: float) -> float:
    """Predicted log-log excess-risk decay exponent beta/(d + 2*beta)."""
    if d < 1:
        raise ValueError("dimension must be >= 1")
    if not (0 < beta <= 1):
        raise ValueError(f"beta must be in (0, 1], got {beta}")
    return beta / (d + 2.0 * beta)


@dataclass(frozen=True)
class BoundReport:
    """Evaluated bound formulas with every input recorded."""

    inputs: dict
    bracketing_entropy_bound: float
    deviation_bound: float
    sample_complexity: int

    def to_dict(self) -> dict:
        return {
            "inputs": dict(self.inputs),
            "bracketing_entropy_bound": self.bracketing_entropy_bound,
            "deviation_bound": self.deviation_bound,
            "sample_complexity": self.sample_complexity,
        }


# ---------------------------------------------------------------------------
# Brute-force oracles on tiny instances
# ---------------------------------------------------------------------------


def average_slope_finite(
    space: FiniteMetric, weights, values, beta: float
) -> float:
    """Exact average slope sum_i mu_i * max_j |f_i - f_j| / rho^beta on a
    finite space (zero-distance pairs excluded)."""
    v = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    D = space.distance_matrix
    quot = np.zeros_like(D)
    pos = D > 0
    quot[pos] = np.abs(v[:, None] - v[None, :])[pos] / D[pos] ** beta
    return float(np.sum(w * np.max(quot, axis=1)))


def enumerate_smooth_functions(
    space: FiniteMetric, weights, levels, beta: float, L: float
) -> np.ndarray:
    """All value-grid functions on the space with average slope <= L.

    Returns an (m, k) array of value rows.  Exhaustive: len(levels)^k
    candidates, so keep the space tiny.
    """
    lv = np.asarray(levels, dtype=float)
    k = space.n
    grids = np.meshgrid(*([lv] * k), indexing="ij")
    cand = np.stack([g.ravel() for g in grids], axis=1)
    D = space.distance_matrix
    pos = D > 0
    dpow = np.where(pos, D, 1.0) ** beta
    diff = np.abs(cand[:, :, None] - cand[:, None, :])
    quot = np.where(pos[None, :, :], diff / dpow[None, :, :], 0.0)
    avg = np.sum(np.asarray(weights)[None, :] * np.max(quot, axis=2), axis=1)
    return cand[avg <= L + 1e-12]


def _envelope_width(values: np.ndarray, weights: np.ndarray, mask_members) -> float:
    sub = values[mask_members]
    return float(np.sum(weights * (sub.max(axis=0) - sub.min(axis=0))))


def _maximal_groups(values: np.ndarray, weights: np.ndarray, t: float) -> list:
    """All maximal subsets whose envelope width is <= t, as bitmasks."""
    m = len(values)
    singles_ok = [True] * m  # zero width
    feasible_cache = {}

    def feasible(mask: int) -> bool:
        got = feasible_cache.get(mask)
        if got is None:
            members = [i for i in range(m) if mask >> i & 1]
            got = _envelope_width(values, weights, members) <= t + 1e-12
            feasible_cache[mask] = got
        return got

    maximal = set()
    seen = set()

    def expand(mask: int, start: int):
        if mask in seen:
            return
        seen.add(mask)
        grew = False
        for g in range(m):
            if mask >> g & 1:
                continue
            new = mask | (1 << g)
            if feasible(new):
                grew = True
                if g >= start:
                    expand(new, g)
        if not grew:
            maximal.add(mask)

    for i in range(m):
        if singles_ok[i]:
            expand(1 << i, 0)
    # drop masks dominated by a strictly larger maximal mask
    out = []
    for mk in sorted(maximal, key=lambda x: -bin(x).count("1")):
        if not any(mk != other and mk & other == mk for other in maximal):
            out.append(mk)
    return out


def _min_cover(universe: int, sets: list) -> int:
    """Exact minimum set cover by branch and bound over bitmasks."""
    best = [len(sets) + 1]

    def greedy_bound(unc: int) -> int:
        cnt = 0
        while unc:
            gain = max(sets, key=lambda s: bin(s & unc).count("1"))
            if gain & unc == 0:
                return 10**9
            unc &= ~gain
            cnt += 1
        return cnt

    best[0] = min(best[0], greedy_bound(universe))

    def rec(unc: int, used: int):
        if used >= best[0]:
            return
        if unc == 0:
            best[0] = used
            return
        low = unc & -unc  # cover the lowest uncovered element
        options = [s for s in sets if s & low]
        options.sort(key=lambda s: -bin(s & unc).count("1"))
        for s in options:
            rec(unc & ~s, used + 1)

    rec(universe, 0)
    return best[0]


def exact_bracketing_number(values, weights, t: float) -> int:
    """Exact minimum number of width-<=t brackets covering the given
    finite function family (rows of `values`) under the probability table
    `weights`.

    WLOG a minimal cover uses envelope brackets [min G, max G] of the
    function groups it covers, so this reduces to covering the family by
    subsets whose envelope width is <= t: exact set cover over maximal
    feasible groups.
    """
    vals = np.unique(np.asarray(values, dtype=float), axis=0)
    w = np.asarray(weights, dtype=float)
    m = len(vals)
    if m == 0:
        return 0
    groups = _maximal_groups(vals, w, t)
    return _min_cover((1 << m) - 1, groups)


def greedy_bracketing_number(values, weights, t: float) -> int:
    """Greedy upper bound on the bracketing number (flagged, not exact):
    repeatedly grow a group from the first uncovered function in index
    order while the envelope width stays <= t."""
    vals = np.unique(np.asarray(values, dtype=float), axis=0)
    w = np.asarray(weights, dtype=float)
    m = len(vals)
    covered = np.zeros(m, dtype=bool)
    count = 0
    while not covered.all():
        i = int(np.nonzero(~covered)[0][0])
        lo = vals[i].copy()
        hi = vals[i].copy()
        covered[i] = True
        for j in range(m):
            if covered[j]:
                continue
            nl = np.minimum(lo, vals[j])
            nh = np.maximum(hi, vals[j])
            if np.sum(w * (nh - nl)) <= t + 1e-12:
                lo, hi = nl, nh
                covered[j] = True
        count += 1
    return count


def loss_values(values: np.ndarray, y_grid) -> np.ndarray:
    """Map function rows f(x) to loss rows |f(x) - y| on the (x, y) grid,
    flattened x-major, for feeding the bracketing oracles."""
    y = np.asarray(y_grid, dtype=float)
    table = np.abs(values[:, :, None] - y[None, None, :])
    return table.reshape(len(values), -1)
