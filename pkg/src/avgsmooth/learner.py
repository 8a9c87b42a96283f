"""Agnostic learning pipeline: LP relabeling under a smoothness budget,
then approximate extension, with the derived parameter schedule.

The relabeling LP, over variables (f_i, err_i, L_i) for each sample point:

    minimize    sum_i err_i
    subject to  err_i >= |f_i - Y_i|
                0 <= f_i <= 1
                (1/n) sum_i L_i <= budget
                |f_i - f_j| <= L_i * rho(i,j)^beta   for all ordered (i, j)
                                                     with rho(i,j) > 0

Absolute values are linearized into inequality pairs.  Because the pairwise
constraints hold for every ordered pair, L_i dominates the per-point slope
w(i) of the relabeling, so its empirical smoothness is at most the budget.
The program is always feasible (constant labels with all L_i = 0 satisfy
every constraint).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .extension import ExtensionModel, fit_extension
from .smoothness import LabeledSample, slope_table

# Absolute tolerance for constraint satisfaction in reported solutions.
SOLVER_TOL = 1e-8
# Row generation adds violated pair constraints until below this slack.
_VIOLATION_TOL = 1e-9
# Materialize all O(n^2) pair rows below this size; generate rows above it.
_FULL_LP_MAX = 300
_MAX_ROUNDS = 200

_HIGHS_OPTIONS = {
    "primal_feasibility_tolerance": 1e-9,
    "dual_feasibility_tolerance": 1e-9,
}


@dataclass(frozen=True)
class LearnerConfig:
    """Target exponent, smoothness budget, excess risk, failure probability."""

    beta: float
    L: float
    epsilon: float
    delta: float

    def __post_init__(self):
        if not (0 < self.beta <= 1):
            raise ValueError(f"beta must be in (0, 1], got {self.beta}")
        if not (0 < self.epsilon < self.L):
            raise ValueError(
                f"need 0 < epsilon < L, got epsilon={self.epsilon}, L={self.L}"
            )
        if not (0 < self.delta < 1):
            raise ValueError(f"delta must be in (0, 1), got {self.delta}")


@dataclass(frozen=True)
class Schedule:
    """Derived parameters for a given sample size.

    L_hat inflates the budget by 5*log^2(2n/delta') (natural log) to cover
    the empirical smoothness of the best in-class competitor with high
    probability; gamma shrinks the net scale accordingly.
    """

    delta_prime: float
    alpha: float
    L_hat: float
    gamma: float
    smoothness_budget: float

    def __post_init__(self):
        for name in ("delta_prime", "alpha", "L_hat", "gamma", "smoothness_budget"):
            if getattr(self, name) <= 0:
                raise ValueError(f"schedule field {name} must be positive")

    @classmethod
    def for_sample_size(cls, config: LearnerConfig, n: int) -> "Schedule":
        if n < 1:
            raise ValueError("sample size must be >= 1")
        delta_prime = config.delta / 3.0
        alpha = config.epsilon / 12.0
        L_hat = 5.0 * math.log(2.0 * n / delta_prime) ** 2 * config.L
        gamma = config.epsilon / (2.0 + 10.0 * L_hat)
        return cls(
            delta_prime=delta_prime,
            alpha=alpha,
            L_hat=L_hat,
            gamma=gamma,
            smoothness_budget=5.0 * L_hat,
        )


@dataclass(frozen=True)
class RelabelProgram:
    """Declarative LP description; solve_lp chooses how to materialize it.

    Variable layout: [f_1..f_n, err_1..err_n, L_1..L_n].  Pair constraints
    exist for every ordered (i, j) with rho_beta[i, j] > 0; there are
    O(n^2) of them.
    """

    y: np.ndarray
    rho_beta: np.ndarray
    budget: float
    beta: float

    @property
    def n(self) -> int:
        return len(self.y)


def build_lp(sample: LabeledSample, beta: float, budget: float) -> RelabelProgram:
    if not (0 < beta <= 1):
        raise ValueError(f"beta must be in (0, 1], got {beta}")
    if budget <= 0:
        raise ValueError("budget must be positive")
    D = sample.space.distance_matrix
    rho_beta = np.zeros_like(D)
    pos = D > 0
    rho_beta[pos] = np.exp(beta * np.log(D[pos]))
    return RelabelProgram(
        y=sample.labels.copy(), rho_beta=rho_beta, budget=float(budget), beta=float(beta)
    )


@dataclass(frozen=True)
class RelabelResult:
    relabeled: np.ndarray
    objective: float  # mean per-sample error, sum(err_i) / n
    achieved_smoothness: float
    lp_status: str  # "optimal_within_alpha" | "infeasible"


def _base_rows(n: int, y: np.ndarray, budget: float):
    """err-linearization rows and the budget row (always present)."""
    rows, cols, data, rhs = [], [], [], []
    r = 0
    for sign in (1.0, -1.0):  # f_i - err_i <= y_i ; -f_i - err_i <= -y_i
        rows.extend(range(r, r + n))
        cols.extend(range(n))
        data.extend([sign] * n)
        rows.extend(range(r, r + n))
        cols.extend(range(n, 2 * n))
        data.extend([-1.0] * n)
        rhs.extend((sign * y).tolist())
        r += n
    rows.extend([r] * n)
    cols.extend(range(2 * n, 3 * n))
    data.extend([1.0 / n] * n)
    rhs.append(budget)
    r += 1
    return rows, cols, data, rhs, r


def _pair_rows(pairs_i, pairs_j, rho_beta, n, row_start):
    """Two rows per ordered pair (i, j): +-(f_i - f_j) <= L_i * rho^beta."""
    p = len(pairs_i)
    coef = rho_beta[pairs_i, pairs_j]
    rows = np.arange(row_start, row_start + 2 * p)
    r1 = rows[:p]
    r2 = rows[p:]
    row_idx = np.concatenate([r1, r1, r1, r2, r2, r2])
    col_idx = np.concatenate(
        [pairs_i, pairs_j, 2 * n + pairs_i, pairs_j, pairs_i, 2 * n + pairs_i]
    )
    vals = np.concatenate(
        [np.ones(p), -np.ones(p), -coef, np.ones(p), -np.ones(p), -coef]
    )
    rhs = np.zeros(2 * p)
    return row_idx, col_idx, vals, rhs, row_start + 2 * p


def _solve_once(program: RelabelProgram, pairs_i, pairs_j):
    n = program.n
    rows, cols, data, rhs, r = _base_rows(n, program.y, program.budget)
    row_idx = np.asarray(rows, dtype=np.int64)
    col_idx = np.asarray(cols, dtype=np.int64)
    vals = np.asarray(data, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    if len(pairs_i) > 0:
        pr, pc, pv, prhs, r = _pair_rows(
            np.asarray(pairs_i), np.asarray(pairs_j), program.rho_beta, n, r
        )
        row_idx = np.concatenate([row_idx, pr])
        col_idx = np.concatenate([col_idx, pc])
        vals = np.concatenate([vals, pv])
        rhs = np.concatenate([rhs, prhs])
    A = sp.csr_matrix((vals, (row_idx, col_idx)), shape=(r, 3 * n))
    c = np.concatenate([np.zeros(n), np.ones(n), np.zeros(n)])
    bounds = [(0.0, 1.0)] * n + [(0.0, None)] * n + [(0.0, None)] * n
    res = linprog(
        c, A_ub=A, b_ub=rhs, bounds=bounds, method="highs", options=_HIGHS_OPTIONS
    )
    return res


def _slope_quotients(values: np.ndarray, rho_beta: np.ndarray) -> np.ndarray:
    """|f_i - f_j| / rho^beta with zero-distance pairs masked to -inf."""
    quot = np.full_like(rho_beta, -np.inf)
    pos = rho_beta > 0
    diff = np.abs(values[:, None] - values[None, :])
    quot[pos] = diff[pos] / rho_beta[pos]
    return quot


def _relabel_smoothness(values: np.ndarray, rho_beta: np.ndarray) -> float:
    """Empirical smoothness of a relabeling; isolated points count as 0."""
    quot = _slope_quotients(values, rho_beta)
    w = np.max(quot, axis=1)
    w[np.isneginf(w)] = 0.0
    return float(np.mean(w))


def solve_lp(program: RelabelProgram, accuracy: float) -> RelabelResult:
    """Solve the relabeling LP to additive accuracy*n in the sum objective.

    Small programs are materialized in full.  Larger ones are solved by
    row generation: start from each point's nearest-neighbor constraints,
    then repeatedly add the most violated pair rows until the solution is
    feasible for the whole O(n^2) family within 1e-9.  The final objective
    equals a relaxation optimum, hence is never above the full optimum,
    far inside the accuracy contract (HiGHS itself solves to ~1e-9).
    """
    if accuracy <= 0:
        raise ValueError("accuracy must be positive")
    n = program.n
    rho_beta = program.rho_beta
    pos_any = rho_beta > 0

    if n <= _FULL_LP_MAX:
        ii, jj = np.nonzero(pos_any)
        res = _solve_once(program, ii, jj)
        if not res.success:
            return RelabelResult(
                relabeled=program.y.copy(),
                objective=float("nan"),
                achieved_smoothness=float("nan"),
                lp_status="infeasible",
            )
        f = np.clip(res.x[:n], 0.0, 1.0)
        return RelabelResult(
            relabeled=f,
            objective=float(np.mean(np.abs(f - program.y))),
            achieved_smoothness=_relabel_smoothness(f, rho_beta),
            lp_status="optimal_within_alpha",
        )

    # row generation
    masked = np.where(pos_any, rho_beta, np.inf)
    nearest = np.argmin(masked, axis=1)
    has_pair = np.isfinite(masked[np.arange(n), nearest])
    active = set(zip(np.nonzero(has_pair)[0].tolist(), nearest[has_pair].tolist()))
    for _ in range(_MAX_ROUNDS):
        pairs = np.array(sorted(active), dtype=np.int64)
        res = _solve_once(program, pairs[:, 0], pairs[:, 1])
        if not res.success:
            return RelabelResult(
                relabeled=program.y.copy(),
                objective=float("nan"),
                achieved_smoothness=float("nan"),
                lp_status="infeasible",
            )
        f = res.x[:n]
        L = res.x[2 * n :]
        quot = _slope_quotients(f, rho_beta)
        worst_j = np.argmax(quot, axis=1)
        worst = quot[np.arange(n), worst_j]
        violated = np.nonzero(worst > L + _VIOLATION_TOL)[0]
        new_pairs = {(int(i), int(worst_j[i])) for i in violated}
        new_pairs -= active
        if not new_pairs:
            f = np.clip(f, 0.0, 1.0)
            return RelabelResult(
                relabeled=f,
                objective=float(np.mean(np.abs(f - program.y))),
                achieved_smoothness=_relabel_smoothness(f, rho_beta),
                lp_status="optimal_within_alpha",
            )
        active |= new_pairs
    raise RuntimeError("row generation failed to converge")


def learn(sample: LabeledSample, config: LearnerConfig) -> ExtensionModel:
    """Full pipeline: schedule, LP relabeling, approximate extension."""
    model, _ = learn_report(sample, config)
    return model


def learn_report(sample: LabeledSample, config: LearnerConfig):
    """learn() plus the relabeling diagnostics, for harness use."""
    n = sample.n
    schedule = Schedule.for_sample_size(config, n)
    program = build_lp(sample, config.beta, schedule.smoothness_budget)
    result = solve_lp(program, schedule.alpha)
    if result.lp_status != "optimal_within_alpha":
        raise RuntimeError("relabeling LP reported infeasible on valid input")
    relabeled = LabeledSample(space=sample.space, labels=result.relabeled)
    model = fit_extension(relabeled, config.beta, schedule.gamma)
    return model, result


# Implementation constants hidden by the asymptotic sample-size formula:
# an overall factor of 1 and a single log(1/epsilon) factor.
SAMPLE_SIZE_CONSTANT = 1.0


def required_sample_size(config: LearnerConfig, covering) -> int:
    """Sample size at which the excess-risk guarantee kicks in.

    Evaluates C * (N_cov(scale) + log(1/delta)) * log(1/eps) / eps^2 with
    scale = (eps / (640 L log(1/eps)))^(1/beta) and C = 1.  `covering`
    maps a scale t to a covering number of the instance space.
    """
    eps, L = config.epsilon, config.L
    if eps >= 1:
        raise ValueError("sample-size formula needs epsilon < 1")
    scale = (eps / (640.0 * L * math.log(1.0 / eps))) ** (1.0 / config.beta)
    cover = covering(scale)
    raw = (
        SAMPLE_SIZE_CONSTANT
        * (cover + math.log(1.0 / config.delta))
        * math.log(1.0 / eps)
        / eps**2
    )
    return int(math.ceil(raw))
