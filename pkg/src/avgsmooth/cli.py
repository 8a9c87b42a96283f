"""Experiment harness and command-line interface.

Subcommands: gen, slope, train, predict, bound, sweep.  All output is
machine-readable (JSON or CSV, floats printed with 17 significant digits).
Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import bounds as bounds_mod
from .extension import ExtensionModel, fit_extension, predict_many
from .learner import (
    LearnerConfig,
    Schedule,
    build_lp,
    learn_report,
    required_sample_size,
    solve_lp,
)
from .metric import FiniteMetric, interval_cover_bound
from .smoothness import LabeledSample, empirical_smoothness
from .synthetic import Scenario, bayes_risk, sample, trial_seed

RISK_EVAL_DRAWS = 100_000


def fmt(x: float) -> str:
    """17-significant-digit decimal float (value-exact round trip)."""
    return format(float(x), ".17g")


# ---------------------------------------------------------------------------
# Sweep harness
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepSpec:
    """Rate-experiment description.

    scenario seeds double as the master seed; per-(n, trial) seeds are
    derived deterministically.  `schedule` selects how learner parameters
    are derived per n:

    * "rate": unit-constant profile for scaling experiments.  The target
      risk follows the predicted decay, epsilon_n = epsilon * (n/n0)^(-r)
      with r = beta/(d + 2 beta), the smoothness budget is 5 L, and the
      net parameter gamma_n = epsilon_n / (2 + 10 L).  The high-probability
      log-factor inflation in the full schedule is a proof device; at
      experiment sample sizes it would push the pipeline out of the regime
      whose scaling the experiment measures.
    * "theorem": call the learner verbatim with the fixed config.
    """

    scenario: Scenario
    n_grid: tuple
    trials: int
    config: LearnerConfig
    output: str
    dimension: int = 1
    schedule: str = "rate"

    def __post_init__(self):
        if list(self.n_grid) != sorted(self.n_grid):
            raise ValueError("n_grid must be ascending")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.schedule not in ("rate", "theorem"):
            raise ValueError(f"unknown schedule {self.schedule!r}")

    @classmethod
    def from_dict(cls, data: dict) -> "SweepSpec":
        cfg = data["config"]
        return cls(
            scenario=Scenario.from_dict(data["scenario"]),
            n_grid=tuple(int(n) for n in data["n_grid"]),
            trials=int(data["trials"]),
            config=LearnerConfig(
                beta=float(cfg["beta"]),
                L=float(cfg["L"]),
                epsilon=float(cfg["epsilon"]),
                delta=float(cfg["delta"]),
            ),
            output=str(data["output"]),
            dimension=int(data.get("dimension", 1)),
            schedule=str(data.get("schedule", "rate")),
        )


def estimate_risk(model: ExtensionModel, scenario: Scenario, seed: int,
                  draws: int = RISK_EVAL_DRAWS) -> float:
    """Held-out L1 risk by fresh Monte Carlo draws."""
    eval_sample = sample(scenario.with_seed(seed), draws)
    preds = predict_many(model, eval_sample.space.points)
    return float(np.mean(np.abs(preds - eval_sample.labels)))


def _run_trial(spec: SweepSpec, n: int, trial: int):
    scen = spec.scenario
    cfg = spec.config
    master = scen.seed
    job = 2 * (n * 100003 + trial)  # distinct spawn keys per (n, trial, use)
    fit_seed = trial_seed(master, job)
    eval_seed = trial_seed(master, job + 1)
    t0 = time.perf_counter()
    train = sample(scen.with_seed(fit_seed), n)
    if spec.schedule == "theorem":
        model, relabel = learn_report(train, cfg)
    else:
        r = bounds_mod.rate_exponent(spec.dimension, cfg.beta)
        eps_n = cfg.epsilon * (n / spec.n_grid[0]) ** (-r)
        budget = 5.0 * cfg.L
        gamma = eps_n / (2.0 + 10.0 * cfg.L)
        program = build_lp(train, cfg.beta, budget)
        relabel = solve_lp(program, eps_n / 12.0)
        relabeled = LabeledSample(space=train.space, labels=relabel.relabeled)
        model = fit_extension(relabeled, cfg.beta, gamma)
    risk = estimate_risk(model, scen, eval_seed, draws=RISK_EVAL_DRAWS)
    excess = risk - bayes_risk(scen)
    runtime = time.perf_counter() - t0
    return {
        "n": n,
        "trial": trial,
        "excess": excess,
        "lambda_hat": relabel.achieved_smoothness,
        "net_size": model.net_size,
        "runtime": runtime,
    }


def run_sweep(spec: SweepSpec, threads: int = 1) -> dict:
    """Run the sweep, write CSV rows, and fit the log-log excess slope.

    Rows are written sorted by (n, trial) so the CSV is reproducible up to
    the wall-clock runtime column.  The fitted slope is unweighted least
    squares on log(mean excess) vs log(n) over trial means.
    """
    jobs = [(n, t) for n in spec.n_grid for t in range(spec.trials)]
    rows = []
    try:
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                rows = list(pool.map(lambda p: _run_trial(spec, *p), jobs))
        else:
            for n, t in jobs:
                rows.append(_run_trial(spec, n, t))
    finally:
        rows.sort(key=lambda r: (r["n"], r["trial"]))
        with open(spec.output, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["n", "trial", "excess", "lambda_hat", "net_size", "runtime"])
            for r in rows:
                writer.writerow(
                    [
                        r["n"],
                        r["trial"],
                        fmt(r["excess"]),
                        fmt(r["lambda_hat"]),
                        r["net_size"],
                        fmt(r["runtime"]),
                    ]
                )
    means = []
    for n in spec.n_grid:
        vals = [r["excess"] for r in rows if r["n"] == n]
        means.append(float(np.mean(vals)))
    slope = float("nan")
    if len(spec.n_grid) >= 2 and all(m > 0 for m in means):
        slope, _ = np.polyfit(np.log(np.asarray(spec.n_grid, dtype=float)),
                              np.log(np.asarray(means)), 1)
        slope = float(slope)
    return {
        "n_grid": list(spec.n_grid),
        "trial_means": means,
        "fitted_slope": slope,
        "predicted_slope": -bounds_mod.rate_exponent(spec.dimension, spec.config.beta),
        "rows": len(rows),
        "output": spec.output,
    }


# ---------------------------------------------------------------------------
# Dataset files
# ---------------------------------------------------------------------------


def load_dataset(path) -> LabeledSample:
    with open(path) as fh:
        data = json.load(fh)
    space = FiniteMetric.from_dict(data)
    if "labels" not in data:
        raise ValueError(f"dataset {path} carries no labels")
    return LabeledSample(space=space, labels=np.asarray(data["labels"], dtype=float))


def save_dataset(sample_: LabeledSample, path) -> None:
    data = sample_.space.to_dict()
    data["labels"] = sample_.labels.tolist()
    with open(path, "w") as fh:
        json.dump(data, fh)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _cmd_gen(args) -> int:
    scenario = Scenario.load(args.scenario)
    if args.seed is not None:
        scenario = scenario.with_seed(args.seed)
    data = sample(scenario, args.n)
    save_dataset(data, args.out)
    return 0


def _cmd_slope(args) -> int:
    data = load_dataset(args.data)
    profile = empirical_smoothness(data.space, data.labels, args.beta)
    out = json.dumps(profile.to_dict())
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(out + "\n")
    else:
        print(out)
    return 0


def _cmd_train(args) -> int:
    data = load_dataset(args.data)
    config = LearnerConfig(
        beta=args.beta, L=args.L, epsilon=args.epsilon, delta=args.delta
    )
    model, relabel = learn_report(data, config)
    model.save(args.out)
    schedule = Schedule.for_sample_size(config, data.n)
    print(
        json.dumps(
            {
                "n": data.n,
                "lp_objective": relabel.objective,
                "lambda_hat": relabel.achieved_smoothness,
                "smoothness_budget": schedule.smoothness_budget,
                "gamma": schedule.gamma,
                "net_size": model.net_size,
                "model": args.out,
            }
        )
    )
    return 0


def _cmd_predict(args) -> int:
    model = ExtensionModel.load(args.model)
    with open(args.queries) as fh:
        text = fh.read().strip()
    queries = json.loads(text)["points"] if text else []
    out_fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(out_fh)
        writer.writerow(["prediction"])
        if queries:
            preds = predict_many(model, np.asarray(queries, dtype=float))
            for p in preds:
                writer.writerow([fmt(p)])
    finally:
        if args.out:
            out_fh.close()
    return 0


def _cmd_bound(args) -> int:
    def covering(t):
        return interval_cover_bound(t, args.cover_d, args.cover_diameter)

    config = LearnerConfig(
        beta=args.beta, L=args.L, epsilon=args.epsilon, delta=args.delta
    )
    entropy = bounds_mod.bracketing_entropy_bound(
        args.epsilon, args.L, args.beta, covering
    )
    deviation = bounds_mod.deviation_bound(
        args.alpha, args.n, args.delta, entropy
    )
    n_req = required_sample_size(config, covering)
    report = bounds_mod.BoundReport(
        inputs={
            "epsilon": args.epsilon,
            "alpha": args.alpha,
            "L": args.L,
            "beta": args.beta,
            "delta": args.delta,
            "n": args.n,
            "covering": f"grid(d={args.cover_d},diameter={args.cover_diameter})",
        },
        bracketing_entropy_bound=entropy,
        deviation_bound=deviation,
        sample_complexity=n_req,
    )
    out = json.dumps(report.to_dict())
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(out + "\n")
    else:
        print(out)
    return 0


def _cmd_sweep(args) -> int:
    with open(args.spec) as fh:
        data = json.load(fh)
    if args.out:
        data["output"] = args.out
    spec = SweepSpec.from_dict(data)
    if args.seed is not None:
        spec = SweepSpec(
            scenario=spec.scenario.with_seed(args.seed),
            n_grid=spec.n_grid,
            trials=spec.trials,
            config=spec.config,
            output=spec.output,
            dimension=spec.dimension,
            schedule=spec.schedule,
        )
    report = run_sweep(spec, threads=args.threads)
    print(json.dumps(report))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="avgsmooth", description=__doc__)
    parser.add_argument("--seed", type=int, default=None, help="override scenario seed")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--out", default=None, help="output path (default stdout)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="sample a dataset file from a scenario")
    p.add_argument("--scenario", required=True)
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(fn=_cmd_gen)

    p = sub.add_parser("slope", help="empirical smoothness of a dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--beta", type=float, default=1.0)
    p.set_defaults(fn=_cmd_slope)

    p = sub.add_parser("train", help="LP relabeling + extension fit")
    p.add_argument("--data", required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--L", type=float, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.set_defaults(fn=_cmd_train)

    p = sub.add_parser("predict", help="evaluate a model on query points")
    p.add_argument("--model", required=True)
    p.add_argument("--queries", required=True)
    p.set_defaults(fn=_cmd_predict)

    p = sub.add_parser("bound", help="evaluate the bound formulas")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--L", type=float, required=True)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--cover-d", type=int, default=1)
    p.add_argument("--cover-diameter", type=float, default=1.0)
    p.set_defaults(fn=_cmd_bound)

    p = sub.add_parser("sweep", help="rate experiment over a grid of n")
    p.add_argument("--spec", required=True)
    p.set_defaults(fn=_cmd_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    try:
        rc = args.fn(args)
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return 3
    return rc


if __name__ == "__main__":
    sys.exit(main())
