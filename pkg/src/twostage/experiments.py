"""Experiment harness: error-bound comparison tables, cross-method runs
with common random numbers, and tidy CSV emission.

All CSV schemas are fixed per artifact kind so reruns with the same
manifest reproduce identical numeric columns (timing excluded):

* trace files:   method,seed,t,f_running,eps_certified,step
* summary files: method,seed,final_value,wall_ms,N
* bound files:   iter,lower,upper
"""

import csv
import time
from dataclasses import dataclass, field

import numpy as np

from . import baselines, ismd
from .cuts import CutProblemData, cut_fixed_l1, cut_fixed_strong
from .instances import InstanceSpec, generate_instance, quadratic_scenario
from .numkit import InvalidInputError, RngStream
from .second_stage import SimplexStage, solve_simplex_stage

TRACE_HEADER = ["method", "seed", "t", "f_running", "eps_certified", "step"]
SUMMARY_HEADER = ["method", "seed", "final_value", "wall_ms", "N"]
BOUNDS_HEADER = ["iter", "lower", "upper"]
TABLE1_HEADER = [
    "n", "lambda", "eps_target", "alpha", "eps_mean", "eta1_mean", "eta2_mean",
]

METHODS = ("smd", "ismd1", "ismd2", "ismd3", "ismd4", "saa", "lshaped")


def _fmt(x):
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([c if isinstance(c, str) else _fmt(c) for c in row])


# ---------------------------------------------------------------------------
# eta1 vs eta2 comparison table


def eta_pair(stage, x1, scen, eps_target, iter_cap=None):
    """Solve at one anchor and evaluate both fixed-set error bounds.

    Returns (eps_certified, eta1, eta2): the strong-convexity bound
    eps + 2 M1 sqrt(eps/alpha) (Diam = sqrt(2) on the simplex) and the
    linear-gap bound, both at the achieved certificate.
    """
    data = CutProblemData.from_problem(stage, x1, scen)
    rep = solve_simplex_stage(stage, x1, scen, eps=eps_target, iter_cap=iter_cap)
    eta1 = cut_fixed_strong(data, rep).eta
    eta2 = cut_fixed_l1(data, rep).eta
    return rep.eps_certified, eta1, eta2


def run_table1_analog(n_list, lambda_list, eps_levels, seed=0, n_anchors=50,
                      entry_bound=20.0):
    """Mean eta1/eta2 over random anchors per (n, lambda, eps) cell.

    Instances are dense quadratics S = A A^T + lambda I with uniform A
    entries; anchors are drawn uniformly from the simplex. Returns rows in
    TABLE1_HEADER order.
    """
    rng = RngStream(seed)
    rows = []
    for n in n_list:
        for lam in lambda_list:
            scen = quadratic_scenario(rng.substream(len(rows)), n, lam,
                                      entry_bound=entry_bound)
            stage = SimplexStage(n, lam)
            alpha = scen.s3_lambda_min()
            for eps_target in eps_levels:
                eps_sum = eta1_sum = eta2_sum = 0.0
                for k in range(n_anchors):
                    x1 = rng.simplex_point(n)
                    eps_c, eta1, eta2 = eta_pair(stage, x1, scen, eps_target)
                    eps_sum += eps_c
                    eta1_sum += eta1
                    eta2_sum += eta2
                rows.append(
                    (n, lam, eps_target, alpha, eps_sum / n_anchors,
                     eta1_sum / n_anchors, eta2_sum / n_anchors)
                )
    return rows


def eta_trajectory(stage, x1, scen, n_points=8, eps0=None):
    """(eps_k, eta1_k, eta2_k) along a halving sequence of gap targets.

    Mirrors plotting the error bounds against solver progress: each point
    re-solves to a twice-smaller certified gap.
    """
    data = CutProblemData.from_problem(stage, x1, scen)
    if eps0 is None:
        rep = solve_simplex_stage(stage, x1, scen, eps=1e30, iter_cap=1)
        eps0 = max(rep.eps_certified, 1e-6)
    out = []
    eps_target = eps0
    for _ in range(n_points):
        rep = solve_simplex_stage(stage, x1, scen, eps=eps_target)
        eta1 = cut_fixed_strong(data, rep).eta
        eta2 = cut_fixed_l1(data, rep).eta
        out.append((rep.eps_certified, eta1, eta2))
        eps_target = min(eps_target, rep.eps_certified) / 2.0
    return np.array(out)


def rate_sweep(instance, n_grid, seeds, theta1=1.0, accuracy=None, reference=None):
    """Rerun mirror descent over an N-grid for rate plots.

    Returns an array with one row per N: (N, mean f_hat, mean |f_hat - ref|)
    where the last column is NaN when no reference value is given.
    """
    if accuracy is None:
        accuracy = ismd.ExactAccuracy()
    rows = []
    for n_iters in n_grid:
        finals = [
            ismd.run(
                instance,
                ismd.IsmdConfig(n_iters=int(n_iters), theta1=theta1,
                                accuracy=accuracy, seed=seed),
            ).f_hat
            for seed in seeds
        ]
        finals = np.asarray(finals)
        gap = np.nan if reference is None else float(np.mean(np.abs(finals - reference)))
        rows.append((int(n_iters), float(finals.mean()), gap))
    return np.array(rows)


# ---------------------------------------------------------------------------
# cross-method comparison


@dataclass(frozen=True)
class RunManifest:
    """One comparison campaign: methods x seeds on a shared instance.

    All methods at equal seed consume the same scenario stream (common
    random numbers), so differences are attributable to the methods.
    """

    spec: InstanceSpec
    methods: tuple
    n_iters: int
    seeds: tuple = (0,)
    theta1: float = 1.0
    smd_eps: float = 1e-8
    i_max: int = None
    saa_tol: float = 1e-5
    lshaped_gap: float = 0.05

    def __post_init__(self):
        for m in self.methods:
            if m not in METHODS:
                raise InvalidInputError("unknown method %r" % m)


@dataclass
class MethodRun:
    method: str
    seed: int
    final_value: float
    wall_ms: float
    n_iters: int
    trace_rows: list = field(default_factory=list)
    bounds_rows: list = field(default_factory=list)
    eps_certified: np.ndarray = None


def _accuracy_for(manifest, method):
    if method == "smd":
        return ismd.ExactAccuracy(manifest.smd_eps)
    return ismd.CapSchedule(variant=method, i_max=manifest.i_max)


def run_single(manifest, method, seed, instance=None):
    """Run one (method, seed) job and collect its rows."""
    if instance is None:
        instance = generate_instance(manifest.spec)
    t0 = time.perf_counter()
    if method in ("smd", "ismd1", "ismd2", "ismd3", "ismd4"):
        cfg = ismd.IsmdConfig(
            n_iters=manifest.n_iters,
            theta1=manifest.theta1,
            accuracy=_accuracy_for(manifest, method),
            seed=seed,
        )
        out = ismd.run(instance, cfg)
        wall = 1e3 * (time.perf_counter() - t0)
        rows = [
            (method, seed, int(r["t"]), r["f_running"], r["eps_certified"], out.step)
            for r in out.trace
        ]
        return MethodRun(method, seed, out.f_hat, wall, manifest.n_iters, rows,
                         eps_certified=out.trace["eps_certified"].copy())
    rng = instance.scenario_stream(seed)
    batch = instance.sample_scenario_batch(rng, manifest.n_iters)
    if method == "saa":
        cfg = baselines.SaaConfig(
            sample_size=manifest.n_iters, tol=manifest.saa_tol, seed=seed
        )
        res = baselines.saa_solve(instance, cfg, batch=batch)
        wall = 1e3 * (time.perf_counter() - t0)
        return MethodRun(method, seed, res.value, wall, manifest.n_iters)
    if method == "lshaped":
        res = baselines.lshaped_solve(instance, batch, rel_gap=manifest.lshaped_gap)
        wall = 1e3 * (time.perf_counter() - t0)
        bounds = [(int(i), lo, hi) for i, lo, hi in res.bounds]
        return MethodRun(method, seed, res.upper, wall, manifest.n_iters,
                         bounds_rows=bounds)
    raise InvalidInputError("unknown method %r" % method)


def run_method_comparison(manifest, out_dir=None, prefix="compare"):
    """Run every (method, seed) pair; optionally write the CSV artifacts.

    Returns (summary_rows, runs). Files written when out_dir is given:
    <prefix>_summary.csv, <prefix>_trace.csv, <prefix>_bounds.csv (only
    when an L-shaped run is present).
    """
    instance = generate_instance(manifest.spec)
    runs = []
    for method in manifest.methods:
        for seed in manifest.seeds:
            runs.append(run_single(manifest, method, seed, instance=instance))
    summary = [
        (r.method, r.seed, r.final_value, r.wall_ms, r.n_iters) for r in runs
    ]
    if out_dir is not None:
        import os

        write_csv(os.path.join(out_dir, "%s_summary.csv" % prefix), SUMMARY_HEADER,
                  summary)
        trace_rows = [row for r in runs for row in r.trace_rows]
        write_csv(os.path.join(out_dir, "%s_trace.csv" % prefix), TRACE_HEADER,
                  trace_rows)
        bounds_rows = [row for r in runs for row in r.bounds_rows]
        if bounds_rows:
            write_csv(os.path.join(out_dir, "%s_bounds.csv" % prefix),
                      BOUNDS_HEADER, bounds_rows)
    return summary, runs
