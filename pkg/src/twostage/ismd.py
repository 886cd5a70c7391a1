"""Stochastic mirror descent with inexact second-stage solves.

One run fixes the iteration count N and performs, for t = 1..N: sample a
scenario, solve the second stage at the scheduled accuracy (a gap target
or an inner-iteration cap), assemble the stochastic subgradient

    G = s_f1(x1) + grad_x f2(x2, x1, xi2) + sum_i mu_i grad_x g_i(x2, x1, xi2),

and (for t < N) take the prox step x1 <- Prox_x1(gamma G) with the constant
step gamma = theta1 / sqrt(N). Outputs are the step-weighted averages of
the iterates and of the sampled objective values f1(x1^t) + f2(x2^t, ...).

Accuracy schedules: a fixed gap target (exact mode), the theory schedule
eps_t = theta2 / t^2, or per-iteration inner solver caps given by the four
piecewise-constant cap tables (variants ismd1..ismd4) that ramp the cap
fraction of I_max up over the run.
"""

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Entropy, entropy_prox_log, omega_center, prox_step
from .numkit import InvalidInputError
from .second_stage import BallStage, solve_stage

# cap tables: (upper fraction of N, cap fraction of I_max) per range,
# ranges are (prev upper, upper] over 1-based iteration indices
CAP_TABLES = {
    "ismd1": tuple((j / 10.0, j / 10.0) for j in range(1, 11)),
    "ismd2": ((0.1, 0.2), (0.2, 0.4), (0.3, 0.6), (0.4, 0.8), (0.5, 0.9), (1.0, 1.0)),
    "ismd3": (
        (0.02, 0.5),
        (0.04, 0.6),
        (0.06, 0.7),
        (0.08, 0.8),
        (0.1, 0.9),
        (1.0, 1.0),
    ),
    "ismd4": ((0.1, 0.7), (0.2, 0.8), (0.3, 0.9), (1.0, 1.0)),
}


def iteration_cap(variant, t, n_iters, i_max):
    """Inner-solver iteration cap at (1-based) outer iteration t.

    Range boundaries use ceil(fraction * N) and caps use
    ceil(fraction * I_max), with ceil = smallest integer >= x.
    """
    try:
        table = CAP_TABLES[variant]
    except KeyError:
        raise InvalidInputError("unknown cap schedule %r" % variant) from None
    if not 1 <= t <= n_iters:
        raise InvalidInputError("iteration index out of range")
    for upper, frac in table:
        if t <= math.ceil(upper * n_iters):
            return math.ceil(frac * i_max)
    return i_max


def default_cap_limit(instance):
    """Default I_max: 15 except for larger ball instances (25/28)."""
    if isinstance(instance.stage, BallStage):
        if instance.n >= 600:
            return 28
        if instance.n >= 400:
            return 25
    return 15


@dataclass(frozen=True)
class ExactAccuracy:
    """Fixed gap target every iteration (SMD when eps is tiny)."""

    eps: float = 1e-10


@dataclass(frozen=True)
class TheorySchedule:
    """Gap targets eps_t = theta2 / t^2."""

    theta2: float = 1.0


@dataclass(frozen=True)
class CapSchedule:
    """Per-iteration inner solver caps from one of the four cap tables."""

    variant: str = "ismd3"
    i_max: int = None  # None: default_cap_limit(instance)


@dataclass(frozen=True)
class IsmdConfig:
    n_iters: int
    theta1: float = 1.0
    accuracy: object = ExactAccuracy()
    seed: int = 0
    store_iterates: bool = False
    store_scenarios: bool = False

    def __post_init__(self):
        if self.n_iters < 2:
            raise InvalidInputError("need at least 2 iterations")
        if self.theta1 <= 0:
            raise InvalidInputError("theta1 must be positive")


@dataclass
class IsmdRun:
    """Outputs and per-iteration trace of one run.

    Scenario draws are replayable from the seed; `store_scenarios` keeps
    the sampled xi2 rows explicitly when requested.
    """

    x1_avg: np.ndarray
    f_hat: float
    trace: np.ndarray  # structured: t, eps_certified, value, f_running
    step: float
    iterates: np.ndarray = None
    scenarios: np.ndarray = None

    @property
    def eps_certified(self):
        return self.trace["eps_certified"]


TRACE_DTYPE = np.dtype(
    [("t", np.int64), ("eps_certified", float), ("value", float), ("f_running", float)]
)


def assemble_gradient(instance, x1, report, s_f1=None):
    """Stochastic subgradient G = s_f1 + H from one second-stage report.

    The report carries the scenario it was solved under; H adds the dual
    part of the Lagrangian gradient when coupling constraints are present.
    """
    x1 = np.asarray(x1, dtype=float)
    if report.x2.size != instance.stage.n or x1.size != instance.n:
        raise InvalidInputError("report dimension does not match the instance")
    if s_f1 is None:
        s_f1 = instance.f1_subgrad(x1)
    return s_f1 + _coupling_gradient(instance.stage, x1, report.scen, report)


def run(instance, config, solver=None):
    """Run mirror descent on an instance; deterministic given the seed."""
    stage = instance.stage
    dgf, fset = instance.dgf, instance.first_stage
    n_iters = config.n_iters
    gamma = config.theta1 / np.sqrt(n_iters)
    rng = instance.scenario_stream(config.seed)
    if solver is None:
        solver = solve_stage

    acc = config.accuracy
    if isinstance(acc, CapSchedule):
        i_max = acc.i_max if acc.i_max is not None else default_cap_limit(instance)

    x1 = omega_center(dgf, fset)
    entropic = isinstance(dgf, Entropy)
    log_x1 = np.log(x1) if entropic else None
    sum_x = np.zeros_like(x1)
    sum_v = 0.0
    trace = np.zeros(n_iters, dtype=TRACE_DTYPE)
    iterates = np.zeros((n_iters, x1.size)) if config.store_iterates else None
    scenarios = (
        np.zeros((n_iters, instance.means.size)) if config.store_scenarios else None
    )

    for t in range(1, n_iters + 1):
        scen = instance.sample_scenario(rng)
        if scenarios is not None:
            scenarios[t - 1] = scen.xi2
        if isinstance(acc, ExactAccuracy):
            eps_t, cap_t = acc.eps, None
        elif isinstance(acc, TheorySchedule):
            eps_t, cap_t = acc.theta2 / t**2, None
        elif isinstance(acc, CapSchedule):
            eps_t, cap_t = 1e-10, iteration_cap(acc.variant, t, n_iters, i_max)
        else:
            raise InvalidInputError("unknown accuracy mode %r" % (acc,))
        report = solver(stage, x1, scen, eps=eps_t, iter_cap=cap_t)
        value = instance.f1(x1) + report.primal_value
        sum_x += x1
        sum_v += value
        trace[t - 1] = (t, report.eps_certified, value, sum_v / t)
        if iterates is not None:
            iterates[t - 1] = x1
        if t < n_iters:
            grad = instance.f1_subgrad(x1) + _coupling_gradient(stage, x1, scen, report)
            if not np.all(np.isfinite(grad)):
                raise FloatingPointError(
                    "non-finite stochastic gradient at iteration %d" % t
                )
            if entropic:
                # prox in log coordinates: immune to underflow of exp
                log_x1 = entropy_prox_log(log_x1, gamma * grad)
                x1 = np.exp(log_x1)
            else:
                x1 = prox_step(dgf, fset, x1, gamma * grad)

    return IsmdRun(
        x1_avg=sum_x / n_iters,
        f_hat=sum_v / n_iters,
        trace=trace,
        step=float(gamma),
        iterates=iterates,
        scenarios=scenarios,
    )


def _coupling_gradient(stage, x1, scen, report):
    """H = grad_x f2 + B^T lambda + sum_i mu_i grad_x g_i at the report."""
    h = scen.grad_x(report.x2, x1)
    if isinstance(stage, BallStage) and report.mu.size:
        h = h + report.mu[0] * (x1 - stage.x0)
    return h


def suggested_theta1(instance, n_probe=64, probe_seed=0):
    """Step scale D_omega / mean dual-norm of G, probed at the omega-center.

    The constant-step tuning rule for mirror descent; the probe solves
    `n_probe` scenarios exactly at the starting point.
    """
    from .geometry import dual_grad_norm, omega_radius
    from .second_stage import oracle_solve

    fset, dgf = instance.first_stage, instance.dgf
    center = omega_center(dgf, fset)
    rng = instance.scenario_stream(probe_seed).substream(991)
    total = 0.0
    for _ in range(n_probe):
        scen = instance.sample_scenario(rng)
        rep = oracle_solve(instance.stage, center, scen)
        total += dual_grad_norm(dgf, assemble_gradient(instance, center, rep))
    m_hat = total / n_probe
    d = omega_radius(dgf, fset)
    if m_hat <= 0 or d <= 0:
        return 1.0
    return float(d / m_hat)


@dataclass(frozen=True)
class RateBoundInputs:
    """Constants of the gap bound; all user-supplied, none estimated."""

    theta1: float
    theta2: float
    d_omega: float
    mu_omega: float
    u_bar: float
    m_star: float

    def __post_init__(self):
        vals = (self.theta1, self.d_omega, self.mu_omega, self.m_star)
        if any(v <= 0 for v in vals) or self.theta2 < 0 or self.u_bar < 0:
            raise InvalidInputError("rate-bound constants must be positive")


def rate_bound(inputs, n_iters):
    """Right-hand side of the expected-gap bound, evaluated literally:

    (2 theta2 + Ubar sqrt(theta2))/N + Ubar sqrt(theta2) ln(N)/N
    + (D^2/theta1 + theta1 M*^2/mu(omega)) / (2 sqrt(N)).
    """
    if n_iters < 2:
        raise InvalidInputError("need N >= 2")
    th1, th2 = inputs.theta1, inputs.theta2
    first = (2.0 * th2 + inputs.u_bar * np.sqrt(th2)) / n_iters
    second = inputs.u_bar * np.sqrt(th2) * np.log(n_iters) / n_iters
    third = (
        inputs.d_omega**2 / th1 + th1 * inputs.m_star**2 / inputs.mu_omega
    ) / (2.0 * np.sqrt(n_iters))
    return float(first + second + third)


def ubar_constant(m1, m2, u1, alpha, alpha_d, e_g0, diam_x2):
    """Ubar = ((M1 + M2 U1) sqrt(2/alpha) + 2 E[G0]/sqrt(alpha_D)) Diam(X2)."""
    if alpha <= 0 or alpha_d <= 0 or diam_x2 <= 0:
        raise InvalidInputError("alpha, alpha_d, diam_x2 must be positive")
    if m1 < 0 or m2 < 0 or u1 < 0 or e_g0 < 0:
        raise InvalidInputError("constants must be nonnegative")
    return float(
        ((m1 + m2 * u1) * np.sqrt(2.0 / alpha) + 2.0 * e_g0 / np.sqrt(alpha_d))
        * diam_x2
    )
