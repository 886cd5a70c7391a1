"""Two-stage instance containers and seeded random instance generation.

The simplex family pairs a unit-simplex first stage (entropy prox) with the
simplex-constrained second stage; the ball family pairs a unit-ball first
stage (Euclidean prox) with the jointly ball-constrained second stage. In
both, the scenario quadratic is xi2 xi2^T + lam I with Gaussian xi2, whose
componentwise means and standard deviations are drawn once per instance
from configurable intervals.
"""

from dataclasses import dataclass

import numpy as np

from .geometry import ENTROPY, EUCLIDEAN, Ball, Simplex
from .numkit import InvalidInputError, RngStream, gaussian_vector
from .second_stage import BallStage, RankOneBatch, Scenario, SimplexStage

SCENARIO_STREAM = 7  # substream id reserved for scenario sampling


@dataclass(frozen=True)
class InstanceSpec:
    """Recipe for one random instance.

    Defaults reproduce the experiment setup: lambda = 2, costs in [1, 3],
    means in [5, 25], stds in [5, 15], R = 5, x0 = y0 = 10 * ones, unit
    first-stage ball.
    """

    problem: str  # "simplex" | "ball"
    n: int
    lambda_reg: float = 2.0
    cost_range: tuple = (1.0, 3.0)
    mean_range: tuple = (5.0, 25.0)
    std_range: tuple = (5.0, 15.0)
    radius: float = 5.0
    anchor: float = 10.0
    first_stage_radius: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.problem not in ("simplex", "ball"):
            raise InvalidInputError("problem must be 'simplex' or 'ball'")
        if self.n < 1:
            raise InvalidInputError("n must be >= 1")
        if self.std_range[0] <= 0:
            raise InvalidInputError("std range must be positive")


@dataclass(eq=False)
class TwoStageInstance:
    """First-stage data plus the second-stage family and scenario law."""

    c: np.ndarray
    first_stage: object
    dgf: object
    stage: object
    means: np.ndarray
    stds: np.ndarray
    seed: int = 0

    @property
    def n(self):
        return self.c.size

    def f1(self, x1):
        return float(self.c @ x1)

    def f1_subgrad(self, x1):
        return self.c

    def scenario_stream(self, run_seed):
        """Scenario sampling stream shared by all methods at equal seed."""
        return RngStream(run_seed, stream=SCENARIO_STREAM)

    def sample_scenario(self, rng):
        xi2 = gaussian_vector(rng, self.means, self.stds)
        return Scenario.rank_one(xi2, self.stage.lambda_reg)

    def sample_scenario_batch(self, rng, k):
        xi2s = self.means[None, :] + self.stds[None, :] * rng.normal(
            size=(k, self.means.size)
        )
        return RankOneBatch(xi2s, self.stage.lambda_reg)


def generate_instance(spec):
    """Deterministically generate an instance from its spec (seeded)."""
    rng = RngStream(spec.seed)
    n = spec.n
    c = rng.uniform(*spec.cost_range, size=n)
    means = rng.uniform(*spec.mean_range, size=2 * n)
    stds = rng.uniform(*spec.std_range, size=2 * n)
    if spec.problem == "simplex":
        first = Simplex(n)
        dgf = ENTROPY
        stage = SimplexStage(n, spec.lambda_reg)
    else:
        x0 = np.full(n, spec.anchor)
        y0 = np.full(n, spec.anchor)
        first = Ball(x0, spec.first_stage_radius)
        dgf = EUCLIDEAN
        stage = BallStage(n, x0, y0, spec.radius, spec.lambda_reg)
    return TwoStageInstance(
        c=c, first_stage=first, dgf=dgf, stage=stage, means=means, stds=stds,
        seed=spec.seed,
    )


def quadratic_scenario(rng, n, lam, entry_bound=20.0, m=None):
    """Dense scenario S = A A^T + lam I with A uniform in [-b, b], q = ones.

    This is the generator used for the eta1-vs-eta2 comparison tables; m
    defaults to n (conformal first/second stage blocks).
    """
    if m is None:
        m = n
    size = m + n
    a = rng.uniform(-entry_bound, entry_bound, size=(size, size))
    s = a @ a.T + lam * np.eye(size)
    return Scenario.dense(
        s1=s[:m, :m],
        s2=s[:m, m:],
        s3=s[m:, m:],
        q1=np.ones(m),
        q2=np.ones(n),
    )
