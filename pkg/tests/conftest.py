import numpy as np
import pytest

from twostage.instances import InstanceSpec, generate_instance


def mild_spec(problem, n, seed):
    """O(1)-scaled instance of either stage family (tight-tolerance tests)."""
    return InstanceSpec(
        problem=problem,
        n=n,
        lambda_reg=1.0,
        cost_range=(0.0, 1.0),
        mean_range=(-2.0, 2.0),
        std_range=(0.5, 1.5),
        radius=2.0,
        anchor=3.0,
        seed=seed,
    )


def paper_spec(problem, n, seed):
    """Instance at the published parameter ranges."""
    return InstanceSpec(problem=problem, n=n, seed=seed)


@pytest.fixture
def mild_simplex_instance():
    return generate_instance(mild_spec("simplex", 3, seed=42))


@pytest.fixture
def mild_ball_instance():
    return generate_instance(mild_spec("ball", 3, seed=43))


def simplex_grid(n, resolution):
    """All points of the barycentric grid with the given resolution."""
    if n == 1:
        return np.ones((1, 1))
    pts = []

    def rec(prefix, remaining, slots):
        if slots == 1:
            pts.append(prefix + [remaining])
            return
        for k in range(remaining + 1):
            rec(prefix + [k], remaining - k, slots - 1)

    rec([], resolution, n)
    return np.asarray(pts, dtype=float) / resolution
