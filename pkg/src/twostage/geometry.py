"""First-stage geometries, distance-generating functions, and prox machinery.

Two set/DGF pairings are supported: negative entropy on the unit simplex
(multiplicative prox updates, l1/l-inf norm pairing) and half squared
Euclidean norm on either set (projection prox, l2 self-dual).
"""

from dataclasses import dataclass

import numpy as np

from .numkit import InvalidInputError, project_simplex


@dataclass(frozen=True)
class Simplex:
    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise InvalidInputError("simplex dimension must be >= 1")


@dataclass(frozen=True, eq=False)
class Ball:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        if self.radius <= 0:
            raise InvalidInputError("ball radius must be positive")

    @property
    def dim(self):
        return self.center.size


class Entropy:
    """omega(x) = sum_i x_i ln x_i; strong convexity modulus 1 w.r.t. ||.||_1."""

    modulus = 1.0


class HalfSquaredEuclidean:
    """omega(x) = 0.5 ||x||_2^2; strong convexity modulus 1 w.r.t. ||.||_2."""

    modulus = 1.0


ENTROPY = Entropy()
EUCLIDEAN = HalfSquaredEuclidean()


def check_pairing(dgf, set_):
    if isinstance(dgf, Entropy) and not isinstance(set_, Simplex):
        raise InvalidInputError("entropy pairs only with the simplex")
    if not isinstance(set_, (Simplex, Ball)):
        raise InvalidInputError("unknown first-stage set %r" % (set_,))


def contains(set_, x, tol=1e-10):
    x = np.asarray(x, dtype=float)
    if isinstance(set_, Simplex):
        return bool(np.all(x >= -tol) and abs(x.sum() - 1.0) <= tol)
    return bool(np.linalg.norm(x - set_.center) <= set_.radius + tol)


def diameter(set_):
    if isinstance(set_, Simplex):
        return float(np.sqrt(2.0)) if set_.dim > 1 else 0.0
    return 2.0 * set_.radius


def sample_point(set_, rng):
    """Draw a point from the set (uniform simplex / uniform ball)."""
    if isinstance(set_, Simplex):
        return rng.simplex_point(set_.dim)
    return rng.ball_point(set_.center, set_.radius)


def omega_center(dgf, set_):
    """Starting point of mirror descent: simplex barycenter or ball center."""
    check_pairing(dgf, set_)
    if isinstance(set_, Simplex):
        return np.full(set_.dim, 1.0 / set_.dim)
    return set_.center.copy()


def omega_radius(dgf, set_):
    """D = sqrt(2 [max omega - min omega]) over the set."""
    check_pairing(dgf, set_)
    if isinstance(dgf, Entropy):
        if set_.dim == 1:
            return 0.0
        # max omega = 0 at a vertex, min omega = -ln n at the barycenter
        return float(np.sqrt(2.0 * np.log(set_.dim)))
    if isinstance(set_, Simplex):
        if set_.dim == 1:
            return 0.0
        return float(np.sqrt(1.0 - 1.0 / set_.dim))
    nc = np.linalg.norm(set_.center)
    hi = (nc + set_.radius) ** 2
    lo = max(nc - set_.radius, 0.0) ** 2
    return float(np.sqrt(hi - lo))


def prox_step(dgf, set_, x, zeta):
    """Proximal mapping argmin_{y in set} omega(y) + <y, zeta - omega'(x)>.

    Entropy/simplex uses the log-sum-exp closed form with max subtraction;
    Euclidean uses projection of x - zeta onto the set.
    """
    check_pairing(dgf, set_)
    x = np.asarray(x, dtype=float)
    zeta = np.asarray(zeta, dtype=float)
    if not np.all(np.isfinite(zeta)):
        raise InvalidInputError("prox argument has non-finite entries")
    if isinstance(dgf, Entropy):
        if np.any(x <= 0):
            raise InvalidInputError("entropy prox needs a strictly positive base point")
        w = np.log(x) - zeta
        w -= w.max()
        e = np.exp(w)
        return e / e.sum()
    p = x - zeta
    if isinstance(set_, Simplex):
        return project_simplex(p)
    gap = p - set_.center
    nrm = np.linalg.norm(gap)
    if nrm <= set_.radius:
        return p
    return set_.center + (set_.radius / nrm) * gap


def entropy_prox_log(z, zeta):
    """Entropy/simplex prox in log coordinates: z' = w - ln sum exp(w).

    Same closed form as `prox_step` with z = ln x; iterating in log space
    keeps iterates representable even when components underflow in x.
    """
    w = z - zeta
    w = w - w.max()
    return w - np.log(np.exp(w).sum())


def bregman(dgf, x, y):
    """Bregman distance V_x(y) = omega(y) - omega(x) - <y - x, omega'(x)>."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if isinstance(dgf, Entropy):
        if np.any(x <= 0):
            raise InvalidInputError("entropy Bregman distance needs x > 0")
        if np.any(y < 0):
            raise InvalidInputError("entropy Bregman distance needs y >= 0")
        ylny = np.where(y > 0, y * np.log(np.maximum(y, 1e-300)), 0.0)
        return float(np.sum(ylny - y * np.log(x)) - y.sum() + x.sum())
    d = y - x
    return float(0.5 * np.dot(d, d))


def dual_grad_norm(dgf, g):
    """Norm of a gradient in the dual of the DGF's natural norm."""
    g = np.asarray(g, dtype=float)
    if isinstance(dgf, Entropy):
        return float(np.max(np.abs(g))) if g.size else 0.0
    return float(np.linalg.norm(g))
