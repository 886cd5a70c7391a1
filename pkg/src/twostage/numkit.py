"""Dense symmetric linear algebra and seeded sampling used by every other module.

Everything here is deliberately small: extreme eigenvalues, an SPD solve,
spectral norms, Euclidean projection onto the unit simplex, and a
counter-based random stream so experiments replay exactly from one seed.
"""

import numpy as np
import scipy.linalg


class InvalidInputError(ValueError):
    """Raised on non-finite or structurally invalid numeric input."""


class NotPositiveDefiniteError(ValueError):
    """Raised when a matrix assumed SPD fails its Cholesky factorization."""


def _as_matrix(m):
    a = np.asarray(m, dtype=float)
    if a.ndim != 2:
        raise InvalidInputError("expected a 2-d array, got ndim=%d" % a.ndim)
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("matrix has non-finite entries")
    return a


def sym(m):
    """Return the symmetric part (m + m.T)/2, validating finiteness."""
    a = _as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise InvalidInputError("matrix is not square: %s" % (a.shape,))
    return 0.5 * (a + a.T)


def eigen_extremes(m):
    """Smallest and largest eigenvalue of a symmetric matrix.

    Parameters
    ----------
    m : (n, n) array_like
        Symmetric matrix (symmetrized defensively before factorization).

    Returns
    -------
    (lambda_min, lambda_max) : pair of floats
    """
    a = sym(m)
    w = np.linalg.eigvalsh(a)
    return float(w[0]), float(w[-1])


def spd_solve(m, rhs):
    """Solve m @ y = rhs for symmetric positive definite m via Cholesky.

    Raises
    ------
    NotPositiveDefiniteError
        If the Cholesky factorization hits a non-positive pivot.
    """
    a = sym(m)
    b = np.asarray(rhs, dtype=float)
    if not np.all(np.isfinite(b)):
        raise InvalidInputError("right-hand side has non-finite entries")
    try:
        low = np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(str(exc)) from exc
    z = scipy.linalg.solve_triangular(low, b, lower=True)
    return scipy.linalg.solve_triangular(low.T, z, lower=False)


def spectral_norm(a):
    """Largest singular value, computed as sqrt(lambda_max(a.T @ a))."""
    m = _as_matrix(np.atleast_2d(a))
    gram = m.T @ m
    _, lmax = eigen_extremes(gram)
    return float(np.sqrt(max(lmax, 0.0)))


def project_simplex(v):
    """Euclidean projection of v onto {y : y >= 0, sum(y) = 1}.

    Sort-and-threshold: find the largest support whose shifted entries stay
    positive, then clip. O(n log n).
    """
    x = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("vector has non-finite entries")
    u = np.sort(x)[::-1]
    css = np.cumsum(u)
    idx = np.arange(1, x.size + 1)
    rho = np.nonzero(u - (css - 1.0) / idx > 0)[0][-1]
    tau = (css[rho] - 1.0) / (rho + 1.0)
    return np.maximum(x - tau, 0.0)


def project_simplex_rows(v):
    """Row-wise simplex projection of a (m, n) array."""
    x = np.asarray(v, dtype=float)
    u = -np.sort(-x, axis=1)
    css = np.cumsum(u, axis=1)
    idx = np.arange(1, x.shape[1] + 1)
    mask = u - (css - 1.0) / idx > 0
    rho = mask.shape[1] - 1 - np.argmax(mask[:, ::-1], axis=1)
    tau = (css[np.arange(x.shape[0]), rho] - 1.0) / (rho + 1.0)
    return np.maximum(x - tau[:, None], 0.0)


class RngStream:
    """Deterministic counter-based random stream (Philox under the hood).

    Identical (seed, stream) pairs reproduce identical draws across runs.
    Derived worker streams come from `substream`, which folds a stream id
    into the second word of the Philox key, so parallel workers never share
    state with the parent.
    """

    def __init__(self, seed, stream=0):
        self.seed = int(seed)
        self.stream = int(stream)
        key = np.array([self.seed, self.stream], dtype=np.uint64)
        self.gen = np.random.Generator(np.random.Philox(key=key))

    def substream(self, stream_id):
        return RngStream(self.seed, stream=self.stream * 1_000_003 + 1 + int(stream_id))

    def uniform(self, low, high, size=None):
        return self.gen.uniform(low, high, size=size)

    def normal(self, size=None):
        return self.gen.standard_normal(size=size)

    def simplex_point(self, n):
        """Uniform draw from the unit simplex (normalized exponentials)."""
        e = self.gen.standard_exponential(n)
        return e / e.sum()

    def ball_point(self, center, radius):
        """Uniform draw from a Euclidean ball."""
        c = np.asarray(center, dtype=float)
        g = self.gen.standard_normal(c.size)
        g /= np.linalg.norm(g)
        r = radius * self.gen.random() ** (1.0 / c.size)
        return c + r * g


def gaussian_vector(rng, means, stds):
    """Independent normal draws with the given componentwise means/stds."""
    mu = np.asarray(means, dtype=float)
    sd = np.asarray(stds, dtype=float)
    if mu.shape != sd.shape:
        raise InvalidInputError("means and stds must have matching shapes")
    if np.any(sd <= 0):
        raise InvalidInputError("standard deviations must be positive")
    return mu + sd * rng.normal(size=mu.shape)
