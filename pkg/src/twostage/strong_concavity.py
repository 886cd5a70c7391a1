"""Strong-concavity constants for dual functions, plus a numeric verifier.

Three certified constants:

* linear inequality constraints, gradient-Lipschitz objective:
  alpha_D = lambda_min(A A^T) / L on all of R^q;
* quadratic objective + one quadratic constraint (both positive definite):
  alpha_D = a~^T (Q1^{-1/2} Q0 Q1^{-1/2} + mu_bar I)^{-3} a~ on [0, mu_bar],
  a~ = Q1^{-1/2} (a0 - Q0 Q1^{-1} a1);
* local constant near an optimal dual pair:
  alpha lambda_underbar / (L_f + L_g U)^2 (caller supplies the
  neighborhood quantities; they are not computable from instance data).

``verify_concavity`` checks a claimed constant for a 1-d dual function on
an interval via the midpoint inequality and central finite differences.
"""

from dataclasses import dataclass

import numpy as np

from .numkit import InvalidInputError, RngStream, eigen_extremes, sym


class DependentRowsError(ValueError):
    """Rows of the constraint matrix are numerically dependent."""


class DegenerateInstanceError(ValueError):
    """The quad-quad constant degenerates (shifted linear term is zero)."""


@dataclass(frozen=True)
class Region:
    kind: str  # "reals" | "interval" | "neighborhood"
    interval: tuple = None


@dataclass(frozen=True)
class ConcavityCertificate:
    alpha_d: float
    region: Region
    formula: str

    def __post_init__(self):
        if not self.alpha_d > 0:
            raise InvalidInputError("certificate needs alpha_d > 0")


def linear_constraints_constant(a, lipschitz):
    """alpha_D = lambda_min(A A^T)/L for linearly constrained problems."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if lipschitz <= 0:
        raise InvalidInputError("gradient Lipschitz constant must be positive")
    gram = a @ a.T
    lmin, _ = eigen_extremes(gram)
    if lmin <= 1e-12:
        raise DependentRowsError("rows of A are numerically dependent")
    return ConcavityCertificate(
        alpha_d=lmin / lipschitz,
        region=Region("reals"),
        formula="LinearConstraints",
    )


def quad_objective_constant(a, q0):
    """Convenience wrapper: L = lambda_max(Q0) for a quadratic objective."""
    _, lmax = eigen_extremes(q0)
    if lmax <= 0:
        raise InvalidInputError("Q0 must be nonnull positive semidefinite")
    cert = linear_constraints_constant(a, lmax)
    return ConcavityCertificate(cert.alpha_d, cert.region, "QuadObjective")


def quad_quad_constant(q0, q1, a0, a1, lower_bound, f_x0, g1_x0):
    """Strong-concavity constant on [0, mu_bar] for one quadratic constraint.

    mu_bar = (lower_bound - f_x0)/g1_x0 bounds the optimal multipliers
    (g1_x0 < 0 at the Slater point, lower_bound <= optimal value <= f_x0).
    """
    q0 = sym(q0)
    q1 = sym(q1)
    a0 = np.asarray(a0, dtype=float)
    a1 = np.asarray(a1, dtype=float)
    if g1_x0 >= 0:
        raise InvalidInputError("need a Slater point: g1(x0) < 0")
    mu_bar = (lower_bound - f_x0) / g1_x0
    if mu_bar < 0:
        raise InvalidInputError("lower_bound exceeds f(x0); no valid interval")
    w1, v1 = np.linalg.eigh(q1)
    if w1[0] <= 0:
        raise InvalidInputError("Q1 must be positive definite")
    a_bar = a0 - q0 @ (v1 @ ((v1.T @ a1) / w1))
    if np.linalg.norm(a_bar) <= 1e-10 * (1.0 + np.linalg.norm(a0)):
        raise DegenerateInstanceError(
            "a0 - Q0 Q1^{-1} a1 vanishes; the constant degenerates to zero"
        )
    q1_isqrt = v1 @ np.diag(1.0 / np.sqrt(w1)) @ v1.T
    a_tilde = q1_isqrt @ a_bar
    mat = sym(q1_isqrt @ q0 @ q1_isqrt)
    wm, vm = np.linalg.eigh(mat)
    coords = vm.T @ a_tilde
    alpha_d = float(np.sum(coords**2 / (wm + mu_bar) ** 3))
    return ConcavityCertificate(
        alpha_d=alpha_d,
        region=Region("interval", (0.0, float(mu_bar))),
        formula="QuadQuad",
    )


def local_theorem_constant(alpha, l_f, l_g, u_eps, lambda_underbar):
    """Local constant alpha lambda_underbar / (L_f + L_g U_eps)^2."""
    if alpha <= 0 or l_f <= 0 or u_eps <= 0 or lambda_underbar <= 0 or l_g < 0:
        raise InvalidInputError("need alpha, L_f, U_eps, lambda_underbar > 0, L_g >= 0")
    return ConcavityCertificate(
        alpha_d=alpha * lambda_underbar / (l_f + l_g * u_eps) ** 2,
        region=Region("neighborhood"),
        formula="LocalTheorem",
    )


def ball_stage_concavity(stage, x1, scen, lower_bound=None):
    """Quad-quad certificate wired to a ball-stage problem at x1."""
    from .second_stage import ball_dual_coefficients, second_stage_value_lower_bound

    x1 = np.asarray(x1, dtype=float)
    a0, b0, b1 = ball_dual_coefficients(stage, x1, scen)
    if lower_bound is None:
        lower_bound = second_stage_value_lower_bound(stage, scen)
    _, _, s3 = scen.dense_blocks()
    n = s3.shape[0]
    return quad_quad_constant(
        q0=s3, q1=np.eye(n), a0=a0, a1=np.zeros(n),
        lower_bound=lower_bound, f_x0=b0, g1_x0=b1,
    )


@dataclass
class VerifyReport:
    passed: bool
    worst_midpoint_slack: float  # most negative slack of the midpoint test
    worst_curvature_slack: float  # most negative slack of -fd2 - alpha_d
    n_checks: int


def verify_concavity(theta, interval, alpha_d, n_checks=50, rng=None):
    """Numerically test strong concavity of a 1-d function on an interval.

    Checks (i) theta(t m1 + (1-t) m2) >= t theta(m1) + (1-t) theta(m2)
    + alpha_d t (1-t)/2 (m2-m1)^2 - tol on random triples and (ii) central
    second differences <= -alpha_d + tol, with tol = 1e-6 (1 + |theta|).
    """
    lo, hi = float(interval[0]), float(interval[1])
    if hi <= lo:
        raise InvalidInputError("empty verification interval")
    if rng is None:
        rng = RngStream(0)
    width = hi - lo
    worst_mid = np.inf
    for _ in range(n_checks):
        m1 = lo + width * rng.gen.random()
        m2 = lo + width * rng.gen.random()
        t = rng.gen.random()
        mid = t * m1 + (1.0 - t) * m2
        f_mid = theta(mid)
        f1, f2 = theta(m1), theta(m2)
        tol = 1e-6 * (1.0 + abs(f_mid))
        slack = (
            f_mid
            - (t * f1 + (1.0 - t) * f2 + 0.5 * alpha_d * t * (1.0 - t) * (m2 - m1) ** 2)
            + tol
        )
        worst_mid = min(worst_mid, slack)
    h = max(1e-4, min(1e-3, width / 100.0))
    worst_curv = np.inf
    if hi - lo > 2 * h:
        for _ in range(n_checks):
            m = lo + h + (width - 2 * h) * rng.gen.random()
            f0 = theta(m)
            fd2 = (theta(m + h) - 2.0 * f0 + theta(m - h)) / h**2
            tol = 1e-6 * (1.0 + abs(f0))
            worst_curv = min(worst_curv, -fd2 - alpha_d + tol)
    passed = worst_mid >= 0.0 and (not np.isfinite(worst_curv) or worst_curv >= 0.0)
    return VerifyReport(
        passed=bool(passed),
        worst_midpoint_slack=float(worst_mid),
        worst_curvature_slack=float(worst_curv),
        n_checks=n_checks,
    )
