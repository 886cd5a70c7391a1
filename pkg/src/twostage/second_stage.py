"""Second-stage problem families with certified eps-optimal solvers.

Both families share the quadratic objective

    f2(y, x) = 0.5 [x; y]^T S [x; y] + q1^T x + q2^T y,
    S = [[S1, S2], [S2^T, S3]]  positive definite,

and differ in the second-stage feasible region: the unit simplex (no
coupling constraints) or a joint ball constraint
0.5||y - y0||^2 + 0.5||x - x0||^2 - R^2/2 <= 0 that couples the stages.

Solvers return a `SecondStageSolveReport` whose `eps_certified` is a
computable duality-gap style certificate: the simplex solver's linear-gap
certificate over the simplex, or the primal-dual gap of the 1-d dual
maximization for the ball family. Certificates are exactly the quantities
the cut constructors consume, so no slack is lost between solve and cut.
"""

from dataclasses import dataclass

import numpy as np
from numba import njit

from .numkit import InvalidInputError, eigen_extremes, spectral_norm

EXACT_EPS = 1e-10  # a certificate at or below this level is treated as exact


# ---------------------------------------------------------------------------
# scenario data


class Scenario:
    """Quadratic scenario data, either rank-one structured or dense.

    Rank-one scenarios store xi2 in R^(m+n) with S = xi2 xi2^T + lam I and
    linear term (q1, q2) = (xi2[:m], xi2[m:]); every operation then runs in
    O(n). Dense scenarios store the S blocks explicitly.
    """

    def __init__(self, s1, s2, s3, q1, q2, xi2=None, lam=None):
        self.s1 = s1
        self.s2 = s2
        self.s3 = s3
        self.q1 = np.asarray(q1, dtype=float)
        self.q2 = np.asarray(q2, dtype=float)
        self.xi2 = xi2
        self.lam = lam
        self.m = self.q1.size
        self.n = self.q2.size
        self._s3_eig = None
        self._cache = {}

    # -- constructors

    @classmethod
    def rank_one(cls, xi2, lam):
        xi2 = np.asarray(xi2, dtype=float)
        if xi2.size % 2 != 0:
            raise InvalidInputError("rank-one scenario needs an even-length xi2")
        if lam <= 0:
            raise InvalidInputError("regularization lambda must be positive")
        if not np.all(np.isfinite(xi2)):
            raise InvalidInputError("xi2 has non-finite entries")
        n = xi2.size // 2
        return cls(None, None, None, xi2[:n], xi2[n:], xi2=xi2, lam=float(lam))

    @classmethod
    def dense(cls, s1, s2, s3, q1, q2):
        s1 = np.asarray(s1, dtype=float)
        s2 = np.asarray(s2, dtype=float)
        s3 = np.asarray(s3, dtype=float)
        return cls(s1, s2, s3, q1, q2)

    @property
    def is_rank_one(self):
        return self.xi2 is not None

    @property
    def u(self):
        return self.xi2[: self.m]

    @property
    def d(self):
        return self.xi2[self.m :]

    # -- block products

    def s1_mul(self, x):
        if self.is_rank_one:
            return self.u * (self.u @ x) + self.lam * x
        return self.s1 @ x

    def s2_mul(self, y):
        if self.is_rank_one:
            return self.u * (self.d @ y)
        return self.s2 @ y

    def s2t_mul(self, x):
        if self.is_rank_one:
            return self.d * (self.u @ x)
        return self.s2.T @ x

    def s3_mul(self, y):
        if self.is_rank_one:
            return self.d * (self.d @ y) + self.lam * y
        return self.s3 @ y

    # -- objective and gradients

    def f2(self, y, x):
        return float(
            0.5 * x @ self.s1_mul(x)
            + x @ self.s2_mul(y)
            + 0.5 * y @ self.s3_mul(y)
            + self.q1 @ x
            + self.q2 @ y
        )

    def grad_y(self, y, x):
        return self.s3_mul(y) + self.s2t_mul(x) + self.q2

    def grad_x(self, y, x):
        return self.s1_mul(x) + self.s2_mul(y) + self.q1

    def y_linear_term(self, x):
        """q2 + S2^T x: the y-linear part of f2 at fixed x."""
        return self.q2 + self.s2t_mul(x)

    def x_only_value(self, x):
        """0.5 x^T S1 x + q1^T x."""
        return float(0.5 * x @ self.s1_mul(x) + self.q1 @ x)

    # -- spectral quantities (cached)

    def s3_lambda_extremes(self):
        if "s3_ext" not in self._cache:
            if self.is_rank_one:
                dd = float(self.d @ self.d)
                hi = self.lam + dd
                lo = hi if self.n == 1 else self.lam
                self._cache["s3_ext"] = (lo, hi)
            else:
                self._cache["s3_ext"] = eigen_extremes(self.s3)
        return self._cache["s3_ext"]

    def s3_lambda_min(self):
        return self.s3_lambda_extremes()[0]

    def s3_lambda_max(self):
        return self.s3_lambda_extremes()[1]

    def s2_norm(self):
        if "s2_norm" not in self._cache:
            if self.is_rank_one:
                self._cache["s2_norm"] = float(
                    np.linalg.norm(self.u) * np.linalg.norm(self.d)
                )
            else:
                self._cache["s2_norm"] = spectral_norm(self.s2)
        return self._cache["s2_norm"]

    def s_lambda_min(self):
        """Smallest eigenvalue of the full block matrix S."""
        if "s_min" not in self._cache:
            if self.is_rank_one:
                self._cache["s_min"] = self.lam
            else:
                top = np.hstack([self.s1, self.s2])
                bot = np.hstack([self.s2.T, self.s3])
                self._cache["s_min"] = eigen_extremes(np.vstack([top, bot]))[0]
        return self._cache["s_min"]

    # -- shifted-S3 operations used by the ball dual

    def _s3_eigh(self):
        if self._s3_eig is None:
            w, v = np.linalg.eigh(0.5 * (self.s3 + self.s3.T))
            self._s3_eig = (w, v)
        return self._s3_eig

    def s3_shift_solve(self, v, mu):
        """(S3 + mu I)^{-1} v."""
        if self.is_rank_one:
            sig = self.lam + mu
            d = self.d
            dd = float(d @ d)
            return (v - d * ((d @ v) / (sig + dd))) / sig
        w, q = self._s3_eigh()
        return q @ ((q.T @ v) / (w + mu))

    def s3_shift_quads(self, v, mu):
        """Quadratic forms v^T (S3 + mu I)^{-k} v for k = 1, 2, 3."""
        if self.is_rank_one:
            sig = self.lam + mu
            d = self.d
            dd = float(d @ d)
            if dd == 0.0:
                vv = float(v @ v)
                return vv / sig, vv / sig**2, vv / sig**3
            par = float(d @ v) ** 2 / dd
            perp = float(v @ v) - par
            perp = max(perp, 0.0)
            top = sig + dd
            return (
                par / top + perp / sig,
                par / top**2 + perp / sig**2,
                par / top**3 + perp / sig**3,
            )
        w, q = self._s3_eigh()
        c2 = (q.T @ v) ** 2
        sh = w + mu
        return (
            float(np.sum(c2 / sh)),
            float(np.sum(c2 / sh**2)),
            float(np.sum(c2 / sh**3)),
        )

    def dense_blocks(self):
        """Materialize (S1, S2, S3) regardless of representation."""
        if not self.is_rank_one:
            return self.s1, self.s2, self.s3
        u, d, lam = self.u, self.d, self.lam
        return (
            np.outer(u, u) + lam * np.eye(self.m),
            np.outer(u, d),
            np.outer(d, d) + lam * np.eye(self.n),
        )


# ---------------------------------------------------------------------------
# stages


@dataclass(frozen=True)
class SimplexStage:
    """Second stage constrained to the unit simplex; no coupling constraints."""

    n: int
    lambda_reg: float

    def __post_init__(self):
        if self.n < 1:
            raise InvalidInputError("simplex stage needs n >= 1")
        if self.lambda_reg <= 0:
            raise InvalidInputError("lambda_reg must be positive")


@dataclass(frozen=True, eq=False)
class BallStage:
    """Second stage with the joint ball constraint coupling both stages.

    Slater is checked at construction: g1(y0, x1) < 0 must hold for every
    x1 with ||x1 - x0|| <= 1, which requires R > 1.
    """

    n: int
    x0: np.ndarray
    y0: np.ndarray
    radius: float
    lambda_reg: float

    def __post_init__(self):
        object.__setattr__(self, "x0", np.asarray(self.x0, dtype=float))
        object.__setattr__(self, "y0", np.asarray(self.y0, dtype=float))
        if self.lambda_reg <= 0:
            raise InvalidInputError("lambda_reg must be positive")
        if self.radius <= 1.0:
            raise InvalidInputError(
                "Slater fails somewhere on the unit first-stage ball: need R > 1"
            )

    def g1(self, y, x):
        dy = y - self.y0
        dx = x - self.x0
        return float(0.5 * dy @ dy + 0.5 * dx @ dx - 0.5 * self.radius**2)


@dataclass
class SecondStageSolveReport:
    """Certified eps-optimal primal/dual pair for one scenario solve."""

    x2: np.ndarray
    lam: np.ndarray
    mu: np.ndarray
    eps_certified: float
    primal_value: float
    dual_value: float
    iterations: int = 0
    scen: object = None

    @property
    def is_exact(self):
        return self.eps_certified <= EXACT_EPS


# ---------------------------------------------------------------------------
# simplex-stage solver: accelerated projected gradient with l1 certificate


@njit(cache=True)
def _proj_simplex_nb(v):
    n = v.size
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    rho = 0
    for j in range(n):
        if u[j] - (css[j] - 1.0) / (j + 1) > 0.0:
            rho = j
    tau = (css[rho] - 1.0) / (rho + 1.0)
    out = v - tau
    for i in range(n):
        if out[i] < 0.0:
            out[i] = 0.0
    return out


@njit(cache=True)
def _apg_simplex_rank1(d, lin, lam, eps, max_iter):
    """Minimize 0.5 y^T (d d^T + lam I) y + lin^T y over the simplex.

    Returns (y_best, cert_best, iterations). Accelerated projected gradient
    with the constant strong-convexity momentum; the returned iterate is the
    best seen under the linear-gap certificate <g, y> - min_i g_i, so the
    certificate is monotone in the iteration budget.
    """
    n = d.size
    y = np.full(n, 1.0 / n)
    if n == 1:
        return y, 0.0, 0
    dd = 0.0
    for i in range(n):
        dd += d[i] * d[i]
    big_l = lam + dd
    kappa = big_l / lam
    sq = np.sqrt(kappa)
    beta = (sq - 1.0) / (sq + 1.0)
    v = y.copy()
    g0 = d * (d @ y) + lam * y + lin
    gmin0 = g0[0]
    for i in range(1, n):
        if g0[i] < gmin0:
            gmin0 = g0[i]
    cert_best = g0 @ y - gmin0
    y_best = y.copy()
    it = 0
    for it in range(1, max_iter + 1):
        gv = d * (d @ v) + lam * v + lin
        y_new = _proj_simplex_nb(v - gv / big_l)
        g = d * (d @ y_new) + lam * y_new + lin
        gmin = g[0]
        for i in range(1, n):
            if g[i] < gmin:
                gmin = g[i]
        cert = g @ y_new - gmin
        if cert < cert_best:
            cert_best = cert
            y_best = y_new.copy()
        if cert_best <= eps:
            break
        v = y_new + beta * (y_new - y)
        y = y_new
    if cert_best < 0.0:
        cert_best = 0.0
    return y_best, cert_best, it


def simplex_gap_certificate(g, y):
    """max over the simplex of <g, y - z> = <g, y> - min_i g_i."""
    return float(g @ y - np.min(g))


def solve_simplex_stage(stage, x1, scen, eps, iter_cap=None):
    """Certified eps-optimal solve of the simplex-stage problem at x1.

    Accelerated projected gradient on the strongly convex objective
    (alpha = lambda_min(S3)) until the linear-gap certificate drops below
    eps, or until `iter_cap` iterations have been spent, in which case the
    achieved certificate is reported as eps_certified.
    """
    if eps <= 0:
        raise InvalidInputError("eps must be positive")
    x1 = np.asarray(x1, dtype=float)
    lin = scen.y_linear_term(x1)
    max_iter = int(iter_cap) if iter_cap is not None else _max_iters_simplex(scen, eps)
    if scen.is_rank_one:
        y, cert, used = _apg_simplex_rank1(scen.d, lin, scen.lam, eps, max_iter)
    else:
        y, cert, used = _apg_simplex_dense(scen, lin, eps, max_iter)
    value = scen.f2(y, x1)
    return SecondStageSolveReport(
        x2=y,
        lam=np.empty(0),
        mu=np.empty(0),
        eps_certified=float(cert),
        primal_value=value,
        dual_value=value - float(cert),
        iterations=used,
        scen=scen,
    )


def _max_iters_simplex(scen, eps):
    lo, hi = scen.s3_lambda_extremes()
    kappa = hi / lo
    # linear rate (1 - 1/sqrt(kappa)); generous budget with floor/ceiling
    budget = int(60 * np.sqrt(kappa) + 2000)
    return min(max(budget, 500), 400_000)


def _apg_simplex_dense(scen, lin, eps, max_iter):
    n = scen.n
    y = np.full(n, 1.0 / n)
    if n == 1:
        return y, 0.0, 0
    lo, hi = scen.s3_lambda_extremes()
    sq = np.sqrt(hi / lo)
    beta = (sq - 1.0) / (sq + 1.0)
    from .numkit import project_simplex

    v = y.copy()
    g0 = scen.s3_mul(y) + lin
    y_best, cert_best = y.copy(), simplex_gap_certificate(g0, y)
    used = 0
    for used in range(1, max_iter + 1):
        gv = scen.s3_mul(v) + lin
        y_new = project_simplex(v - gv / hi)
        g = scen.s3_mul(y_new) + lin
        cert = simplex_gap_certificate(g, y_new)
        if cert < cert_best:
            cert_best, y_best = cert, y_new
        if cert_best <= eps:
            break
        v = y_new + beta * (y_new - y)
        y = y_new
    return y_best, max(cert_best, 0.0), used


# ---------------------------------------------------------------------------
# ball-stage solver: safeguarded Newton on the closed-form 1-d dual


def ball_dual_coefficients(stage, x1, scen):
    """(a0, b0, b1) of the shifted quadratic after the z = y - y0 change.

    theta(mu) = -0.5 a0^T (S3 + mu I)^{-1} a0 + b0 + mu*b1, with
    b0 = f2(y0, x1) and b1 = g1(y0, x1) + (||y-y0|| part absent) =
    0.5(||x1 - x0||^2 - R^2).
    """
    x1 = np.asarray(x1, dtype=float)
    a0 = scen.y_linear_term(x1) + scen.s3_mul(stage.y0)
    b0 = scen.f2(stage.y0, x1)
    dx = x1 - stage.x0
    b1 = 0.5 * (dx @ dx - stage.radius**2)
    return a0, float(b0), float(b1)


def dual_function_value(stage, x1, scen, mu):
    """Closed-form dual value theta_x1(mu) for the ball stage."""
    if mu < 0:
        raise InvalidInputError("mu must be nonnegative")
    a0, b0, b1 = ball_dual_coefficients(stage, x1, scen)
    q1f, _, _ = scen.s3_shift_quads(a0, mu)
    return -0.5 * q1f + b0 + mu * b1


def second_stage_value_lower_bound(stage, scen):
    """Anchor-independent lower bound on the ball-stage optimal value.

    0.5 lambda_min(S) (||(x0; y0)|| - R)^2 - (||(x0; y0)|| + R) ||(q1; q2)||,
    with the quadratic term clamped at zero when the ball covers the origin.
    """
    z0 = np.concatenate([stage.x0, stage.y0])
    nz = np.linalg.norm(z0)
    nq = np.linalg.norm(np.concatenate([scen.q1, scen.q2]))
    lo = max(nz - stage.radius, 0.0)
    return float(0.5 * scen.s_lambda_min() * lo**2 - (nz + stage.radius) * nq)


def multiplier_bound(stage, x1, scen, lower_bound=None):
    """Upper bound (L - f(y0, x1)) / g1(y0, x1) on optimal dual multipliers."""
    x1 = np.asarray(x1, dtype=float)
    slater = stage.g1(stage.y0, x1)
    if slater >= 0:
        raise InvalidInputError("Slater point y0 is not strictly feasible at this x1")
    if lower_bound is None:
        lower_bound = second_stage_value_lower_bound(stage, scen)
    f_y0 = scen.f2(stage.y0, x1)
    return max((lower_bound - f_y0) / slater, 0.0)


def solve_ball_stage(stage, x1, scen, eps, iter_cap=None):
    """Certified eps-optimal solve of the ball-stage problem at x1.

    Maximizes the closed-form dual over [0, multiplier_bound] by Newton
    steps safeguarded by bisection, recovers the primal
    y(mu) = y0 - (S3 + mu I)^{-1} a0, restores feasibility radially toward
    y0 when needed, and stops when primal - dual <= eps. Under `iter_cap`
    the achieved gap is reported.
    """
    if eps <= 0:
        raise InvalidInputError("eps must be positive")
    x1 = np.asarray(x1, dtype=float)
    a0, b0, b1 = ball_dual_coefficients(stage, x1, scen)
    rfeas_sq = -2.0 * b1
    if rfeas_sq <= 0:
        raise InvalidInputError("x1 leaves no feasible second-stage ball")
    rfeas = np.sqrt(rfeas_sq)

    def theta_terms(mu):
        q1f, q2f, q3f = scen.s3_shift_quads(a0, mu)
        val = -0.5 * q1f + b0 + mu * b1
        der = 0.5 * q2f + b1
        der2 = -q3f
        return val, der, der2

    a0_norm = np.linalg.norm(a0)
    if a0_norm <= 1e-14 * (1.0 + abs(b0)):
        value = scen.f2(stage.y0, x1)
        return SecondStageSolveReport(
            x2=stage.y0.copy(),
            lam=np.empty(0),
            mu=np.zeros(1),
            eps_certified=0.0,
            primal_value=value,
            dual_value=value,
            iterations=0,
            scen=scen,
        )

    max_iter = int(iter_cap) if iter_cap is not None else 200

    feas_tol = 1e-12 * (1.0 + rfeas_sq)

    def recover(mu, theta_val):
        y = stage.y0 - scen.s3_shift_solve(a0, mu)
        step = y - stage.y0
        nrm = np.linalg.norm(step)
        # restore only genuine violations; whisker-level ones stay within
        # the report's feasibility contract and keep grad_y L at zero
        restored = 0.5 * (nrm**2 - rfeas_sq) > feas_tol
        if restored:
            y = stage.y0 + (rfeas / nrm) * step
        primal = scen.f2(y, x1)
        return y, primal, max(primal - theta_val, 0.0), restored

    val0, der0, _ = theta_terms(0.0)
    if der0 <= 0.0:
        # unconstrained minimizer already feasible
        y, primal, gap, _ = recover(0.0, val0)
        return SecondStageSolveReport(
            x2=y,
            lam=np.empty(0),
            mu=np.zeros(1),
            eps_certified=gap,
            primal_value=primal,
            dual_value=val0,
            iterations=0,
            scen=scen,
        )

    hi = multiplier_bound(stage, x1, scen)
    while theta_terms(hi)[1] > 0.0:  # numerically defensive; should not trigger
        hi *= 2.0
        if hi > 1e300:
            raise InvalidInputError("dual derivative never changes sign")
    lo = 0.0
    mu = min(hi, max(1e-3 * hi, 1e-12))

    best = None
    best_clean = None  # best candidate whose primal needed no restoration
    used = 0

    def consider(mu, val):
        nonlocal best, best_clean
        y, primal, gap, restored = recover(mu, val)
        cand = (gap, mu, y, primal, val)
        if best is None or gap < best[0]:
            best = cand
        if not restored and (best_clean is None or gap < best_clean[0]):
            best_clean = cand

    # Newton approaches the root of theta' from the left (theta' is convex
    # decreasing), which is the side needing radial restoration. Uncapped
    # solves therefore iterate until an unrestored candidate meets the
    # tolerance (the crossing lands exponentially close to the root), which
    # makes downstream Lagrangian-gap certificates exact; capped solves stop
    # on the plain gap.
    uncapped = iter_cap is None
    for used in range(1, max_iter + 1):
        val, der, der2 = theta_terms(mu)
        consider(mu, val)
        if uncapped:
            if best_clean is not None and best_clean[0] <= eps:
                break
        elif best[0] <= eps:
            break
        if der > 0.0:
            lo = mu
        else:
            hi = mu
        step = der / der2 if der2 < 0.0 else 0.0
        nxt = mu - step
        if not (lo < nxt < hi) or step == 0.0:
            nxt = 0.5 * (lo + hi)
        if abs(nxt - mu) <= 1e-18 * (1.0 + mu):
            consider(nxt, theta_terms(nxt)[0])
            break
        mu = nxt

    # prefer the unrestored candidate whenever it also meets the tolerance
    if best_clean is not None and (best_clean[0] <= eps or best_clean is best):
        best = best_clean
    gap, mu, y, primal, dual = best
    return SecondStageSolveReport(
        x2=y,
        lam=np.empty(0),
        mu=np.array([mu]),
        eps_certified=gap,
        primal_value=primal,
        dual_value=dual,
        iterations=used,
        scen=scen,
    )


# ---------------------------------------------------------------------------
# dispatch, oracle, batch oracles


def solve_stage(stage, x1, scen, eps, iter_cap=None):
    if isinstance(stage, SimplexStage):
        return solve_simplex_stage(stage, x1, scen, eps, iter_cap)
    if isinstance(stage, BallStage):
        return solve_ball_stage(stage, x1, scen, eps, iter_cap)
    raise InvalidInputError("unknown stage %r" % (stage,))


def oracle_solve(stage, x1, scen):
    """High-accuracy reference solve (eps = 1e-12, no iteration cap)."""
    return solve_stage(stage, x1, scen, eps=1e-12, iter_cap=None)


def oracle_values(stage, anchors, scen, tol=1e-12):
    """Second-stage optimal values at many anchors of one scenario (batched)."""
    anchors = np.atleast_2d(np.asarray(anchors, dtype=float))
    if isinstance(stage, SimplexStage):
        return _batch_simplex_values(anchors, scen, tol)
    return _batch_ball_values(stage, anchors, scen, tol)


def _batch_simplex_values(anchors, scen, tol):
    m = anchors.shape[0]
    lin = np.empty((m, scen.n))
    for i in range(m):
        lin[i] = scen.y_linear_term(anchors[i])
    ys, _ = batch_simplex_argmin(scen, lin, tol)
    vals = np.empty(m)
    for i in range(m):
        vals[i] = scen.f2(ys[i], anchors[i])
    return vals


def batch_simplex_argmin(scen, lin, tol, max_iter=None, warm=None):
    """Row-wise minimizers of 0.5 y S3 y + lin_i y over the simplex.

    One scenario, many linear terms; vectorized accelerated projected
    gradient. Returns (Y, certs).
    """
    from .numkit import project_simplex_rows

    m, n = lin.shape
    if n == 1:
        return np.ones((m, 1)), np.zeros(m)
    lo, hi = scen.s3_lambda_extremes()
    sq = np.sqrt(hi / lo)
    beta = (sq - 1.0) / (sq + 1.0)
    if max_iter is None:
        max_iter = min(int(80 * sq + 4000), 200_000)
    y = np.full((m, n), 1.0 / n) if warm is None else warm.copy()
    v = y.copy()
    if scen.is_rank_one:
        d = scen.d
        lam = scen.lam

        def gmul(z):
            return np.outer(z @ d, d) + lam * z
    else:
        s3 = scen.s3

        def gmul(z):
            return z @ s3

    best_y = y.copy()
    best_cert = np.full(m, np.inf)
    for _ in range(max_iter):
        gv = gmul(v) + lin
        y_new = project_simplex_rows(v - gv / hi)
        g = gmul(y_new) + lin
        cert = np.einsum("ij,ij->i", g, y_new) - g.min(axis=1)
        better = cert < best_cert
        if np.any(better):
            best_cert[better] = cert[better]
            best_y[better] = y_new[better]
        if np.all(best_cert <= tol):
            break
        v = y_new + beta * (y_new - y)
        y = y_new
    return best_y, np.maximum(best_cert, 0.0)


def _batch_ball_values(stage, anchors, scen, tol):
    m = anchors.shape[0]
    vals = np.empty(m)
    for i in range(m):
        rep = solve_ball_stage(stage, anchors[i], scen, eps=max(tol, 1e-12))
        vals[i] = rep.primal_value
    return vals


# ---------------------------------------------------------------------------
# stacked rank-one scenario batches (SAA, L-shaped, Monte-Carlo sweeps)


class RankOneBatch:
    """K rank-one scenarios stacked row-wise for vectorized solves.

    Stores U = xi2[:, :m] and D = xi2[:, m:] with one shared regularization
    lam; the per-scenario quadratic is S = xi2 xi2^T + lam I and the linear
    term is xi2 itself, matching `Scenario.rank_one`.
    """

    def __init__(self, xi2s, lam):
        xi2s = np.asarray(xi2s, dtype=float)
        if xi2s.ndim != 2 or xi2s.shape[1] % 2 != 0:
            raise InvalidInputError("need a (K, 2n) array of scenario vectors")
        n = xi2s.shape[1] // 2
        self.u = xi2s[:, :n].copy()
        self.d = xi2s[:, n:].copy()
        self.lam = float(lam)
        self.k, self.n = self.u.shape
        self.dd = np.einsum("ij,ij->i", self.d, self.d)

    def scenario(self, i):
        return Scenario.rank_one(np.concatenate([self.u[i], self.d[i]]), self.lam)

    def grad_x_rows(self, ys, x1, mus=None, x0=None):
        """Rows of grad_x f2 (+ mu (x1 - x0) for the ball stage)."""
        coef = self.u @ x1 + 1.0 + np.einsum("ij,ij->i", self.d, ys)
        g = self.lam * x1[None, :] + coef[:, None] * self.u
        if mus is not None:
            g = g + mus[:, None] * (x1 - x0)[None, :]
        return g

    # -- simplex stage

    def solve_simplex(self, x1, tol, max_iter=None, warm=None):
        """Row-wise certified solves over the simplex at one x1.

        Returns (Y, values, certs); supports warm starts for repeated calls
        at nearby x1 (SAA outer iterations).
        """
        k, n = self.k, self.n
        if n == 1:
            y = np.ones((k, 1))
            vals = self._values(y, x1)
            return y, vals, np.zeros(k)
        # q2 + S2^T x1 with q2 = d and S2^T x1 = d (u @ x1)
        lin = (self.u @ x1 + 1.0)[:, None] * self.d
        big_l = self.lam + self.dd
        sq = np.sqrt(big_l / self.lam)
        beta = ((sq - 1.0) / (sq + 1.0))[:, None]
        if max_iter is None:
            max_iter = min(int(80 * sq.max() + 4000), 200_000)
        from .numkit import project_simplex_rows

        y = np.full((k, n), 1.0 / n) if warm is None else warm.copy()
        v = y.copy()
        inv_l = (1.0 / big_l)[:, None]
        d_act, lam = self.d, self.lam

        def grad(z, d_rows, lin_rows):
            return (
                d_rows * np.einsum("ij,ij->i", d_rows, z)[:, None]
                + lam * z
                + lin_rows
            )

        best_y = y.copy()
        best_cert = np.full(k, np.inf)
        # rows whose certificate reaches tol are frozen and dropped, so the
        # loop cost tracks the unconverged tail only
        idx = np.arange(k)
        lin_act, beta_act, invl_act = lin, beta, inv_l
        g = grad(y, d_act, lin_act)
        cert = np.einsum("ij,ij->i", g, y) - g.min(axis=1)
        best_cert[idx] = cert
        for _ in range(max_iter):
            live = cert > tol
            if not live.all():
                done = ~live
                frozen = idx[done]
                best_y[frozen] = y[done]
                best_cert[frozen] = cert[done]
                if not live.any():
                    idx = idx[live]
                    break
                idx = idx[live]
                y, v, cert = y[live], v[live], cert[live]
                d_act, lin_act = d_act[live], lin_act[live]
                beta_act, invl_act = beta_act[live], invl_act[live]
            y_new = project_simplex_rows(v - grad(v, d_act, lin_act) * invl_act)
            g = grad(y_new, d_act, lin_act)
            cert_new = np.einsum("ij,ij->i", g, y_new) - g.min(axis=1)
            v = y_new + beta_act * (y_new - y)
            y = y_new
            cert = cert_new
        if idx.size:
            # unconverged leftovers: keep their best-so-far
            better = cert < best_cert[idx]
            best_y[idx[better]] = y[better]
            best_cert[idx[better]] = cert[better]
        vals = self._values(best_y, x1)
        return best_y, vals, np.maximum(best_cert, 0.0)

    def _values(self, ys, x1):
        sx = self.u @ x1 + np.einsum("ij,ij->i", self.d, ys)
        nrm = x1 @ x1 + np.einsum("ij,ij->i", ys, ys)
        lin = self.u @ x1 + np.einsum("ij,ij->i", self.d, ys)
        return 0.5 * sx**2 + 0.5 * self.lam * nrm + lin

    # -- ball stage

    def solve_ball(self, stage, x1, tol, max_iter=80):
        """Row-wise certified ball-stage solves at one x1 (vectorized Newton).

        Returns (Y, values, gaps, mus).
        """
        k, n = self.k, self.n
        x1 = np.asarray(x1, dtype=float)
        dx = x1 - stage.x0
        b1 = 0.5 * (dx @ dx - stage.radius**2)
        rfeas = np.sqrt(-2.0 * b1)
        coef = self.u @ x1 + 1.0 + self.d @ stage.y0  # a0 = coef * d + lam * y0
        a0 = coef[:, None] * self.d + self.lam * stage.y0[None, :]
        b0 = self._values(np.tile(stage.y0, (k, 1)), x1)
        da = np.einsum("ij,ij->i", self.d, a0)
        aa = np.einsum("ij,ij->i", a0, a0)
        par = np.where(self.dd > 0, da**2 / np.maximum(self.dd, 1e-300), 0.0)
        perp = np.maximum(aa - par, 0.0)

        def theta_parts(mu):
            sig = self.lam + mu
            top = sig + self.dd
            q1f = par / top + perp / sig
            q2f = par / top**2 + perp / sig**2
            q3f = par / top**3 + perp / sig**3
            val = -0.5 * q1f + b0 + mu * b1
            return val, 0.5 * q2f + b1, -q3f

        # bracket: 0 and a per-row upper bound via the shared lower bound
        nz0 = np.linalg.norm(np.concatenate([stage.x0, stage.y0]))
        s_min = self.lam  # lambda_min(xi xi^T + lam I)
        xi_norms = np.sqrt(np.einsum("ij,ij->i", self.u, self.u) + self.dd)
        lower = 0.5 * s_min * max(nz0 - stage.radius, 0.0) ** 2 - (nz0 + stage.radius) * xi_norms
        slater = b1  # g1(y0, x1) = b1 < 0
        ubar = np.maximum((lower - b0) / slater, 0.0)
        lo = np.zeros(k)
        hi = np.maximum(ubar, 1e-12)
        val0, der0, _ = theta_parts(np.zeros(k))
        active = der0 > 0.0
        mu = np.where(active, np.maximum(1e-3 * hi, 1e-12), 0.0)
        for _ in range(max_iter):
            val, der, der2 = theta_parts(mu)
            pos = der > 0.0
            lo = np.where(active & pos, mu, lo)
            hi = np.where(active & ~pos, mu, hi)
            step = np.where(der2 < 0.0, der / np.where(der2 < 0.0, der2, -1.0), 0.0)
            nxt = mu - step
            bad = (nxt <= lo) | (nxt >= hi) | (step == 0.0)
            nxt = np.where(bad, 0.5 * (lo + hi), nxt)
            mu = np.where(active, nxt, mu)
            if np.all(~active | (hi - lo <= 1e-14 * (1.0 + hi))):
                break
        val, der, _ = theta_parts(mu)
        # primal recovery with radial restoration
        sig = self.lam + mu
        ssol = (a0 - self.d * (da / (sig + self.dd))[:, None]) / sig[:, None]
        y = stage.y0[None, :] - ssol
        stepv = y - stage.y0[None, :]
        nrm = np.sqrt(np.einsum("ij,ij->i", stepv, stepv))
        scale = np.where(nrm > rfeas, rfeas / np.maximum(nrm, 1e-300), 1.0)
        y = stage.y0[None, :] + scale[:, None] * stepv
        vals = self._values(y, x1)
        gaps = np.maximum(vals - val, 0.0)
        return y, vals, gaps, mu
