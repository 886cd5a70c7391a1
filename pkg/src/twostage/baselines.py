"""Reference methods: a dense LP solver, sample-average approximation, and
the single-cut L-shaped (Benders) method on a fixed scenario sample.

Both baselines consume the same second-stage machinery as the mirror
descent engine: SAA differentiates the sample mean of the recourse through
exact subproblem solves (the exact-cut slope), the L-shaped master stacks
aggregated exact cuts on the expected recourse and is solved with the
two-phase primal simplex method below.
"""

from dataclasses import dataclass

import numpy as np

from .geometry import Simplex
from .numkit import InvalidInputError, project_simplex
from .second_stage import SimplexStage

LP_TOL = 1e-9


class LpStallError(RuntimeError):
    """The simplex method failed to make progress (numerical stall)."""


@dataclass
class LpResult:
    x: np.ndarray
    value: float
    status: str  # "optimal" | "infeasible" | "unbounded"


def dense_lp_solve(costs, a_ub=None, b_ub=None, a_eq=None, b_eq=None, bounds=None):
    """Minimize costs @ x subject to a_ub x <= b_ub, a_eq x = b_eq, bounds.

    Two-phase primal simplex on the standard-form tableau with Bland's rule
    (anti-cycling). Dense data only; intended for small masters. `bounds`
    is a list of (lo, hi) pairs, None meaning unbounded on that side;
    default is x >= 0.
    """
    c = np.asarray(costs, dtype=float)
    n = c.size
    if bounds is None:
        bounds = [(0.0, None)] * n
    if len(bounds) != n:
        raise InvalidInputError("bounds length must match costs")

    rows_ub = [] if a_ub is None else [np.asarray(r, float) for r in np.atleast_2d(a_ub)]
    rhs_ub = [] if b_ub is None else list(np.atleast_1d(np.asarray(b_ub, float)))
    rows_eq = [] if a_eq is None else [np.asarray(r, float) for r in np.atleast_2d(a_eq)]
    rhs_eq = [] if b_eq is None else list(np.atleast_1d(np.asarray(b_eq, float)))
    if len(rows_ub) != len(rhs_ub) or len(rows_eq) != len(rhs_eq):
        raise InvalidInputError("constraint matrix/rhs size mismatch")

    # shift finite lower bounds to zero, split free variables, turn finite
    # upper bounds into extra <= rows
    shift = np.zeros(n)
    col_map = []  # (kind, column index/indices) per original variable
    ncols = 0
    extra_ub = []
    for j, (lo, hi) in enumerate(bounds):
        if lo is not None:
            shift[j] = lo
            col_map.append(("pos", ncols))
            ncols += 1
            if hi is not None:
                row = np.zeros(n)
                row[j] = 1.0
                extra_ub.append((row, hi))
        elif hi is not None:
            # x <= hi with no lower bound: substitute x = hi - z, z >= 0
            shift[j] = hi
            col_map.append(("neg", ncols))
            ncols += 1
        else:
            col_map.append(("free", (ncols, ncols + 1)))
            ncols += 2

    def expand(row):
        out = np.zeros(ncols)
        for j in range(n):
            kind, idx = col_map[j]
            if kind == "pos":
                out[idx] = row[j]
            elif kind == "neg":
                out[idx] = -row[j]
            else:
                out[idx[0]] = row[j]
                out[idx[1]] = -row[j]
        return out

    all_rows, all_rhs, senses = [], [], []
    for row, rhs in zip(rows_ub, rhs_ub):
        all_rows.append(row)
        all_rhs.append(rhs - row @ shift)
        senses.append("<")
    for row, rhs in extra_ub:
        all_rows.append(row)
        all_rhs.append(rhs - row @ shift)
        senses.append("<")
    for row, rhs in zip(rows_eq, rhs_eq):
        all_rows.append(row)
        all_rhs.append(rhs - row @ shift)
        senses.append("=")

    m = len(all_rows)
    n_slack = sum(1 for s in senses if s == "<")
    width = ncols + n_slack + m  # structural + slack + artificial
    tab = np.zeros((m, width))
    rhsv = np.zeros(m)
    basis = np.zeros(m, dtype=int)
    slack_at = 0
    for i, (row, rhs, sense) in enumerate(zip(all_rows, all_rhs, senses)):
        erow = expand(row)
        if rhs < 0:
            erow, rhs = -erow, -rhs
            sense = ">" if sense == "<" else sense
        tab[i, :ncols] = erow
        rhsv[i] = rhs
        if sense == "<":
            tab[i, ncols + slack_at] = 1.0
            basis[i] = ncols + slack_at
            slack_at += 1
        elif sense == ">":
            tab[i, ncols + slack_at] = -1.0
            slack_at += 1
            tab[i, ncols + n_slack + i] = 1.0
            basis[i] = ncols + n_slack + i
        else:
            tab[i, ncols + n_slack + i] = 1.0
            basis[i] = ncols + n_slack + i

    art_cols = np.arange(ncols + n_slack, width)
    art_needed = [i for i in range(m) if basis[i] >= ncols + n_slack]

    def pivot(tab, rhsv, basis, obj, objval, limit_cols):
        guard = 0
        max_pivots = 50 * (tab.shape[0] + limit_cols) + 1000
        while True:
            guard += 1
            if guard > max_pivots:
                raise LpStallError(
                    "simplex stalled after %d pivots (condition suspect)" % guard
                )
            enter = -1
            for j in range(limit_cols):  # Bland: lowest eligible index
                if obj[j] < -LP_TOL:
                    enter = j
                    break
            if enter < 0:
                return objval
            ratios = []
            for i in range(tab.shape[0]):
                if tab[i, enter] > LP_TOL:
                    ratios.append((rhsv[i] / tab[i, enter], basis[i], i))
            if not ratios:
                return None  # unbounded
            _, _, leave = min(ratios)
            piv = tab[leave, enter]
            tab[leave] /= piv
            rhsv[leave] /= piv
            for i in range(tab.shape[0]):
                if i != leave and tab[i, enter] != 0.0:
                    f = tab[i, enter]
                    tab[i] -= f * tab[leave]
                    rhsv[i] -= f * rhsv[leave]
            if obj[enter] != 0.0:
                f = obj[enter]
                obj -= f * tab[leave]
                objval -= f * rhsv[leave]
            basis[leave] = enter

    if art_needed:
        obj = np.zeros(width)
        obj[ncols + n_slack :] = 1.0  # phase-1 cost: sum of artificials
        objval = 0.0
        for i in art_needed:
            obj -= tab[i]
            objval -= rhsv[i]
        out = pivot(tab, rhsv, basis, obj, objval, width)
        if out is None or -out > 1e-7:
            return LpResult(x=np.full(n, np.nan), value=np.nan, status="infeasible")
        # drive leftover artificials out of the basis if possible
        for i in range(m):
            if basis[i] in art_cols:
                for j in range(ncols + n_slack):
                    if abs(tab[i, j]) > LP_TOL:
                        piv = tab[i, j]
                        tab[i] /= piv
                        rhsv[i] /= piv
                        for r in range(m):
                            if r != i and tab[r, j] != 0.0:
                                f = tab[r, j]
                                tab[r] -= f * tab[i]
                                rhsv[r] -= f * rhsv[i]
                        basis[i] = j
                        break

    cexp = expand(c)
    obj = np.zeros(width)
    obj[: cexp.size] = cexp
    objval = 0.0
    for i in range(m):
        if obj[basis[i]] != 0.0:
            f = obj[basis[i]]
            obj -= f * tab[i]
            objval -= f * rhsv[i]
    # phase 2 scans only structural + slack columns, so artificials (all
    # zero-level if still basic) can never re-enter
    out = pivot(tab, rhsv, basis, obj, objval, ncols + n_slack)
    if out is None:
        return LpResult(x=np.full(n, np.nan), value=np.nan, status="unbounded")

    xin = np.zeros(ncols)
    for i in range(m):
        if basis[i] < ncols:
            xin[basis[i]] = rhsv[i]
    x = np.empty(n)
    for j in range(n):
        kind, idx = col_map[j]
        if kind == "pos":
            x[j] = xin[idx] + shift[j]
        elif kind == "neg":
            x[j] = shift[j] - xin[idx]
        else:
            x[j] = xin[idx[0]] - xin[idx[1]]
    return LpResult(x=x, value=float(c @ x), status="optimal")


# ---------------------------------------------------------------------------
# sample average approximation


@dataclass(frozen=True)
class SaaConfig:
    sample_size: int
    tol: float = 1e-6
    max_outer: int = 4000
    seed: int = 0
    inner_tol: float = None  # default: 1e-3 * tol

    def __post_init__(self):
        if self.sample_size < 1:
            raise InvalidInputError("sample_size must be >= 1")


@dataclass
class SaaResult:
    x1: np.ndarray
    value: float
    certificate: float
    converged: bool
    outer_iterations: int


def _first_stage_certificate(fset, x, grad):
    """Linear gap max over the set of <grad, x - z> (optimality certificate)."""
    if isinstance(fset, Simplex):
        return float(grad @ x - grad.min())
    return float(grad @ (x - fset.center) + fset.radius * np.linalg.norm(grad))


def _project_first_stage(fset, x):
    if isinstance(fset, Simplex):
        return project_simplex(x)
    gap = x - fset.center
    nrm = np.linalg.norm(gap)
    if nrm <= fset.radius:
        return x
    return fset.center + (fset.radius / nrm) * gap


def saa_solve(instance, config, batch=None):
    """Minimize c^T x + mean_k Q(x, xi^k) over the fixed seeded sample.

    Deterministic accelerated projected gradient with warm-started batch
    subproblem solves; each outer gradient is the sample mean of exact-cut
    slopes. Terminates when the linear-gap certificate over the first-stage
    set drops below `tol` (returns flagged if max_outer is hit first).
    """
    if batch is None:
        rng = instance.scenario_stream(config.seed)
        batch = instance.sample_scenario_batch(rng, config.sample_size)
    inner_tol = config.inner_tol if config.inner_tol is not None else config.tol * 1e-3
    fset = instance.first_stage
    stage = instance.stage
    simplex_stage = isinstance(stage, SimplexStage)

    x = _project_first_stage(fset, np.asarray(
        np.full(instance.n, 1.0 / instance.n)
        if isinstance(fset, Simplex)
        else fset.center,
        dtype=float,
    ))
    warm = None

    def value_grad(x):
        nonlocal warm
        if simplex_stage:
            ys, vals, _ = batch.solve_simplex(x, inner_tol, warm=warm)
            warm = ys
            grads = batch.grad_x_rows(ys, x)
        else:
            ys, vals, _, mus = batch.solve_ball(stage, x, inner_tol)
            grads = batch.grad_x_rows(ys, x, mus=mus, x0=stage.x0)
        return (
            float(instance.f1(x) + vals.mean()),
            instance.f1_subgrad(x) + grads.mean(axis=0),
        )

    # initial smooth Lipschitz estimate: lambda_max of mean S1 is bounded by
    # lam + mean ||u||^2 for rank-one scenarios; the ball stage adds the
    # multiplier term, handled by doubling on sufficient-decrease failures
    lip = batch.lam + float(np.einsum("ij,ij->i", batch.u, batch.u).mean())
    v = x.copy()
    x_prev = x.copy()
    theta_prev = 1.0
    best = None
    cert = np.inf
    it = 0
    for it in range(1, config.max_outer + 1):
        fv, gv = value_grad(v)
        while True:
            x_new = _project_first_stage(fset, v - gv / lip)
            fx, gx = value_grad(x_new)
            dxv = x_new - v
            if fx <= fv + gv @ dxv + 0.5 * lip * (dxv @ dxv) + 1e-12 * (1 + abs(fv)):
                break
            lip *= 2.0
        cert = _first_stage_certificate(fset, x_new, gx)
        if best is None or cert < best[0]:
            best = (cert, x_new.copy(), fx)
        if best[0] <= config.tol:
            break
        theta = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * theta_prev**2))
        beta = (theta_prev - 1.0) / theta
        # restart the momentum when it points uphill
        if (x_new - x_prev) @ gx > 0:
            v = x_new.copy()
            theta = 1.0
        else:
            v = x_new + beta * (x_new - x_prev)
        theta_prev = theta
        x_prev = x_new
    cert, x_best, val = best
    return SaaResult(
        x1=x_best,
        value=val,
        certificate=float(cert),
        converged=cert <= config.tol,
        outer_iterations=it,
    )


# ---------------------------------------------------------------------------
# L-shaped method


@dataclass
class LShapedResult:
    x1: np.ndarray
    lower: float
    upper: float
    iterations: int
    bounds: np.ndarray  # structured rows (iter, lower, upper)


BOUNDS_DTYPE = np.dtype([("iter", np.int64), ("lower", float), ("upper", float)])


def lshaped_solve(instance, batch, rel_gap=0.05, max_iters=200, inner_tol=1e-9):
    """Single-cut L-shaped method on a fixed scenario batch (simplex stage).

    The master min c^T x + theta over the simplex plus epigraph cuts is
    solved by `dense_lp_solve`; each iteration adds one aggregated exact
    cut of the sampled expected recourse at the master solution. Stops when
    (upper - lower)/max(1, |upper|) <= rel_gap.
    """
    if not isinstance(instance.stage, SimplexStage):
        raise InvalidInputError("the L-shaped baseline supports the simplex stage only")
    n = instance.n
    c = instance.c
    cuts = []  # (slope a, intercept b): theta >= a @ x + b
    warm = None

    def recourse(x):
        nonlocal warm
        ys, vals, _ = batch.solve_simplex(x, inner_tol, warm=warm)
        warm = ys
        grads = batch.grad_x_rows(ys, x)
        qbar = float(vals.mean())
        slope = grads.mean(axis=0)
        return qbar, slope, float(qbar - slope @ x)

    # first master has no epigraph variable yet
    res = dense_lp_solve(c, a_eq=np.ones((1, n)), b_eq=[1.0])
    if res.status != "optimal":
        raise LpStallError("initial master LP failed: %s" % res.status)
    x = res.x
    lower = -np.inf
    upper = np.inf
    x_best = x.copy()
    rows = []
    for it in range(1, max_iters + 1):
        qbar, slope, intercept = recourse(x)
        total = float(c @ x + qbar)
        if total < upper:
            upper = total
            x_best = x.copy()
        cuts.append((slope, intercept))
        # master over (x, theta): minimize c @ x + theta
        ncols = n + 1
        cost = np.concatenate([c, [1.0]])
        a_eq = np.zeros((1, ncols))
        a_eq[0, :n] = 1.0
        a_ub = np.zeros((len(cuts), ncols))
        b_ub = np.zeros(len(cuts))
        for k, (a, b) in enumerate(cuts):
            a_ub[k, :n] = a
            a_ub[k, n] = -1.0
            b_ub[k] = -b
        bounds = [(0.0, None)] * n + [(None, None)]
        res = dense_lp_solve(cost, a_ub=a_ub, b_ub=b_ub, a_eq=a_eq, b_eq=[1.0], bounds=bounds)
        if res.status != "optimal":
            raise LpStallError("master LP failed: %s" % res.status)
        lower = max(lower, res.value)
        rows.append((it, lower, upper))
        if (upper - lower) / max(1.0, abs(upper)) <= rel_gap:
            break
        x = res.x[:n]
    return LShapedResult(
        x1=x_best,
        lower=float(lower),
        upper=float(upper),
        iterations=len(rows),
        bounds=np.array(rows, dtype=BOUNDS_DTYPE),
    )
