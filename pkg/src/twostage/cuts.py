"""Exact and inexact affine minorants (cuts) for second-stage value functions.

Variants:

* ``exact_cut``            -- subgradient cut from an (essentially) exact solve;
* ``cut_fixed_l1``         -- fixed feasible set, linear-gap error bound;
* ``cut_fixed_strong``     -- fixed feasible set, strong-convexity error bound
                              eta = eps + M1 Diam(X) sqrt(2 eps / alpha);
* ``cut_variable_l2``      -- coupling constraints, Lagrangian linear-gap bound;
* ``cut_variable_strong``  -- coupling constraints, strong concavity of the
                              dual, eta = eps + ((M1 + M2 U) sqrt(2/alpha)
                              + 2 max(||B^T||, sqrt(p) U_g)/sqrt(alpha_D))
                              Diam(X) sqrt(eps);
* ``cut_corollary``        -- the nine structure-specialized variants (a)-(i).

Every cut reports ``eta``, an upper bound on Q(anchor) - C(anchor). For the
Lagrangian linear-gap variant the subtracted constant is L - l2 while the
reported eta is eps + l2 (the bound the construction actually guarantees:
with inexact duals the Lagrangian value can undershoot Q by up to eps).
Variants derived from strong concavity subtract eta itself from f(y_hat),
so the two families differ slightly in their constant terms at equal data.
"""

from dataclasses import dataclass

import numpy as np

from .geometry import Ball, Simplex, sample_point
from .numkit import InvalidInputError
from .second_stage import (
    EXACT_EPS,
    BallStage,
    SimplexStage,
    multiplier_bound,
    oracle_solve,
    oracle_values,
    simplex_gap_certificate,
)


class WrongVariantError(ValueError):
    """Requested cut variant does not apply to this problem structure."""


class InexactReportError(ValueError):
    """exact_cut was given a solve that is not certified exact."""


class MissingConstantError(ValueError):
    """A required constant (alpha, M1, alpha_D, ...) was not supplied."""


@dataclass
class Cut:
    """Affine minorant C(x) = value_at_anchor + <slope, x - anchor>.

    ``eta`` bounds Q(anchor) - C(anchor) from above; ``variant`` records the
    construction for audit.
    """

    anchor: np.ndarray
    value_at_anchor: float
    slope: np.ndarray
    eta: float
    variant: str

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            return float(self.value_at_anchor + self.slope @ (x - self.anchor))
        return self.value_at_anchor + (x - self.anchor[None, :]) @ self.slope


@dataclass
class CutProblemData:
    """Problem references at the anchor plus the constants the bounds need.

    Constants are never estimated silently; a missing constant required by
    the requested variant raises ``MissingConstantError``.
    """

    stage: object
    x1: np.ndarray
    scen: object
    alpha: float = None
    alpha_d: float = None
    m1: float = None
    m2: float = None
    diam_x: float = None
    u_grad: float = None  # max_i ||grad_x g_i(y_hat, x1)||
    mult_bound: float = None
    b_norm: float = 0.0
    p: int = 0
    has_linear: bool = False
    has_nonlinear: bool = False
    f_separable: bool = False
    g_separable: bool = True

    @classmethod
    def from_problem(cls, stage, x1, scen, first_stage_radius=1.0):
        """Analytic constants for the two built-in stage families."""
        x1 = np.asarray(x1, dtype=float)
        alpha = scen.s3_lambda_min()
        m1 = scen.s2_norm()
        if isinstance(stage, SimplexStage):
            return cls(
                stage=stage, x1=x1, scen=scen, alpha=alpha, m1=m1, m2=0.0,
                diam_x=float(np.sqrt(2.0)) if scen.m > 1 else 0.0,
                u_grad=0.0, p=0, has_linear=False, has_nonlinear=False,
                f_separable=(m1 == 0.0), g_separable=True,
            )
        if isinstance(stage, BallStage):
            ubar = multiplier_bound(stage, x1, scen)
            a0 = scen.y_linear_term(x1) + scen.s3_mul(stage.y0)
            alpha_d = scen.s3_shift_quads(a0, ubar)[2]
            return cls(
                stage=stage, x1=x1, scen=scen, alpha=alpha, alpha_d=alpha_d,
                m1=m1, m2=0.0, diam_x=2.0 * first_stage_radius,
                u_grad=float(np.linalg.norm(x1 - stage.x0)), mult_bound=ubar,
                p=1, has_linear=False, has_nonlinear=True,
                f_separable=(m1 == 0.0), g_separable=True,
            )
        raise InvalidInputError("unknown stage %r" % (stage,))

    def require(self, **named):
        for name, value in named.items():
            if value is None:
                raise MissingConstantError("constant %r is required here" % name)

    def sampling_set(self):
        if isinstance(self.stage, SimplexStage):
            return Simplex(self.scen.m)
        return Ball(self.stage.x0, self.diam_x / 2.0)


# ---------------------------------------------------------------------------
# shared pieces


def l_gap_simplex(g, y):
    """max over the simplex of <g, y - z>."""
    return simplex_gap_certificate(g, y)


def l_gap_ball(g, y, y0, radius):
    """max over {||z - y0|| <= R} of <g, y - z> = <g, y - y0> + R ||g||."""
    return float(g @ (y - y0) + radius * np.linalg.norm(g))


def _slope_objective(data, report):
    return data.scen.grad_x(report.x2, data.x1)


def _slope_lagrangian(data, report):
    s = data.scen.grad_x(report.x2, data.x1)
    if isinstance(data.stage, BallStage) and report.mu.size:
        s = s + report.mu[0] * (data.x1 - data.stage.x0)
    return s


def _lagrangian_value(data, report):
    val = report.primal_value
    if isinstance(data.stage, BallStage) and report.mu.size:
        val = val + report.mu[0] * data.stage.g1(report.x2, data.x1)
    return val


def _grad_y_lagrangian(data, report):
    g = data.scen.grad_y(report.x2, data.x1)
    if isinstance(data.stage, BallStage) and report.mu.size:
        g = g + report.mu[0] * (report.x2 - data.stage.y0)
    return g


def _l2_gap(data, report):
    g = _grad_y_lagrangian(data, report)
    if isinstance(data.stage, SimplexStage):
        return l_gap_simplex(g, report.x2)
    return l_gap_ball(g, report.x2, data.stage.y0, data.stage.radius)


# ---------------------------------------------------------------------------
# cut constructors


def exact_cut(data, report):
    """Subgradient cut; requires a solve certified exact (eps <= 1e-10)."""
    if report.eps_certified > EXACT_EPS:
        raise InexactReportError(
            "solve certified only to %.3e; use an inexact variant"
            % report.eps_certified
        )
    return Cut(
        anchor=data.x1.copy(),
        value_at_anchor=report.primal_value,
        slope=_slope_lagrangian(data, report),
        eta=0.0,
        variant="exact",
    )


def cut_fixed_l1(data, report):
    """Fixed feasible set, eta = linear gap of grad_y f at y_hat."""
    if data.has_linear or data.has_nonlinear:
        raise WrongVariantError("fixed-set cut needs a coupling-free problem")
    g = data.scen.grad_y(report.x2, data.x1)
    eta = l_gap_simplex(g, report.x2)
    return Cut(
        anchor=data.x1.copy(),
        value_at_anchor=report.primal_value - eta,
        slope=_slope_objective(data, report),
        eta=eta,
        variant="fixed_l1",
    )


def cut_fixed_strong(data, report):
    """Fixed feasible set, eta = eps + M1 Diam(X) sqrt(2 eps / alpha)."""
    if data.has_linear or data.has_nonlinear:
        raise WrongVariantError("fixed-set cut needs a coupling-free problem")
    data.require(alpha=data.alpha, m1=data.m1, diam_x=data.diam_x)
    if data.alpha <= 0:
        raise MissingConstantError("alpha must be positive")
    eps = report.eps_certified
    if eps <= EXACT_EPS:
        eta = eps
    else:
        eta = eps + data.m1 * data.diam_x * np.sqrt(2.0 * eps / data.alpha)
    return Cut(
        anchor=data.x1.copy(),
        value_at_anchor=report.primal_value - eta,
        slope=_slope_objective(data, report),
        eta=float(eta),
        variant="fixed_strong",
    )


def cut_variable_l2(data, report):
    """Lagrangian linear-gap cut; degenerates to the l1 gap without duals.

    Constant term is L(y_hat, duals) - l2 as printed; the reported eta is
    eps + l2, the bound actually guaranteed at the anchor.
    """
    l2 = _l2_gap(data, report)
    return Cut(
        anchor=data.x1.copy(),
        value_at_anchor=_lagrangian_value(data, report) - l2,
        slope=_slope_lagrangian(data, report),
        eta=float(report.eps_certified + l2),
        variant="variable_l2",
    )


def cut_variable_strong(data, report):
    """Strong-concavity cut: the general (non-specialized) error bound."""
    data.require(alpha=data.alpha, m1=data.m1, diam_x=data.diam_x)
    if data.alpha <= 0:
        raise MissingConstantError("alpha must be positive")
    eps = report.eps_certified
    if eps <= EXACT_EPS:
        eta = eps
    else:
        dual_coef = 2.0 * max(data.b_norm, np.sqrt(data.p) * _u_grad(data, report))
        primal_coef = data.m1
        if data.m2:
            data.require(m2=data.m2, mult_bound=data.mult_bound)
            primal_coef = data.m1 + data.m2 * data.mult_bound
        term = primal_coef * np.sqrt(2.0 / data.alpha)
        if dual_coef > 0.0:
            data.require(alpha_d=data.alpha_d)
            if data.alpha_d <= 0:
                raise MissingConstantError("alpha_d must be positive")
            term += dual_coef / np.sqrt(data.alpha_d)
        eta = eps + term * data.diam_x * np.sqrt(eps)
    return Cut(
        anchor=data.x1.copy(),
        value_at_anchor=report.primal_value - eta,
        slope=_slope_lagrangian(data, report),
        eta=float(eta),
        variant="variable_strong",
    )


def _u_grad(data, report):
    if data.u_grad is not None:
        return data.u_grad
    if isinstance(data.stage, BallStage):
        return float(np.linalg.norm(data.x1 - data.stage.x0))
    return 0.0


# ---------------------------------------------------------------------------
# the nine specialized cases

_CASE_NEEDS = {
    # case: (needs_linear, needs_nonlinear, needs_f_sep, needs_g_sep)
    "a": (True, True, False, True),
    "b": (True, True, True, False),
    "c": (True, True, True, True),
    "d": (False, True, False, False),
    "e": (False, True, False, True),
    "f": (False, True, True, False),
    "g": (False, True, True, True),
    "h": (True, False, False, False),
    "i": (True, False, True, False),
}


def applicable_cases(data):
    """Corollary cases whose structure assumptions this problem satisfies."""
    out = []
    for case in sorted(_CASE_NEEDS):
        try:
            _check_case(case, data)
        except WrongVariantError:
            continue
        out.append(case)
    return out


def _check_case(case, data):
    if case not in _CASE_NEEDS:
        raise InvalidInputError("unknown corollary case %r" % case)
    lin, nonlin, f_sep, g_sep = _CASE_NEEDS[case]
    if lin != data.has_linear:
        raise WrongVariantError(
            "case %s needs has_linear=%s (violated flag: has_linear)" % (case, lin)
        )
    if nonlin != data.has_nonlinear:
        raise WrongVariantError(
            "case %s needs has_nonlinear=%s (violated flag: has_nonlinear)"
            % (case, nonlin)
        )
    if f_sep and not data.f_separable:
        raise WrongVariantError(
            "case %s needs a separable objective (violated flag: f_separable)" % case
        )
    if g_sep and not data.g_separable:
        raise WrongVariantError(
            "case %s needs separable constraints (violated flag: g_separable)" % case
        )


def corollary_eta(case, eps, data, u_grad=None):
    """Error-bound formula of one corollary case, evaluated literally."""
    if case not in _CASE_NEEDS:
        raise InvalidInputError("unknown corollary case %r" % case)
    if eps <= EXACT_EPS:
        return float(eps)
    d = data.diam_x
    u = data.u_grad if u_grad is None else u_grad
    root2e = np.sqrt(2.0 * eps)

    def over_alpha(coef):
        data.require(alpha=data.alpha)
        return coef / np.sqrt(data.alpha)

    def over_alpha_d(coef):
        if coef == 0.0:
            return 0.0
        data.require(alpha_d=data.alpha_d)
        return coef / np.sqrt(data.alpha_d)

    if case == "a":
        data.require(m1=data.m1, u_grad=u)
        mix = np.sqrt(2.0) * max(data.b_norm, np.sqrt(data.p) * u)
        return float(eps + (over_alpha(data.m1) + over_alpha_d(mix)) * d * root2e)
    if case == "b":
        data.require(m2=data.m2, mult_bound=data.mult_bound, u_grad=u)
        mix = np.sqrt(2.0) * max(data.b_norm, np.sqrt(data.p) * u)
        return float(
            eps
            + (over_alpha(data.m2 * data.mult_bound) + over_alpha_d(mix)) * d * root2e
        )
    if case == "c":
        data.require(u_grad=u, alpha_d=data.alpha_d)
        mix = max(data.b_norm, np.sqrt(data.p) * u)
        return float(eps + 2.0 * mix * d * np.sqrt(eps / data.alpha_d))
    if case == "d":
        data.require(m1=data.m1, m2=data.m2, mult_bound=data.mult_bound, u_grad=u)
        return float(
            eps
            + (
                over_alpha(data.m1 + data.m2 * data.mult_bound)
                + over_alpha_d(u * np.sqrt(data.p))
            )
            * d
            * root2e
        )
    if case == "e":
        data.require(m1=data.m1, u_grad=u)
        return float(
            eps + (over_alpha(data.m1) + over_alpha_d(np.sqrt(data.p) * u)) * d * root2e
        )
    if case == "f":
        data.require(m2=data.m2, mult_bound=data.mult_bound, u_grad=u)
        return float(
            eps
            + (
                over_alpha(data.m2 * data.mult_bound)
                + over_alpha_d(u * np.sqrt(data.p))
            )
            * d
            * root2e
        )
    if case == "g":
        data.require(u_grad=u, alpha_d=data.alpha_d)
        return float(eps + d * np.sqrt(2.0 * eps * data.p / data.alpha_d) * u)
    if case == "h":
        data.require(m1=data.m1)
        return float(
            eps + (over_alpha(data.m1) + over_alpha_d(data.b_norm)) * d * root2e
        )
    # case i
    data.require(alpha_d=data.alpha_d)
    return float(eps + data.b_norm * np.sqrt(2.0 * eps / data.alpha_d) * d)


def cut_corollary(case, data, report):
    """Structure-specialized cut; validates the case's flags first."""
    _check_case(case, data)
    eta = corollary_eta(case, report.eps_certified, data)
    # cases b, c, f, g, i replace grad_x f(y_hat, .) by grad_x f1; all of
    # them keep the dual part of the Lagrangian slope
    slope = _slope_lagrangian(data, report)
    return Cut(
        anchor=data.x1.copy(),
        value_at_anchor=report.primal_value - eta,
        slope=slope,
        eta=float(eta),
        variant="corollary_%s" % case,
    )


# ---------------------------------------------------------------------------
# empirical validation


@dataclass
class CutValidation:
    max_violation: float  # max over samples of C(x) - Q_oracle(x)
    anchor_gap: float  # Q_oracle(anchor) - C(anchor)
    eta: float
    n_samples: int

    @property
    def valid(self):
        return self.max_violation <= 1e-7 and self.anchor_gap <= self.eta + 1e-8


def validate_cut(cut, data, n_samples, rng, oracle_tol=1e-12):
    """Empirically test the lower-bound property of a cut against the oracle."""
    set_ = data.sampling_set()
    xs = np.stack([sample_point(set_, rng) for _ in range(n_samples)])
    qs = oracle_values(data.stage, xs, data.scen, tol=oracle_tol)
    cs = cut(xs)
    anchor_q = oracle_solve(data.stage, data.x1, data.scen).primal_value
    return CutValidation(
        max_violation=float(np.max(cs - qs)),
        anchor_gap=float(anchor_q - cut(data.x1)),
        eta=cut.eta,
        n_samples=n_samples,
    )
