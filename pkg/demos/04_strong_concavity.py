#!/usr/bin/env python3
"""Strong-concavity constants of dual functions, checked numerically.

Three certified routes: linear constraints (lambda_min(AA^T)/L on all of
R^q), one quadratic constraint (an explicit constant on the multiplier
interval [0, mu_bar]), and the local constant near an optimal dual pair.
"""

import numpy as np

from twostage.instances import InstanceSpec, generate_instance
from twostage.numkit import RngStream
from twostage.second_stage import dual_function_value
from twostage.strong_concavity import (
    ball_stage_concavity,
    linear_constraints_constant,
    local_theorem_constant,
    quad_quad_constant,
    verify_concavity,
)

print("== linear constraints ==")
a = np.array([[1.0, 1.0, 0.0], [0.0, 1.0, -1.0]])
cert = linear_constraints_constant(a, lipschitz=4.0)
print("alpha_D = lambda_min(AA^T)/L =", cert.alpha_d, "on", cert.region.kind)

print()
print("== quadratic objective + one quadratic constraint ==")
cert = quad_quad_constant(
    q0=np.diag([2.0, 1.0]), q1=np.eye(2), a0=np.array([1.0, -1.0]),
    a1=np.zeros(2), lower_bound=-3.0, f_x0=1.0, g1_x0=-2.0,
)
print("alpha_D =", cert.alpha_d, "on interval", cert.region.interval)

print()
print("== local constant ==")
cert = local_theorem_constant(alpha=1.0, l_f=2.0, l_g=0.5, u_eps=1.0,
                              lambda_underbar=3.0)
print("alpha_D =", cert.alpha_d, "(valid near the optimal dual pair)")

print()
print("== ball-stage dual functions, verified ==")
rng = RngStream(11)
for n in (1, 2, 5):
    inst = generate_instance(InstanceSpec("ball", n, seed=n))
    scen = inst.sample_scenario(rng.substream(n))
    x1 = rng.ball_point(inst.stage.x0, 1.0)
    cert = ball_stage_concavity(inst.stage, x1, scen)
    lo, hi = cert.region.interval

    def theta(mu, inst=inst, x1=x1, scen=scen):
        return dual_function_value(inst.stage, x1, scen, mu)

    rep = verify_concavity(theta, (lo, hi), cert.alpha_d, n_checks=40,
                           rng=rng.substream(100 + n))
    print("n=%d: alpha_D=%.4e on [0, %.2f] -> verifier %s"
          % (n, cert.alpha_d, hi, "pass" if rep.passed else "FAIL"))
    # an overclaimed constant must fail
    bad = verify_concavity(theta, (lo, hi), 1e6 * cert.alpha_d, n_checks=40,
                           rng=rng.substream(200 + n))
    print("      overclaimed constant ->", "pass" if bad.passed else "FAIL (expected)")
