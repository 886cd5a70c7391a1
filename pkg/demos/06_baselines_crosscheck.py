#!/usr/bin/env python3
"""Cross-validating three routes to the same optimal value.

On a shared scenario sample: mirror descent's running estimate, the
sample-average deterministic solve, and the L-shaped cutting-plane method
should agree. Common random numbers make the comparison noise-free.
"""

import numpy as np

from twostage.baselines import SaaConfig, lshaped_solve, saa_solve
from twostage.instances import InstanceSpec, generate_instance
from twostage.ismd import ExactAccuracy, IsmdConfig, run, suggested_theta1

inst = generate_instance(InstanceSpec("simplex", 5, seed=11))
n_scen = 4000

theta1 = suggested_theta1(inst)
smd = run(inst, IsmdConfig(n_iters=n_scen, seed=1, theta1=theta1,
                           accuracy=ExactAccuracy(1e-8)))
print("mirror descent  f_hat = %.5f" % smd.f_hat)

rng = inst.scenario_stream(1)
batch = inst.sample_scenario_batch(rng, n_scen)
saa = saa_solve(inst, SaaConfig(sample_size=n_scen, tol=1e-6, seed=1), batch=batch)
print("sample average  value = %.5f (certificate %.1e, %d outer iterations)"
      % (saa.value, saa.certificate, saa.outer_iterations))

ls = lshaped_solve(inst, batch, rel_gap=0.05)
print("L-shaped        upper = %.5f, lower = %.5f after %d cuts"
      % (ls.upper, ls.lower, ls.iterations))
print()
print("bound trajectory (iter, lower, upper):")
for row in ls.bounds:
    print("  %3d  %12.5f  %12.5f" % (row["iter"], row["lower"], row["upper"]))
print()
print("relative spread SMD vs SAA: %.3f%%"
      % (100 * abs(smd.f_hat - saa.value) / abs(saa.value)))
