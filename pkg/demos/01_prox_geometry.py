#!/usr/bin/env python3
"""First-stage geometries: prox mappings, Bregman distances, omega-radius.

Two pairings drive everything downstream: negative entropy on the unit
simplex (multiplicative updates) and half squared Euclidean norm on a ball
(projected updates).
"""

import numpy as np

from twostage.geometry import (
    ENTROPY,
    EUCLIDEAN,
    Ball,
    Simplex,
    bregman,
    omega_center,
    omega_radius,
    prox_step,
)

print("== entropy / simplex ==")
simplex = Simplex(4)
x = omega_center(ENTROPY, simplex)
print("omega-center (barycenter):", x)
print("omega-radius sqrt(2 ln 4) =", omega_radius(ENTROPY, simplex))

zeta = np.array([1.0, 0.0, -1.0, 0.0])  # a gradient step direction
p = prox_step(ENTROPY, simplex, x, zeta)
print("prox from the center along", zeta, "->", np.round(p, 4))
print("  components with smaller zeta grow multiplicatively; sum:", p.sum())

q = np.array([0.7, 0.1, 0.1, 0.1])
print("Bregman (KL) distance center -> q:", bregman(ENTROPY, x, q))

print()
print("== Euclidean / ball ==")
ball = Ball(center=np.array([2.0, 1.0]), radius=1.0)
x = omega_center(EUCLIDEAN, ball)
print("starting point (ball center):", x)
print("omega-radius:", omega_radius(EUCLIDEAN, ball))

zeta = np.array([3.0, 0.0])
p = prox_step(EUCLIDEAN, ball, x, zeta)
print("prox with a step that leaves the ball ->", np.round(p, 4))
print("  stays on the boundary:", np.linalg.norm(p - ball.center))
print("half squared distance as Bregman:", bregman(EUCLIDEAN, x, p))
