"""The Hardy inequality behind the divergence of lambda_1, and its log-dyadic witnesses.

Checks the inequality on a few test functions, shows that the constant 4 is
approached by y^(1/2 + eps), and evaluates the quadratic-form witnesses that
push lambda_n(c) to -infinity for the sinus flow at beta = 0.6 pi^2.
"""

import math

from kuo_spectra.hardy import (bump_function, check_hardy, divergence_witness, optimality_sweep,
                               piecewise_linear, power_function, witness_offset)
from kuo_spectra.profile import sinus
from kuo_spectra.rk_eigen import eigen_at_offset

for name, tf in (("linear on [0, 1]", piecewise_linear([0.0, 1.0], [0.0, 1.0], 0.0)),
                 ("bump on [-1, 1]", bump_function(-1.0, 1.0, -1.0)),
                 ("y^0.6 on [0, 1]", power_function(0.1))):
    chk = check_hardy(tf)
    print(f"{name:18s} lhs {chk.lhs:10.5f}  rhs {chk.rhs:10.5f}  holds {chk.holds}")

eps = [0.5, 0.1, 0.02, 0.005]
print("\n||phi/y||^2 / ||phi'||^2 for phi = y^(1/2+eps):")
for e, r in zip(eps, optimality_sweep(eps)):
    print(f"  eps = {e:<6g} ratio {r:.5f}")

p = sinus()
beta = 0.6 * math.pi ** 2
print("\nwitnesses at beta = 0.6 pi^2 (n = 2)")
for R in (10.0, 12.0, 14.0):
    w = divergence_witness(p, beta, 2, R)
    lam2 = eigen_at_offset(p, beta, witness_offset(w), 2, vectors=False)[1].lambda_
    print(f"  R = {R:4.1f}  u_min - c = {w.distance:.2e}  quotients "
          f"{w.values[0]:.3e}, {w.values[1]:.3e}  lambda_2 = {lam2:.3e}")
