"""Eigenvalue curves and isolated eigenvalues of the sinus flow u = (1 + cos pi y)/2.

Compares the computed edge limits of lambda_n(c) with their closed forms,
then counts isolated real eigenvalues at a few (alpha, beta) points and
checks the counts against the region table.
"""

import math

from kuo_spectra.profile import sinus
from kuo_spectra.rk_eigen import BELOW, classify_limit, eigenvalues
from kuo_spectra.sinus_oracle import (expected_spectrum_count, lambda_at_0, region_classify,
                                      theta_formula)
from kuo_spectra.spectrum import Lambda_beta, family_count, find_discrete_spectrum

PI2 = math.pi ** 2
p = sinus()

# lambda_n(c) as c runs toward min u = 0 from below
beta = 0.3 * PI2
print("lambda_n(c) at beta = 0.3 pi^2")
for c in (-1.0, -0.1, -1e-3, -1e-6):
    vals = [s.lambda_ for s in eigenvalues(p, beta, c, 3, vectors=False)]
    print(f"  c = {c:<8g}", "  ".join(f"{v:10.5f}" for v in vals))
for n in (1, 2, 3):
    v = classify_limit(p, beta, n, BELOW)
    print(f"  limit n={n}: computed {v.value:.8f}  closed form {lambda_at_0(beta, n):.8f}")

# beyond 9 pi^2/16 the first branch runs off to -infinity
v = classify_limit(p, 0.6 * PI2, 1, BELOW)
print("\nbeta = 0.6 pi^2:", v.kind)
for d, lam in v.witness[-3:]:
    print(f"  c = -{d:.0e}  lambda_1 = {lam:.4g}")

# counts against the region table
lam = {b: Lambda_beta(p, b * PI2).to_float() for b in (-0.45,)}
hook = lambda b: lam[round(b / PI2, 6)]  # noqa: E731
print("\nalpha   beta/pi^2  region  table  computed  speeds")
for alpha, b in ((0.7, -0.53), (2.5, -0.53), (0.6, -0.45), (1.0, 0.1), (1.5, 0.53)):
    region = region_classify(alpha, b * PI2, hook)
    spec = find_discrete_spectrum(p, b * PI2, alpha)
    want = int(expected_spectrum_count(region).value)
    speeds = ", ".join(f"{c:.6f}" for c in spec.speeds)
    print(f"{alpha:5.2f}  {b:8.3f}   {region:>5}  {want:5d}  {len(spec):8d}  {speeds}")

# traveling-wave families of period 2 pi/alpha come from all harmonics k alpha
b, alpha = -0.45, 0.5
rep = family_count(p, b * PI2, 2 * math.pi / alpha)
print(f"\nfamilies at beta = {b} pi^2, alpha = {alpha}: computed {rep.count}, "
      f"table {theta_formula(alpha, b * PI2, hook).value}")
for h in rep.harmonics:
    print(f"  harmonic k={h['k']}: speeds {[round(c, 6) for c in h['roots']]}")
