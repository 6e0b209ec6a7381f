"""Small-amplitude traveling waves bifurcating from an isolated eigenvalue.

Starts at the first-harmonic speed of the sinus flow at beta = pi^2/4 and
alpha = 1, continues the branch in the amplitude gamma, and checks that the
waves solve the steady equation and concentrate on the kernel mode.
"""

import math
import os

from kuo_spectra.bifurcation import (BifurcationGrid, continue_branch, quadratic_remainder,
                                     steady_residual, validate_concentration,
                                     write_streamline_svg)
from kuo_spectra.profile import sinus
from kuo_spectra.spectrum import find_discrete_spectrum

p = sinus()
beta, alpha = math.pi ** 2 / 4, 1.0
spec = find_discrete_spectrum(p, beta, alpha)
c0 = spec.speeds[0]
print(f"isolated eigenvalues at alpha = 1: {spec.speeds}")

grid = BifurcationGrid(modes=16, nodes=80)
states = continue_branch(p, beta, c0, 1, [1e-3, 2e-3, 4e-3, 8e-3], grid, alpha=alpha)
print("gamma    c - c0       residual   excess   remainder/gamma^2")
for s in states:
    print(f"{s.gamma:.0e}  {s.c - s.c0:+.3e}  {steady_residual(s, p, beta):.1e}  "
          f"{s.min_horizontal_excess:.4f}  {quadratic_remainder(s):.4f}")

rep = validate_concentration(states, p, beta)
print("distance to the kernel mode:", ", ".join(f"{d:.2e}" for d in rep.distances))
print("minimal periods:", rep.minimal_periods)

out = os.path.join(os.path.dirname(__file__), "out")
os.makedirs(out, exist_ok=True)
path = os.path.join(out, "wave.svg")
write_streamline_svg(path, states[-1], p, beta)
print("streamlines:", path)
