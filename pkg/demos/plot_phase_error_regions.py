"""
Phase-error regions per photon number
=====================================

Each photon number gets a convex curve Omega(lambda). Every lambda gives a
line ``e_ph <= lambda * e + Omega(lambda)``, and together the lines cut out
the region of bit/phase error pairs an attack can reach.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from dpsqkd import omega_curve, region_boundary
from dpsqkd.omega import crossover_lambda

# One photon gives a straight segment of slope 6 up to e = 5/34.
one = region_boundary(omega_curve(9, 1))
print("nu=1 boundary at e=0.1:", one(0.1), "(6e =", 0.6, ")")

# Two photons: two candidate families compete, and the crossover
# lambda marks where the maximiser switches branch.
fig, ax = plt.subplots(figsize=(5, 4))
for n in (4, 7, 9):
    curve = omega_curve(n, 2)
    print(f"n={n}: branch switch at lambda = {crossover_lambda(curve):.6f}")
    b = curve.boundary
    ax.plot(b.e, b.e_ph, label=f"nu=2, n={n}")

ax.plot(one.e, one.e_ph, "k--", label="nu=1")
ax.set_xlim(0, 0.2)
ax.set_ylim(0, 1)
ax.set_xlabel("bit error rate e")
ax.set_ylabel("phase error rate e_ph")
ax.legend()
fig.tight_layout()
fig.savefig("phase_error_regions.png", dpi=120)

# Three photons on four slots: the region covers everything.
print("nu=3, n=4 all achievable:", omega_curve(4, 3).all_achievable)
