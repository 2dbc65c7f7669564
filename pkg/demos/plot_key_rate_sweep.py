"""
Key rate against transmission
=============================

Sweep the channel transmission and compare the key rate when only
single-photon events are credited with the rate that also credits two
photons. The mean photon number is optimised separately at each point.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from dpsqkd import omega_curve
from dpsqkd.keyrate import optimize_mean_photon

n, e = 9, 0.03
curves = {2: omega_curve(n, 2)}
etas = np.geomspace(1e-3, 1e-1, 9)

rates = {}
for nubar in (1, 2):
    rates[nubar] = np.array([optimize_mean_photon(n, e, eta, nubar, curves).point.G for eta in etas])

# the gain from two-photon events is nearly flat in eta
print("G(2)/G(1):", np.round(rates[2] / rates[1], 4))

fig, ax = plt.subplots(figsize=(5, 4))
for nubar, g in rates.items():
    ax.loglog(etas, g, marker="o", label=f"photon numbers up to {nubar}")
ax.set_xlabel("transmission eta")
ax.set_ylabel("key rate per block")
ax.legend()
fig.tight_layout()
fig.savefig("key_rate_sweep.png", dpi=120)
