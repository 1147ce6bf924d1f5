"""
Coverage under sparse, moderate and dense blockage
==================================================

Omnidirectional coverage of the typical user for three blockage
densities, each checked against a Monte Carlo run.
"""

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from cascade_blockage import ModelParams, coverage_curve, estimate_coverage

theta_db = np.arange(-10, 31, 1.0)

###############################################################################
# The analytic curves come from the backward recursion over the five stages.
# Each Monte Carlo point is shown with a 3-sigma bar.

fig, ax = plt.subplots()
for p, color in [(0.2, "C0"), (0.5, "C1"), (0.8, "C2")]:
    params = ModelParams(lam=0.1, p=p, K=0.1, stages=5)
    curve = coverage_curve(params, theta_db)
    ax.plot(curve.theta_db, curve.values, color=color, label=f"p = {p}")
    mc = estimate_coverage(params, None, theta_db[::5], "omni", 20_000, seed=1)
    ax.errorbar(mc.theta_db, mc.values, yerr=3 * mc.std_error, fmt="o", color=color)

ax.set_xlabel("SIR threshold (dB)")
ax.set_ylabel("coverage probability")
ax.legend()
fig.savefig("coverage_density.png", dpi=120)
