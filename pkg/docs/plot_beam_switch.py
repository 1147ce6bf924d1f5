"""
Coverage after a beam switch
============================

Given that beam 1 covers the user, how likely is beam l to cover it too?
The answer depends only on how many cascade stages the two beams share.
"""

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from cascade_blockage import BeamConfig, JointLTEvaluator, ModelParams, shared_depth

params = ModelParams(lam=1.0, p=0.5, K=0.1, stages=5)
beams = BeamConfig(4)
ev = JointLTEvaluator(params, beams)

targets = list(range(2, beams.n_beams + 1))
given_cov = [ev.conditional_switch_coverage(1.0, l) for l in targets]
given_out = [ev.conditional_given_outage(1.0, l) for l in targets]

for l, c in zip(targets, given_cov):
    print(f"l = {l:2d}  shared depth {shared_depth(1, l, beams.k)}  {c:.5f}")

###############################################################################
# Beams in the opposite half-plane share nothing, so their conditional
# coverage is the unconditional one.

fig, ax = plt.subplots()
ax.step(targets, given_cov, where="mid", label="source covered")
ax.step(targets, given_out, where="mid", label="source in outage")
ax.axhline(ev.random_beam_coverage(1.0), color="gray", lw=0.8)
ax.set_xlabel("target beam l")
ax.set_ylabel("conditional coverage at 0 dB")
ax.legend()
fig.savefig("beam_switch.png", dpi=120)
