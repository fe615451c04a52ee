"""
A causal Polya urn
==================

The left compartment draws X, the right one draws a hidden bit Z and shows
Y = X xor Z. Every ball drawn goes back with a copy. After twenty draws of
(X=1, Y=0) both compartments are full of black balls.
"""

import numpy as np

from dofinetti import BetaPrior, UrnState, polya_joint_log_prob, polya_urn_run, polya_urn_sample

prior = BetaPrior(1, 1)
history = UrnState.after_history(prior, [1] * 20, [0] * 20)
print(history)

# Left alone, X is almost surely 1 again and Y stays 0
_, ys = polya_urn_sample(prior, 1, 100_000, seed=1, initial=history)
print("P(Y=1)          ~", ys.mean())

# Forcing X = 0 flips Y, since Z is still almost surely 1
_, ys = polya_urn_sample(prior, 1, 100_000, interventions={0: 0}, seed=2, initial=history)
print("P(Y=1 | do(X=0)) ~", ys.mean())

# %%
# The observables are exchangeable: reordering the draws leaves the
# probability of the sequence unchanged
trace = polya_urn_run(BetaPrior(2, 3), 12, seed=3)
order = np.random.default_rng(0).permutation(12)
print(polya_joint_log_prob(trace.xs, trace.ys, BetaPrior(2, 3)),
      polya_joint_log_prob(trace.xs[order], trace.ys[order], BetaPrior(2, 3)))
trace.to_csv("urn_trace.csv")
