"""
Interventions on exchangeable data
==================================

With a Beta(1, 3) prior on both mechanisms of X -> Y, the two positions of an
environment share their mechanism parameters. Seeing (X2, Y2) = (0, 0) tells
us something about the noise that will hit Y1, even after we force X1.
"""

from dofinetti import (
    BIVARIATE_GRAPHS,
    BetaPrior,
    InterventionSet,
    Query,
    analytic_block_table,
    answer_query,
    fit_joint,
    iid_truncated_factorization,
    marginalize,
    sample_icm_bivariate,
)

prior = BetaPrior(1, 3)
dag = BIVARIATE_GRAPHS["X->Y"]
table = analytic_block_table("X->Y", prior)

# P(Y1 = 0 | do(X1 = 0)) alone is the prior predictive of the noise bit
effect = answer_query(table, dag, Query(((1, 0),), InterventionSet.of((0, 0, 0))))
print("P(Y1=0 | do(X1=0))               =", effect.probs[0])

# conditioning on the other position sharpens it: 4/5
q = Query(((1, 0),), InterventionSet.of((0, 0, 0)), {(0, 1): 0, (1, 1): 0})
print("P(Y1=0 | do(X1=0), X2=0, Y2=0)   =", answer_query(table, dag, q).probs[0])

# %%
# The same quantity estimated from simulated environments
data = sample_icm_bivariate("X->Y", prior, 20_000, 2, seed=0)
fitted = fit_joint(data)
print("estimated from 20000 environments =", answer_query(fitted, dag, q).probs[0])

# %%
# Pooling the positions throws the shared-parameter information away
pair = marginalize(table, [(0, 0), (1, 0)])
iid = iid_truncated_factorization(pair, dag, InterventionSet.of((0, 0, 0)), 2)
print("pooled i.i.d. answer              =", iid[{(0, 0): 0, (1, 0): 0, (0, 1): 0, (1, 1): 0}]
      / marginalize(iid, [(0, 1), (1, 1)]).probs[0, 0])
