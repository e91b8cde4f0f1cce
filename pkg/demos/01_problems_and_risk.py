"""Finite problems and their basic functionals.

Builds a tiny binary classification problem, inspects risks and loss
profiles, and checks the two one-point calibration identities: the distance
to the trivial zero-loss problem is the worst risk, and the distance to the
constant-loss problem at the loss cap recovers the optimal risk.
"""

import numpy as np

import riskspace as rs

# Two inputs, two labels, mass concentrated on matching pairs, 0-1 loss,
# and all four functions from inputs to labels as predictors.
problem = rs.FiniteProblem(
    x_labels=("x0", "x1"),
    y_labels=("y0", "y1"),
    eta=np.array([[0.5, 0.0], [0.0, 0.5]]),
    loss=np.array([[0.0, 1.0], [1.0, 0.0]]),
    predictors=np.array([[0, 1], [0, 0], [1, 1], [1, 0]]),
)

print("risks per predictor:", rs.all_risks(problem))
print("optimal (constrained Bayes) risk:", rs.constrained_bayes_risk(problem))

print("\nloss profiles (value/mass pairs):")
for k, profile in enumerate(rs.loss_profile_set(problem)):
    pairs = list(zip(profile.values, profile.masses))
    print(f"  predictor {k}: {pairs}   mean = {profile.mean():.3f}")

d = rs.predictor_pseudometric(problem)
print("\npredictor pseudometric (expected loss gaps):")
print(np.round(d, 3))

# One-point calibration: distances to the two constant-loss reference points.
bullet0 = rs.one_point_problem(0.0)
ell_max = float(problem.loss.max())
bullet_max = rs.one_point_problem(ell_max)

d0 = rs.risk_distance_exact(problem, bullet0).value
dmax = rs.risk_distance_exact(problem, bullet_max).value
print("\ndistance to zero-loss point problem:", d0,
      "(worst risk =", float(rs.all_risks(problem).max()), ")")
print("distance to loss-cap point problem:", dmax,
      "(cap - optimal risk =", ell_max - rs.constrained_bayes_risk(problem), ")")

# Coarsening: merge the two labels into one block.
coarse = rs.coarsen(problem, rs.Partition(blocks=((0, 1),), ny=2))
print("\none-block coarsening: labels ->", coarse.y_labels,
      "| loss ->", coarse.loss.tolist(),
      "| bound =", rs.coarsening_bound(problem, rs.Partition(blocks=((0, 1),),
                                                             ny=2)))
