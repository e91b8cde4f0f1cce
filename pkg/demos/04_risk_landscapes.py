"""Risk landscapes, Reeb graphs, and the connected distance.

Discretizes two threshold-classifier landscapes -- a circle of predictors
and the interval left after deleting one predictor -- and shows that their
Reeb graphs differ (one basin vs. two) even though the problems are close in
the plain distance.  A hand-built pair then exhibits a strict gap between
the plain and connected distances.
"""

import numpy as np

import riskspace as rs

k = 6  # grid resolution of the input interval
eta = np.zeros((k, 2))
eta[:, 0] = 1.0 / k
loss = np.array([[0.0, 1.0], [1.0, 0.0]])


def left_threshold(j):
    v = np.zeros(k, dtype=int)
    v[:j] = 1
    return v


def right_threshold(j):
    v = np.zeros(k, dtype=int)
    if j:
        v[-j:] = 1
    return v


# Sweeping the left family up and the right family back down traces a circle
# through the two constant predictors.
circle_preds = [left_threshold(j) for j in range(k + 1)]
circle_preds += [right_threshold(j) for j in range(k - 1, 0, -1)]
n = len(circle_preds)
circle = rs.PredictorGraph(
    problem=rs.FiniteProblem(
        x_labels=tuple(f"x{i}" for i in range(k)),
        y_labels=("0", "1"),
        eta=eta, loss=loss, predictors=np.array(circle_preds),
    ),
    edges=tuple((i, (i + 1) % n) for i in range(n)),
)

# Deleting the all-zeros predictor from the left family opens the circle
# into an interval with a second local minimum at the freshly cut end.
interval_preds = [left_threshold(j) for j in range(1, k + 1)]
interval_preds += [right_threshold(j) for j in range(k - 1, -1, -1)]
interval = rs.PredictorGraph(
    problem=rs.FiniteProblem(
        x_labels=tuple(f"x{i}" for i in range(k)),
        y_labels=("0", "1"),
        eta=eta, loss=loss, predictors=np.array(interval_preds),
    ),
    edges=tuple((i, i + 1) for i in range(n - 1)),
)

for name, pg in (("circle", circle), ("interval", interval)):
    reeb = rs.reeb_graph(pg)
    minima = reeb.local_minima()
    print(f"{name}: {len(reeb.nodes)} Reeb nodes,"
          f" {len(minima)} local minim{'um' if len(minima) == 1 else 'a'} at"
          f" heights {[round(reeb.nodes[i][0], 3) for i in minima]}")
    print(f"  lowest node height = {reeb.heights().min():.4f}"
          f" = optimal risk {rs.constrained_bayes_risk(pg.problem):.4f}")

# A frozen pair where the connected distance strictly exceeds the plain one:
# the cheap alignment must split a predictor fiber across non-adjacent
# vertices, which the connectivity filter forbids.
def constants_problem(values):
    m = len(values)
    eta = np.zeros((1, m))
    eta[0, 0] = 1.0
    return rs.FiniteProblem(
        x_labels=("x",),
        y_labels=tuple(f"y{i}" for i in range(m)),
        eta=eta,
        loss=np.abs(np.subtract.outer(values, values)),
        predictors=np.arange(m)[:, None],
    )


left = rs.PredictorGraph(problem=constants_problem(np.array([0.0, 1.0])),
                         edges=((0, 1),))
right = rs.PredictorGraph(problem=constants_problem(np.array([0.0, 1.0, 0.4])),
                          edges=((0, 1), (1, 2)))

plain = rs.risk_distance_exact(left.problem, right.problem).value
connected = rs.connected_risk_distance_exact(left, right).value
lower, upper = rs.reeb_sandwich(left, right)
print(f"\nplain distance = {plain:.3f}   connected distance = {connected:.3f}"
      f"   (strict gap {connected - plain:.3f})")
print(f"landscape-stability sandwich: {lower:.3f} <= universal Reeb distance"
      f" <= {upper:.3f}")
