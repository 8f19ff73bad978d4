"""
How tree-like is a point set?
=============================

The four-point Gromov delta is 0 for tree metrics and grows as the space
looks less like a tree.  Small sets are scored exhaustively; large ones by
sampling quadruples.
"""

import numpy as np

from ehdcnn import data, metrics

square = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
print("unit square:", metrics.gromov_delta(square))

line = np.column_stack([np.arange(10.0), np.zeros(10)])
print("points on a line:", metrics.gromov_delta(line).delta)

# graphs of the synthetic targets, (x, h(x)) with x in [-1, 1]^5
for fn in ("sinc", "cosc"):
    ds = data.gen_synthetic(fn, 200, 5, noise_var=0.0, seed=0)
    est = metrics.gromov_delta(np.column_stack([ds.features, ds.targets]), max_quadruples=200_000)
    print(f"{fn}: delta {est.delta:.4f} from {est.quadruples_evaluated} sampled quadruples")

# the same points measured with the hyperbolic metric after mapping into the ball
pts = np.random.default_rng(1).uniform(-0.5, 0.5, size=(30, 2))
print("euclidean:", metrics.gromov_delta(pts).delta, " poincare:", metrics.gromov_delta(pts, "poincare").delta)
