"""
k-partite structure
===================

A bipartite network has more links between its two sides than the null
model predicts, which shows up as an eigenvalue below the lower bound.
The signs of its eigenvector entries split the two sides.
"""

import numpy as np

from netspectra.graph import WeightedGraph
from netspectra.pipeline import RunConfig, analyze

W = np.zeros((16, 16))
W[:8, 8:] = 3
W[8:, :8] = 3
g = WeightedGraph.from_matrix(W)

res = analyze(g, RunConfig(seed=0))
print("structure:", res.structure, " d_neg =", res.estimate.d_neg)
kp = res.kpartite
print("group of each node:", [kp.groups.get(i) for i in range(g.n)])
