"""
Weighted graphs and edge lists
==============================

Load the bundled Les Miserables co-appearance network, look at its
weights, and round-trip it through the edge-list format.
"""

import io

import numpy as np

from netspectra.graph import (edge_list_string, giant_component, load_edge_list,
                              load_les_miserables, strip_leaves, weight_distribution)

g = load_les_miserables()
print(g)
print("links:", g.num_links, " total weight:", g.total_weight, " granularity:",
      g.weight_granularity)

# strongest characters
order = np.argsort(g.strengths)[::-1][:5]
for i in order:
    print(f"  {g.node_labels[i]:<12} strength {g.strengths[i]:.0f}  degree {g.degrees[i]}")

# integer weight distribution, as a cumulative table
for row in weight_distribution(g)[:6]:
    print(f"  weight {row.weight_value}: {row.observed_count} links, "
          f"cumulative {row.cumulative_fraction:.2f}")

# edge lists are tab separated: source, target, weight
text = edge_list_string(g)
print(text.splitlines()[0])
back = load_edge_list(io.StringIO(text))
order = [back.index_of(x) for x in g.node_labels]
assert np.array_equal(back.weights[np.ix_(order, order)], g.weights)

# leaf stripping removes the one-link characters
core = giant_component(strip_leaves(g))
print("after stripping leaves:", core.n, "of", g.n, "nodes")
