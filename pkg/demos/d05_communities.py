"""
Communities in the signal network
=================================

Cluster the signal network four ways: k-means in the retained space,
consensus clustering, Louvain and multi-way vector partitioning.
"""

from netspectra.graph import load_les_miserables
from netspectra.pipeline import RunConfig, analyze

g = load_les_miserables()
for method in ("kmeans", "consensus", "louvain", "multiway"):
    res = analyze(g, RunConfig(seed=0, cluster=method))
    part = res.clusters.partition
    print(f"{method:<10} {part.num_groups} groups, Q = {part.quality:.1f}")

# consensus modules, listed by member
res = analyze(g, RunConfig(seed=0))
labels = res.signal.signal_graph.node_labels
for k, members in enumerate(res.clusters.partition.groups()):
    print(f"module {k}:", ", ".join(labels[i] for i in members))
