"""
Rejecting noise nodes
=====================

Nodes are projected onto the retained eigenvectors. A node survives only
if its projection is longer than the average length the null samples
give it. The survivors, leaf-stripped, form the signal network.
"""

from netspectra.graph import load_les_miserables
from netspectra.nullmodels import NullModelSpec, build_ensemble
from netspectra.rejection import decompose
from netspectra.spectral import spectral_estimate

g = load_les_miserables()
ens = build_ensemble(g, NullModelSpec(seed=0))
est = spectral_estimate(g, ens)
dec = decompose(g, est, ens)

print("rejected", dec.rejected.size, "of", g.n, "characters")
print("signal network:", dec.signal_graph.n, "nodes")
for name in ("Valjean", "Javert", "Marius", "Fantine", "Napoleon"):
    i = g.index_of(name)
    print(f"  {name:<9} norm {dec.data_norms[i]:6.2f}  null {dec.expected_norms[i]:6.2f}  "
          f"{'kept' if name in dec.signal_graph.node_labels else 'rejected'}")
