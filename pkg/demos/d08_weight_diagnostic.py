"""
Which null model matches the data's weights?
============================================

Count how many links carry each integer weight, in the data and in every
sampled null network, and compare.
"""

from netspectra.graph import load_les_miserables
from netspectra.nullmodels import FULL_WCM, SPARSE_WCM, NullModelSpec
from netspectra.pipeline import max_count_error, null_weight_diagnostic

g = load_les_miserables()
for kind in (FULL_WCM, SPARSE_WCM):
    rows = null_weight_diagnostic(g, NullModelSpec(kind=kind, num_samples=100, seed=0))
    errors = max_count_error(rows)
    print(f"{kind:<11} largest count error per model: mean "
          f"{sum(errors.values()) / len(errors):.1f}, max {max(errors.values())}")
