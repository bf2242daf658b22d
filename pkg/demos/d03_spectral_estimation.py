"""
Spectral estimation of low-dimensional structure
================================================

Compare the eigenvalues of the data comparison matrix with the extreme
eigenvalues sampled from the null model. Eigenvalues above the upper
bound count retained dimensions.
"""

import numpy as np

from netspectra.graph import load_les_miserables
from netspectra.nullmodels import NullModelSpec, build_ensemble
from netspectra.spectral import spectral_estimate

g = load_les_miserables()
ens = build_ensemble(g, NullModelSpec(num_samples=100, seed=0))

est = spectral_estimate(g, ens)
print("top eigenvalues:", np.round(est.data_eigenvalues[:4], 2))
print(f"bounds: [{est.lower_bound:.2f}, {est.upper_bound:.2f}]")
print("d_pos =", est.d_pos, " d_neg =", est.d_neg)

# the three test-based bounds are stricter variants of the same idea
for method in ("ci", "ttest", "perm"):
    e = spectral_estimate(g, ens, method)
    print(f"{method:>5}: d_pos = {e.d_pos}")
