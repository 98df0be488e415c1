"""
Learning correspondences from class labels only
===============================================

With weak pairing we only know which class each sample belongs to. The
fit alternates between an SVD for the projections and a per-class
linear assignment for the pairing, and the objective never decreases.
"""

import numpy as np

from dmca import DmcaConfig, PairingMatrix, SynthConfig, dmca_fit, mca_fit, synth_generate
from dmca.assign import solve_max_assignment

# the assignment step on its own: a maximum-score one-to-one matching
m = solve_max_assignment([[4.0, 1.0, 0.0], [2.0, 3.0, 5.0]])
print("pairs:", m.pairs, "total:", m.total)

# a synthetic problem where the true pairs are known
cfg = SynthConfig(classes=3, per_class=6, latent=2, vision_dim=5, tactile_dim=5,
                  nuisance=0, noise=0.0, seed=4)
ds, truth = synth_generate(cfg)
h, hp = ds.feature_matrix("vision"), ds.feature_matrix("tactile")
g, gp = ds.labels("vision"), ds.labels("tactile")

proj, pairing, trace = dmca_fit(h, hp, g, gp, q=2, config=DmcaConfig(seed=0))
print("objective per iteration:", np.round(trace.objectives, 4))
print("iterations:", trace.iterations, "converged:", trace.converged)

# one random start can stall in a local optimum; restarts keep the best run
best, best_pairing, best_trace = dmca_fit(h, hp, g, gp, q=2, config=DmcaConfig(seed=0, n_init=10))
ref = mca_fit(h, hp, PairingMatrix(np.array(truth), len(g), len(gp)), 2).sigma.sum()
print(f"best of 10 starts: {best_trace.objectives[-1]:.6f}, true pairing: {ref:.6f}")
print("recovered true pairs:", len(best_pairing.as_set() & set(truth)), "of", len(truth))
