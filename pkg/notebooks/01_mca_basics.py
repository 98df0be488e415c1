"""
Maximum covariance analysis on fully paired data
================================================

Two views of the same eight samples share a 2-d latent signal. The
leading singular vectors of the cross-covariance recover it, and the sum
of the top singular values is the best achievable objective.
"""

import numpy as np

from dmca import PairingMatrix, mca_fit, objective, project_modality

rng = np.random.default_rng(0)
z = rng.normal(size=(2, 40))

# each view mixes the latent into its own coordinates, plus a little noise
h = rng.normal(size=(5, 2)) @ z + 0.05 * rng.normal(size=(5, 40))
h_prime = rng.normal(size=(4, 2)) @ z + 0.05 * rng.normal(size=(4, 40))

# a fully paired data set: sample i of one view goes with sample i of the other
pairs = PairingMatrix.identity(40)
proj = mca_fit(h, h_prime, pairs, q=2)
print("singular values:", proj.sigma)
print("objective:", objective(h, h_prime, proj, pairs), "=", proj.sigma.sum())

# shared coordinates of the two views are strongly correlated
a = project_modality(proj, h, "vision")
b = project_modality(proj, h_prime, "tactile")
for k in range(2):
    print(f"component {k}: corr = {np.corrcoef(a[k], b[k])[0, 1]:.4f}")

# shuffling the pairing destroys the covariance
shuffled = PairingMatrix(np.stack([np.arange(40), rng.permutation(40)], axis=1), 40, 40)
print("shuffled objective:", mca_fit(h, h_prime, shuffled, q=2).sigma.sum())
