"""
Images to feature vectors
=========================

Grayscale PGM images go through an optional resize and center crop, then
one of three extractors: raw pixels, a local binary pattern histogram, or
a seeded random projection. Feature matrices store one sample per column.
"""

import io

import numpy as np

from dmca.features import FeatureExtractor, GrayImage, load_pgm, save_pgm
from dmca.features import load_feature_matrix, save_feature_matrix

# two toy textures: stripes and a checkerboard
y, x = np.mgrid[0:64, 0:64]
stripes = GrayImage(((x // 4) % 2) * 200 + 20)
checks = GrayImage((((x // 8) + (y // 8)) % 2) * 255)

# PGM bytes round-trip exactly
blob = save_pgm(stripes)
print("PGM header:", blob[:15])
assert load_pgm(blob) == stripes

for kind in ("flatten", "lbp", "randproj"):
    ext = FeatureExtractor(kind, seed=0, output_dim=16, resize=(48, 48), crop=(40, 40))
    fs, fc = ext(stripes), ext(checks)
    print(f"{kind:9s} dim={fs.size:5d}  distance between textures={np.linalg.norm(fs - fc):.3f}")

# LBP codes are invariant to monotone brightness changes
lbp = FeatureExtractor("lbp")
darker = GrayImage(stripes.pixels // 2)
print("LBP unchanged by dimming:", np.array_equal(lbp(stripes), lbp(darker)))

# batches become (dim, count) matrices, stored as DMAT or CSV
m = lbp.batch([stripes, checks, darker])
buf = io.BytesIO()
save_feature_matrix(m, buf)
print("matrix shape:", m.shape, "DMAT bytes:", len(buf.getvalue()))
assert np.array_equal(load_feature_matrix(buf.getvalue()), m)
