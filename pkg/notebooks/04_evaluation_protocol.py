"""
Unimodal, cross-modal and shared-space recognition
==================================================

The seed-42 synthetic benchmark has ten classes of thirty samples per
modality. Raw features transfer badly between modalities because each
has its own mixing and nuisance dimensions; a shared space learned from
class labels alone restores recognition.
"""

from dmca import (
    DmcaConfig,
    SplitSpec,
    SynthConfig,
    run_crossmodal,
    run_shared_sweep,
    run_unimodal,
    split_train_test,
    synth_generate,
)

ds, _ = synth_generate(SynthConfig(classes=10, per_class=30, latent=8, nuisance=24, noise=0.3, seed=42))
train, test = split_train_test(ds, SplitSpec(0.9, seed=0))
print("train samples:", len(train.samples), "test samples:", len(test.samples))

uni = run_unimodal(train, test, "tactile")
print("tactile -> tactile:", uni.accuracies[0][1])

for a, b in (("vision", "tactile"), ("tactile", "vision")):
    print(f"{a} -> {b} on raw features:", run_crossmodal(train, test, a, b).accuracies[0][1])

# training pools both modalities' projections; test samples are tactile only
sweep = run_shared_sweep(train, test, [2, 4, 8, 16, 32], dmca=DmcaConfig(seed=7))
for q, acc in sweep.accuracies:
    print(f"shared space q={q:2d}: {acc:.3f}")

# reports are plain JSON for plotting
print(sweep.to_json()[:200], "...")
