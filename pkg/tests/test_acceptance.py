"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v`` or
``python tests/test_acceptance.py``.
"""

import io
import time

import numpy as np
import pytest

from dmca.assign import brute_force_assignment, solve_max_assignment
from dmca.cli import main
from dmca.dataset import SplitSpec, SynthConfig, loads_manifest, save_manifest, split_train_test, synth_generate
from dmca.errors import FormatError, ManifestError
from dmca.evalharness import run_crossmodal, run_shared_sweep, run_unimodal
from dmca.features import dump_dmat, load_feature_matrix
from dmca.matcore import center_columns, cross_covariance, truncated_svd
from dmca.mca import DmcaConfig, PairingMatrix, dmca_fit, load_model, mca_fit

from oracles import random_orthonormal, singular_values_via_jacobi

BENCH = SynthConfig(classes=10, per_class=30, latent=8, nuisance=24, noise=0.3, seed=42)
# frozen from the first reference run (split seed 0, dmca seed 7, flatten features, 1-NN)
FROZEN = {
    "unimodal": 0.5666666666666667,
    "crossmodal": 0.0,
    "shared": {2: 0.6, 4: 0.6666666666666666, 8: 0.6333333333333333,
               16: 0.6333333333333333, 32: 0.5666666666666667},
}


@pytest.fixture
def verdict(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {n}] {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, detail

    return emit


@pytest.fixture(scope="module")
def bench():
    ds, _ = synth_generate(BENCH)
    train, test = split_train_test(ds, SplitSpec(0.9, seed=0))
    t0 = time.perf_counter()
    uni = run_unimodal(train, test, "tactile").accuracies[0][1]
    cross = run_crossmodal(train, test, "vision", "tactile").accuracies[0][1]
    shared = dict(run_shared_sweep(train, test, [2, 4, 8, 16, 32], dmca=DmcaConfig(seed=7)).accuracies)
    return uni, cross, shared, time.perf_counter() - t0


def test_svd_optimality(verdict):
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    worst_rel, dominated = 0.0, True
    for _ in range(100):
        d, dp = rng.integers(1, 9, size=2)
        n = 12
        h, _ = center_columns(rng.normal(size=(d, n)))
        hp, _ = center_columns(rng.normal(size=(dp, n)))
        c = cross_covariance(h, hp, PairingMatrix.identity(n))
        q = int(rng.integers(1, min(d, dp) + 1))
        res = truncated_svd(c, q)
        obj = np.trace(res.left.T @ c @ res.right)
        ref = np.sort(singular_values_via_jacobi(c))[::-1][:q].sum()
        worst_rel = max(worst_rel, abs(obj - ref) / ref)
        for _ in range(50):
            w, wp = random_orthonormal(rng, d, q), random_orthonormal(rng, dp, q)
            if np.trace(w.T @ c @ wp) > obj + 1e-12 * ref:
                dominated = False
    elapsed = time.perf_counter() - t0
    ok = worst_rel <= 1e-9 and dominated and elapsed < 5
    verdict(1, ok, f"max rel err {worst_rel:.2e}, dominates random pairs: {dominated}, {elapsed:.2f}s")


def test_assignment_oracle_equivalence(verdict):
    rng = np.random.default_rng(2)
    t0 = time.perf_counter()
    mismatches = 0
    count = 600
    for k in range(count):
        small = int(rng.integers(1, 7))
        large = int(rng.integers(small, 8))
        shape = (small, large) if k % 2 else (large, small)
        if k % 3 == 0:
            s = rng.integers(-3, 4, size=shape).astype(float)  # many ties
        else:
            s = rng.normal(size=shape)
        if solve_max_assignment(s).total != brute_force_assignment(s).total:
            mismatches += 1
    elapsed = time.perf_counter() - t0
    ok = mismatches == 0 and elapsed < 10
    verdict(2, ok, f"{count} instances, {mismatches} total mismatches, {elapsed:.2f}s")


def test_dmca_monotone_and_converges(verdict):
    t0 = time.perf_counter()
    monotone, converged = 0, 0
    for seed in range(50):
        ds, _ = synth_generate(SynthConfig(classes=4, per_class=8, latent=3, vision_dim=6, tactile_dim=5,
                                           nuisance=3, noise=0.3, seed=seed))
        _, _, trace = dmca_fit(ds.feature_matrix("vision"), ds.feature_matrix("tactile"),
                               ds.labels("vision"), ds.labels("tactile"), 3, DmcaConfig(seed=seed))
        obj = np.asarray(trace.objectives)
        monotone += bool(np.all(np.diff(obj) >= -1e-9 * np.abs(obj[:-1]).clip(1.0)))
        converged += trace.converged and trace.iterations <= 50
    elapsed = time.perf_counter() - t0
    ok = monotone == 50 and converged >= 48 and elapsed < 60
    verdict(3, ok, f"monotone {monotone}/50, converged {converged}/50, {elapsed:.2f}s")


def test_singleton_reduction(verdict):
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(20):
        n = int(rng.integers(3, 15))
        d, dp = rng.integers(2, 7, size=2)
        h, hp = rng.normal(size=(d, n)), rng.normal(size=(dp, n))
        q = int(rng.integers(1, min(d, dp) + 1))
        order = rng.permutation(n)
        _, _, trace = dmca_fit(h, hp, np.arange(n), order, q)
        forced = PairingMatrix(np.stack([np.arange(n), order.argsort()], axis=1), n, n)
        worst = max(worst, abs(trace.objectives[-1] - mca_fit(h, hp, forced, q).sigma.sum()))
    verdict(4, worst <= 1e-8, f"20 instances, max abs gap {worst:.2e}")


def test_ground_truth_recovery(verdict):
    worst = 0.0
    for seed in range(20):
        ds, truth = synth_generate(SynthConfig(classes=2, per_class=3, latent=2, vision_dim=4, tactile_dim=4,
                                               nuisance=0, noise=0.0, seed=seed))
        h, hp = ds.feature_matrix("vision"), ds.feature_matrix("tactile")
        _, _, trace = dmca_fit(h, hp, ds.labels("vision"), ds.labels("tactile"), 2,
                               DmcaConfig(seed=seed, n_init=20))
        ref = mca_fit(h, hp, PairingMatrix(np.array(truth), 6, 6), 2).sigma.sum()
        worst = max(worst, abs(trace.objectives[-1] - ref))
    verdict(5, worst <= 1e-6, f"20 seeds (n_init=20), max objective gap {worst:.2e}")


def test_benchmark_ordering(verdict, bench):
    uni, cross, shared, elapsed = bench
    frozen = uni == FROZEN["unimodal"] and cross == FROZEN["crossmodal"] and shared == FROZEN["shared"]
    ok = shared[16] >= uni >= cross and shared[16] - cross >= 0.30 and frozen and elapsed < 120
    verdict(6, ok, f"shared@16 {shared[16]:.4f} >= unimodal {uni:.4f} >= cross {cross:.4f}, "
                   f"gap {shared[16] - cross:.4f}, matches frozen: {frozen}, {elapsed:.2f}s")


def test_benchmark_plateau(verdict, bench):
    _, _, shared, _ = bench
    delta = shared[32] - shared[16]
    verdict(7, delta <= 0.05, f"acc(32) - acc(16) = {delta:+.4f}")


def test_cli_determinism(verdict, tmp_path):
    runs = []
    for r in range(2):
        d = tmp_path / f"run{r}"
        d.mkdir()
        codes = [
            main(["synth", "--seed", "42", "--classes", "10", "--per-class", "30", "--latent", "8",
                  "--nuisance", "24", "--noise", "0.3", "--out", str(d / "ds.json")]),
            main(["fit", "--dataset", str(d / "ds.json"), "--dim", "16", "--seed", "7", "--out", str(d / "model.dmca")]),
            main(["sweep", "--dataset", str(d / "ds.json"), "--dims", "2,4,8,16,32", "--seed", "7",
                  "--test-modality", "tactile", "--out", str(d / "report.json")]),
            main(["eval", "--dataset", str(d / "ds.json"), "--mode", "cross", "--train-modality", "vision",
                  "--test-modality", "tactile", "--out", str(d / "cross.json")]),
        ]
        assert codes == [0, 0, 0, 0]
        runs.append({f: (d / f).read_bytes() for f in ("ds.json", "model.dmca", "report.json", "cross.json")})
    same = [f for f in runs[0] if runs[0][f] == runs[1][f]]
    load_model(tmp_path / "run0" / "model.dmca")
    verdict(8, len(same) == 4, f"byte-identical outputs: {sorted(same)}")


def test_format_round_trips(verdict):
    rng = np.random.default_rng(9)
    dmat_ok = manifest_ok = 0
    for k in range(100):
        m = rng.normal(size=tuple(rng.integers(1, 10, size=2))) * 10.0 ** rng.integers(-8, 9)
        dmat_ok += load_feature_matrix(dump_dmat(m)).tobytes() == m.tobytes()
        ds, _ = synth_generate(SynthConfig(classes=int(rng.integers(1, 4)), per_class=int(rng.integers(1, 4)),
                                           latent=1, vision_dim=2, tactile_dim=3, nuisance=1, seed=k))
        buf = io.StringIO()
        save_manifest(ds, buf)
        manifest_ok += loads_manifest(buf.getvalue()) == ds

    rejected = []
    good = dump_dmat(np.ones((2, 2)))
    for blob in (b"DMAX" + good[4:], good[:-3], good + b"\x00"):
        try:
            load_feature_matrix(blob)
        except FormatError:
            rejected.append("FormatError")
    for text in ("{", '{"classes": []}', '{"classes": [], "samples": [{"id": 0, "modality": "x"}]}'):
        try:
            loads_manifest(text)
        except ManifestError:
            rejected.append("ManifestError")
    ok = dmat_ok == 100 and manifest_ok == 100 and len(rejected) == 6
    verdict(9, ok, f"DMAT {dmat_ok}/100, manifest {manifest_ok}/100, malformed rejected {len(rejected)}/6")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
