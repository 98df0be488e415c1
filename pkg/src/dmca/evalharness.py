"""
Classifiers and the three evaluation protocols.

* unimodal: train and test on the same modality's raw features;
* cross-modal: train on one modality's raw features, test on the other;
* shared: fit weakly-paired MCA on the training split, classify in the
  shared space for a sweep of latent dimensions.
"""

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from . import matcore
from .dataset import SplitSpec, split_train_test
from .errors import DataError, DimensionError, ShapeError, TrainError
from .features import FeatureExtractor
from .mca import DmcaConfig, dmca_fit, project_modality


@dataclass(frozen=True)
class ClassifierConfig:
    kind: str = "knn"
    k: int = 1

    def __post_init__(self):
        if self.kind not in ("knn", "centroid"):
            raise ValueError(f"unknown classifier kind {self.kind!r}")
        if self.k < 1:
            raise ValueError("k must be >= 1")


@dataclass(frozen=True, eq=False)
class Classifier:
    """Euclidean k-NN (stores the training set) or nearest-centroid."""

    kind: str
    k: int
    vectors: np.ndarray
    labels: np.ndarray

    def predict(self, features):
        x = matcore.as_feature_matrix(features)
        if x.shape[0] != self.vectors.shape[0]:
            raise ShapeError(f"features have dim {x.shape[0]}, classifier expects {self.vectors.shape[0]}")
        d = pairwise_sq_distances(self.vectors, x)
        if self.kind == "centroid":
            return self.labels[np.argmin(d, axis=0)]
        k = min(self.k, self.vectors.shape[1])
        order = np.argsort(d, axis=0, kind="stable")[:k]
        preds = np.empty(x.shape[1], dtype=self.labels.dtype)
        for col in range(x.shape[1]):
            near = self.labels[order[:, col]]
            values, first, counts = np.unique(near, return_index=True, return_counts=True)
            # most votes; ties go to the label whose nearest member ranks first
            best = np.lexsort((first, -counts))[0]
            preds[col] = values[best]
        return preds


def pairwise_sq_distances(a, b):
    """``(count_a, count_b)`` squared Euclidean distances between columns."""
    # explicit differences, not the Gram expansion: exact zeros for duplicates
    out = np.empty((a.shape[1], b.shape[1]))
    for j in range(b.shape[1]):
        diff = a - b[:, j : j + 1]
        out[:, j] = np.einsum("ij,ij->j", diff, diff)
    return out


def fit_classifier(features, labels, config=None, classes=None):
    """Fit on a ``(dim, count)`` matrix; ``classes`` optionally declares the
    label set, every member of which needs a sample for the centroid kind."""
    config = config or ClassifierConfig()
    x = matcore.as_feature_matrix(features)
    y = np.asarray(labels)
    if y.shape != (x.shape[1],):
        raise ShapeError(f"{x.shape[1]} samples but {y.size} labels")
    if config.kind == "knn":
        return Classifier("knn", config.k, x.copy(), y.copy())
    classes = np.unique(y) if classes is None else np.asarray(sorted(classes))
    missing = sorted(set(classes.tolist()) - set(y.tolist()))
    if missing:
        raise TrainError(f"declared classes without training samples: {missing}")
    centroids = np.stack([x[:, y == c].mean(axis=1) for c in classes], axis=1)
    return Classifier("centroid", 1, centroids, classes)


def accuracy(pred, true):
    pred = np.asarray(pred)
    true = np.asarray(true)
    if pred.shape != true.shape or pred.ndim != 1:
        raise ShapeError(f"label vectors differ in shape: {pred.shape} vs {true.shape}")
    if pred.size == 0:
        raise ShapeError("accuracy of an empty label set")
    return float(np.mean(pred == true))


@dataclass
class EvalReport:
    mode: str
    train_modality: str
    test_modality: str
    accuracies: list
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        dims = [q for q, _ in self.accuracies]
        if any(b <= a for a, b in zip(dims, dims[1:])):
            raise ValueError("report dimensions must be strictly increasing")
        if any(not 0.0 <= acc <= 1.0 for _, acc in self.accuracies):
            raise ValueError("accuracies must lie in [0, 1]")

    def to_dict(self):
        d = asdict(self)
        d["accuracies"] = [{"q": int(q), "accuracy": float(a)} for q, a in self.accuracies]
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_dict(cls, d):
        return cls(
            d["mode"],
            d["train_modality"],
            d["test_modality"],
            [(e["q"], e["accuracy"]) for e in d["accuracies"]],
            d.get("config", {}),
        )

    def accuracy_at(self, q):
        return dict(self.accuracies)[q]


def _require(ds, modality, which):
    if not ds.by_modality(modality):
        raise DataError(f"{which} split has no {modality} samples")


def _echo(train, test, **extra):
    cfg = {"train_digest": train.digest(), "test_digest": test.digest()}
    cfg.update(extra)
    return cfg


def run_unimodal(train, test, modality, extractor=None, classifier=None):
    extractor = extractor or FeatureExtractor()
    classifier = classifier or ClassifierConfig()
    _require(train, modality, "train")
    _require(test, modality, "test")
    xtr = train.feature_matrix(modality, extractor)
    xte = test.feature_matrix(modality, extractor)
    clf = fit_classifier(xtr, train.labels(modality), classifier)
    acc = accuracy(clf.predict(xte), test.labels(modality))
    cfg = _echo(train, test, extractor=extractor.describe(), classifier=asdict(classifier))
    return EvalReport("unimodal", modality, modality, [(xtr.shape[0], acc)], cfg)


def run_crossmodal(train, test, train_modality, test_modality, extractor=None, classifier=None):
    """Raw-feature transfer; both modalities must share a feature dimension."""
    extractor = extractor or FeatureExtractor()
    classifier = classifier or ClassifierConfig()
    _require(train, train_modality, "train")
    _require(test, test_modality, "test")
    xtr = train.feature_matrix(train_modality, extractor)
    xte = test.feature_matrix(test_modality, extractor)
    if xtr.shape[0] != xte.shape[0]:
        raise DataError(
            f"{train_modality} features have dim {xtr.shape[0]} but {test_modality} "
            f"features have dim {xte.shape[0]}; raw cross-modal transfer needs a common space"
        )
    clf = fit_classifier(xtr, train.labels(train_modality), classifier)
    acc = accuracy(clf.predict(xte), test.labels(test_modality))
    cfg = _echo(train, test, extractor=extractor.describe(), classifier=asdict(classifier))
    return EvalReport("crossmodal", train_modality, test_modality, [(xtr.shape[0], acc)], cfg)


def run_shared_sweep(
    train,
    test,
    dims,
    extractors=None,
    dmca=None,
    classifier=None,
    test_modality="tactile",
    train_on="both",
    whiten=False,
):
    """Accuracy against shared-space dimension.

    For each ``q`` a weakly-paired MCA model is fitted on ``train`` (the
    class id is the pairing group), training samples are projected and
    pooled (``train_on="both"``) or restricted to the test modality, and
    the test modality's test samples are classified in the shared space.
    ``whiten`` divides shared coordinates by the square root of the
    singular values.
    """
    dims = sorted(set(int(q) for q in dims))
    if not dims:
        raise DimensionError("empty dimension list")
    ext_v, ext_t = extractors or (FeatureExtractor(), FeatureExtractor())
    dmca = dmca or DmcaConfig()
    classifier = classifier or ClassifierConfig()
    if train_on not in ("both", "vision", "tactile"):
        raise ValueError(f"train_on must be 'both', 'vision' or 'tactile', got {train_on!r}")
    for m in ("vision", "tactile"):
        _require(train, m, "train")
    _require(test, test_modality, "test")

    hv = train.feature_matrix("vision", ext_v)
    ht = train.feature_matrix("tactile", ext_t)
    yv, yt = train.labels("vision"), train.labels("tactile")
    xte = test.feature_matrix(test_modality, ext_v if test_modality == "vision" else ext_t)
    yte = test.labels(test_modality)

    results, fits = [], []
    for q in dims:
        proj, pairing, trace = dmca_fit(hv, ht, yv, yt, q, dmca)
        pv = project_modality(proj, hv, "vision")
        pt = project_modality(proj, ht, "tactile")
        pte = project_modality(proj, xte, test_modality)
        if whiten:
            w = 1.0 / np.sqrt(np.maximum(proj.sigma, 1e-12))[:, None]
            pv, pt, pte = pv * w, pt * w, pte * w
        if train_on == "both":
            xtr, ytr = np.hstack([pv, pt]), np.concatenate([yv, yt])
        elif train_on == "vision":
            xtr, ytr = pv, yv
        else:
            xtr, ytr = pt, yt
        clf = fit_classifier(xtr, ytr, classifier)
        results.append((q, accuracy(clf.predict(pte), yte)))
        fits.append({"q": q, "iterations": trace.iterations, "converged": trace.converged,
                     "objective": trace.objectives[-1]})

    cfg = _echo(
        train,
        test,
        extractors={"vision": ext_v.describe(), "tactile": ext_t.describe()},
        dmca=asdict(dmca),
        classifier=asdict(classifier),
        train_on=train_on,
        whiten=whiten,
        fits=fits,
    )
    train_modality = "both" if train_on == "both" else train_on
    return EvalReport("shared", train_modality, test_modality, results, cfg)


MODES = ("unimodal", "crossmodal", "shared")


def run_protocol(
    dataset,
    mode,
    split=None,
    *,
    train_modality="vision",
    test_modality="tactile",
    dims=(16,),
    extractor=None,
    dmca=None,
    classifier=None,
    train_on="both",
    whiten=False,
):
    """Split ``dataset`` and run one protocol; the split settings are echoed
    into the report's config."""
    split = split or SplitSpec()
    train, test = split_train_test(dataset, split)
    if mode == "unimodal":
        report = run_unimodal(train, test, test_modality, extractor, classifier)
    elif mode == "crossmodal":
        report = run_crossmodal(train, test, train_modality, test_modality, extractor, classifier)
    elif mode == "shared":
        ext = extractor or FeatureExtractor()
        report = run_shared_sweep(
            train, test, dims, (ext, ext), dmca, classifier, test_modality, train_on, whiten
        )
    else:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    report.config["dataset_digest"] = dataset.digest()
    report.config["split"] = asdict(split)
    return report
