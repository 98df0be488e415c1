"""
Weakly-paired two-modality datasets: manifest I/O, stratified splits and a
synthetic latent-factor generator.

The manifest is JSON::

    {"classes": [{"id": 0, "name": "denim"}, ...],
     "samples": [{"id": 0, "modality": "vision", "class_id": 0,
                  "path": "img/0.pgm"}, ...]}

Each sample carries exactly one of ``path`` (a PGM file, relative to the
manifest's directory) or ``features`` (an inline list of floats). The class
of a sample is its weak-pairing group.
"""

import hashlib
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, ManifestError, SplitError
from .features import FeatureExtractor, load_pgm

MODALITIES = ("vision", "tactile")


@dataclass(frozen=True)
class Sample:
    id: int
    modality: str
    class_id: int
    path: str = None
    features: tuple = None


@dataclass(frozen=True)
class WeaklyPairedDataset:
    classes: tuple
    samples: tuple
    root: str = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "classes", tuple((int(i), str(n)) for i, n in self.classes))
        object.__setattr__(self, "samples", tuple(self.samples))
        _validate(self)

    @property
    def class_ids(self):
        return [cid for cid, _ in self.classes]

    def by_modality(self, modality):
        if modality not in MODALITIES:
            raise DataError(f"unknown modality {modality!r}")
        return [s for s in self.samples if s.modality == modality]

    def labels(self, modality):
        return np.array([s.class_id for s in self.by_modality(modality)], dtype=np.int64)

    def feature_matrix(self, modality, extractor=None):
        """Stack one modality's samples into a ``(dim, count)`` matrix."""
        extractor = extractor or FeatureExtractor()
        samples = self.by_modality(modality)
        if not samples:
            raise DataError(f"dataset has no {modality} samples")
        return extractor.batch(self._load(s) for s in samples)

    def _load(self, s):
        if s.features is not None:
            return np.asarray(s.features, dtype=np.float64)
        path = s.path
        if self.root is not None and not os.path.isabs(path):
            path = os.path.join(self.root, path)
        return load_pgm(path)

    def subset(self, ids):
        keep = set(ids)
        return WeaklyPairedDataset(self.classes, [s for s in self.samples if s.id in keep], self.root)

    def to_dict(self):
        samples = []
        for s in self.samples:
            d = {"id": s.id, "modality": s.modality, "class_id": s.class_id}
            if s.path is not None:
                d["path"] = s.path
            else:
                d["features"] = list(s.features)
            samples.append(d)
        return {"classes": [{"id": i, "name": n} for i, n in self.classes], "samples": samples}

    def digest(self):
        """SHA-256 of the canonical manifest JSON."""
        return hashlib.sha256(dumps_manifest(self).encode()).hexdigest()


def _validate(ds):
    ids = [cid for cid, _ in ds.classes]
    if len(set(ids)) != len(ids):
        raise ManifestError("duplicate class id")
    known = set(ids)
    seen = set()
    populated = set()
    for s in ds.samples:
        if s.id in seen:
            raise ManifestError(f"duplicate sample id {s.id}")
        seen.add(s.id)
        if s.modality not in MODALITIES:
            raise ManifestError(f"sample {s.id}: unknown modality {s.modality!r}")
        if s.class_id not in known:
            raise ManifestError(f"sample {s.id}: unknown class id {s.class_id}")
        if (s.path is None) == (s.features is None):
            raise ManifestError(f"sample {s.id}: exactly one of path/features is required")
        if s.features is not None:
            if len(s.features) == 0 or not all(math.isfinite(x) for x in s.features):
                raise ManifestError(f"sample {s.id}: features must be a non-empty finite list")
        populated.add(s.class_id)
    empty = known - populated
    if empty:
        raise ManifestError(f"classes without samples: {sorted(empty)}")


def _int_field(d, key, where):
    v = d.get(key)
    if not isinstance(v, int) or isinstance(v, bool):
        raise ManifestError(f"{where}: field {key!r} must be an integer")
    return v


def manifest_from_dict(obj, root=None):
    if not isinstance(obj, dict):
        raise ManifestError("manifest must be a JSON object")
    for key in ("classes", "samples"):
        if not isinstance(obj.get(key), list):
            raise ManifestError(f"manifest field {key!r} missing or not a list")
    classes = []
    for k, c in enumerate(obj["classes"]):
        if not isinstance(c, dict) or not isinstance(c.get("name"), str):
            raise ManifestError(f"class #{k}: needs integer 'id' and string 'name'")
        classes.append((_int_field(c, "id", f"class #{k}"), c["name"]))
    samples = []
    for k, s in enumerate(obj["samples"]):
        if not isinstance(s, dict):
            raise ManifestError(f"sample #{k} is not an object")
        where = f"sample #{k}"
        modality = s.get("modality")
        if not isinstance(modality, str):
            raise ManifestError(f"{where}: missing modality")
        path = s.get("path")
        feats = s.get("features")
        if path is not None and not isinstance(path, str):
            raise ManifestError(f"{where}: path must be a string")
        if feats is not None:
            if not isinstance(feats, list) or not all(
                isinstance(x, (int, float)) and not isinstance(x, bool) for x in feats
            ):
                raise ManifestError(f"{where}: features must be a list of numbers")
            feats = tuple(float(x) for x in feats)
        samples.append(
            Sample(_int_field(s, "id", where), modality, _int_field(s, "class_id", where), path, feats)
        )
    return WeaklyPairedDataset(classes, samples, root)


def dumps_manifest(ds):
    return json.dumps(ds.to_dict(), sort_keys=True, separators=(",", ":"))


def loads_manifest(text, root=None):
    try:
        obj = json.loads(text)
    except ValueError as exc:
        raise ManifestError(f"invalid JSON: {exc}") from None
    return manifest_from_dict(obj, root)


def load_manifest(source):
    """Load from a path or a text file object; relative sample paths resolve against the file."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
        return loads_manifest(text, os.path.dirname(os.path.abspath(source)))
    return loads_manifest(source.read())


def save_manifest(ds, sink):
    text = dumps_manifest(ds) + "\n"
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sink.write(text)


# -- splitting -------------------------------------------------------------------


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.9
    seed: int = 0
    cap_per_cell: int = None

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise SplitError(f"train fraction must lie in (0, 1), got {self.train_fraction}")
        if self.cap_per_cell is not None and self.cap_per_cell < 2:
            raise SplitError("cap_per_cell must be >= 2")


def n_train(k, fraction):
    """Training share of a cell of ``k`` samples; both sides stay nonempty."""
    # the epsilon keeps e.g. 0.9 * 10 from rounding up to 10
    return max(1, min(math.ceil(fraction * k - 1e-9), k - 1))


def split_train_test(ds, spec=None):
    """Stratified split per (class, modality) cell, shuffled with a seed.

    ``cap_per_cell`` optionally subsamples large cells before the cut.
    """
    spec = spec or SplitSpec()
    rng = np.random.default_rng(spec.seed)
    cells = {}
    for s in ds.samples:
        cells.setdefault((s.class_id, MODALITIES.index(s.modality)), []).append(s.id)
    train, test = [], []
    for key in sorted(cells):
        ids = sorted(cells[key])
        if len(ids) < 2:
            raise SplitError(f"cell (class {key[0]}, {MODALITIES[key[1]]}) has {len(ids)} sample(s); need >= 2")
        order = [ids[i] for i in rng.permutation(len(ids))]
        if spec.cap_per_cell is not None:
            order = order[: spec.cap_per_cell]
        cut = n_train(len(order), spec.train_fraction)
        train.extend(order[:cut])
        test.extend(order[cut:])
    return ds.subset(train), ds.subset(test)


# -- synthetic data --------------------------------------------------------------


@dataclass(frozen=True)
class SynthConfig:
    """Latent-factor generator settings.

    Each class has a latent centre ``z_c ~ N(0, I)``; every sample draws
    ``z = z_c + N(0, 0.25 I)`` (``within_class_std`` = 0.5). Vision features are ``A z + noise`` followed
    by ``nuisance`` independent N(0, 1) dims, tactile features likewise with
    their own ``B`` and nuisance. With ``mix=True`` each modality's full
    vector is additionally rotated by a random orthogonal matrix.
    """

    classes: int = 10
    per_class: int = 30
    latent: int = 8
    vision_dim: int = 32
    tactile_dim: int = 32
    nuisance: int = 24
    noise: float = 0.3
    seed: int = 0
    mix: bool = False
    shared_generator: bool = False
    within_class_std: float = 0.5

    def __post_init__(self):
        for name in ("classes", "per_class", "latent", "vision_dim", "tactile_dim"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.nuisance < 0 or self.noise < 0 or self.within_class_std < 0:
            raise ValueError("nuisance, noise and within_class_std must be nonnegative")
        if self.latent > min(self.vision_dim, self.tactile_dim):
            raise ValueError("latent dimension exceeds a modality dimension")
        if self.shared_generator and self.vision_dim != self.tactile_dim:
            raise ValueError("shared_generator needs equal modality dimensions")


def _orthonormal_columns(rng, rows, cols):
    q, r = np.linalg.qr(rng.standard_normal((rows, cols)))
    return q * np.where(np.diag(r) < 0, -1.0, 1.0)


def synth_generate(cfg):
    """Generate a weakly-paired dataset with inline features.

    Returns ``(dataset, truth)`` where ``truth`` is a list of
    ``(vision_index, tactile_index)`` pairs (indices within each modality's
    sample order) that share the same latent draw. Tactile samples are
    shuffled within each class.

    With ``shared_generator=True`` both modalities use the same ``A`` and
    the same per-sample nuisance, so they are statistically identical.
    """
    rng = np.random.default_rng(cfg.seed)
    a = _orthonormal_columns(rng, cfg.vision_dim, cfg.latent)
    b = a if cfg.shared_generator else _orthonormal_columns(rng, cfg.tactile_dim, cfg.latent)
    mix_v = mix_t = None
    if cfg.mix:
        mix_v = _orthonormal_columns(rng, cfg.vision_dim + cfg.nuisance, cfg.vision_dim + cfg.nuisance)
        mix_t = mix_v if cfg.shared_generator else _orthonormal_columns(
            rng, cfg.tactile_dim + cfg.nuisance, cfg.tactile_dim + cfg.nuisance
        )

    n = cfg.per_class
    vision, tactile, truth = [], [], []
    for c in range(cfg.classes):
        centre = rng.standard_normal(cfg.latent)
        z = centre[:, None] + cfg.within_class_std * rng.standard_normal((cfg.latent, n))
        xv = a @ z + cfg.noise * rng.standard_normal((cfg.vision_dim, n))
        nv = rng.standard_normal((cfg.nuisance, n))
        xt = b @ z + cfg.noise * rng.standard_normal((cfg.tactile_dim, n))
        nt = nv if cfg.shared_generator else rng.standard_normal((cfg.nuisance, n))
        xv = np.vstack([xv, nv])
        xt = np.vstack([xt, nt])
        if mix_v is not None:
            xv, xt = mix_v @ xv, mix_t @ xt
        perm = rng.permutation(n)
        base = c * n
        for k in range(n):
            vision.append((c, xv[:, k]))
        for pos in range(n):
            tactile.append((c, xt[:, perm[pos]]))
            truth.append((base + int(perm[pos]), base + pos))

    samples = []
    for modality, rows in (("vision", vision), ("tactile", tactile)):
        for c, x in rows:
            samples.append(Sample(len(samples), modality, c, None, tuple(float(v) for v in x)))
    classes = [(c, f"class{c:02d}") for c in range(cfg.classes)]
    truth.sort()
    return WeaklyPairedDataset(classes, samples), truth
