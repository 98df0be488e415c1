"""
Maximum covariance analysis for fully and weakly paired data.

Both modalities are projected into a shared ``q``-dimensional space by
``W`` and ``W'`` maximising ``tr(W.T H P H'.T W')``, where ``P`` pairs
vision samples with tactile samples. With weak pairing only the group
(class) of each sample is known; ``dmca_fit`` alternates between the SVD
step (``P`` fixed) and a per-group linear assignment step (``W``, ``W'``
fixed).
"""

import json
import os
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import matcore
from .assign import solve_max_assignment
from .errors import DimensionError, EmptyPairing, FormatError, ShapeError
from .features import dump_dmat, parse_dmat

MODEL_FORMAT = "dmca-model"
MODEL_VERSION = 1


@dataclass(frozen=True, eq=False)
class PairingMatrix:
    """Sparse binary partial matching between ``n`` vision and ``n_prime`` tactile samples."""

    pairs: np.ndarray
    n: int
    n_prime: int

    def __post_init__(self):
        p = np.asarray(self.pairs, dtype=np.int64).reshape(-1, 2)
        if len(p):
            if p.min() < 0 or p[:, 0].max() >= self.n or p[:, 1].max() >= self.n_prime:
                raise ShapeError(f"pair index out of range for a {self.n} x {self.n_prime} pairing")
            if len(np.unique(p[:, 0])) != len(p) or len(np.unique(p[:, 1])) != len(p):
                raise ShapeError("a sample appears in more than one pair")
            p = p[np.lexsort((p[:, 1], p[:, 0]))]
        p.setflags(write=False)
        object.__setattr__(self, "pairs", p)

    @classmethod
    def identity(cls, n):
        return cls(np.stack([np.arange(n), np.arange(n)], axis=1), n, n)

    def __len__(self):
        return len(self.pairs)

    def __eq__(self, other):
        return (
            isinstance(other, PairingMatrix)
            and (self.n, self.n_prime) == (other.n, other.n_prime)
            and np.array_equal(self.pairs, other.pairs)
        )

    def as_set(self):
        return {(int(i), int(j)) for i, j in self.pairs}

    def to_dense(self):
        d = np.zeros((self.n, self.n_prime))
        d[self.pairs[:, 0], self.pairs[:, 1]] = 1.0
        return d

    def check_groups(self, groups, groups_prime):
        """Raise ``ShapeError`` if any pair crosses groups."""
        g = np.asarray(groups)
        gp = np.asarray(groups_prime)
        if len(self.pairs) and np.any(g[self.pairs[:, 0]] != gp[self.pairs[:, 1]]):
            raise ShapeError("pairing links samples of different groups")

    def changed_from(self, other):
        """Number of pairs present in exactly one of the two pairings."""
        return len(self.as_set() ^ other.as_set())


@dataclass(frozen=True, eq=False)
class ProjectionPair:
    w: np.ndarray
    w_prime: np.ndarray
    sigma: np.ndarray
    mean: np.ndarray
    mean_prime: np.ndarray
    scale: np.ndarray = None
    scale_prime: np.ndarray = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.scale is None:
            object.__setattr__(self, "scale", np.ones_like(self.mean))
        if self.scale_prime is None:
            object.__setattr__(self, "scale_prime", np.ones_like(self.mean_prime))
        for name in ("w", "w_prime", "sigma", "mean", "mean_prime", "scale", "scale_prime"):
            a = np.array(getattr(self, name), dtype=np.float64)
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        if self.w.shape[1] != self.w_prime.shape[1] or self.w.shape[1] != len(self.sigma):
            raise ShapeError("w, w_prime and sigma disagree on q")

    @property
    def q(self):
        return len(self.sigma)

    def __eq__(self, other):
        if not isinstance(other, ProjectionPair):
            return NotImplemented
        names = ("w", "w_prime", "sigma", "mean", "mean_prime", "scale", "scale_prime")
        return all(np.array_equal(getattr(self, n), getattr(other, n)) for n in names) and (
            self.meta == other.meta
        )


@dataclass
class DmcaTrace:
    objectives: list = field(default_factory=list)
    pairings_changed: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = False


@dataclass(frozen=True)
class DmcaConfig:
    """Alternating-optimisation settings.

    ``tol`` is relative to the current objective. ``init`` is ``"random"``
    (seeded shuffle within each group) or ``"identity"`` (collection order).
    ``n_init > 1`` reruns the alternation from further seeded random starts
    and keeps the run with the highest final objective.
    """

    max_iters: int = 50
    tol: float = 1e-7
    seed: int = 0
    init: str = "random"
    allow_unmatched: bool = False
    standardize: bool = False
    n_init: int = 1


def _normalise(m, mean, scale):
    return (m - mean[:, None]) / scale[:, None]


def _stats(m, standardize):
    _, mean = matcore.center_columns(m)
    scale = matcore.row_scales(m) if standardize else np.ones(m.shape[0])
    return mean, scale


def _check_pairing(h, h_prime, pairing):
    if (pairing.n, pairing.n_prime) != (h.shape[1], h_prime.shape[1]):
        raise ShapeError(
            f"pairing is {pairing.n} x {pairing.n_prime} but data has "
            f"{h.shape[1]} and {h_prime.shape[1]} samples"
        )


def _svd_step(hn, hpn, pairing, q):
    if len(pairing) == 0:
        raise EmptyPairing("pairing has no pairs")
    bound = min(hn.shape[0], hpn.shape[0], len(pairing))
    if not isinstance(q, (int, np.integer)) or q < 1 or q > bound:
        raise DimensionError(f"q={q} outside [1, {bound}]")
    c = matcore.cross_covariance(hn, hpn, pairing)
    return matcore.truncated_svd(c, q)


def mca_fit(h, h_prime, pairing, q, *, standardize=False, stats=None):
    """Fit ``W``, ``W'`` for a given pairing.

    Each modality is centred with its mean over *all* of its samples (and
    optionally scaled to unit variance) before forming ``H P H'.T``.
    ``stats`` may supply frozen ``(mean, scale, mean_prime, scale_prime)``.
    """
    h = matcore.as_feature_matrix(h, "h")
    h_prime = matcore.as_feature_matrix(h_prime, "h_prime")
    _check_pairing(h, h_prime, pairing)
    if stats is None:
        mean, scale = _stats(h, standardize)
        mean_p, scale_p = _stats(h_prime, standardize)
    else:
        mean, scale, mean_p, scale_p = stats
    svd = _svd_step(_normalise(h, mean, scale), _normalise(h_prime, mean_p, scale_p), pairing, q)
    return ProjectionPair(svd.left, svd.right, svd.sigma, mean, mean_p, scale, scale_p)


def project_modality(proj, m, modality):
    """Map a ``(dim, count)`` matrix of one modality into the shared space."""
    m = matcore.as_feature_matrix(m)
    if modality == "vision":
        w, mean, scale = proj.w, proj.mean, proj.scale
    elif modality == "tactile":
        w, mean, scale = proj.w_prime, proj.mean_prime, proj.scale_prime
    else:
        raise ValueError(f"modality must be 'vision' or 'tactile', got {modality!r}")
    if m.shape[0] != w.shape[0]:
        raise ShapeError(f"{modality} features have dim {m.shape[0]}, model expects {w.shape[0]}")
    return matcore.project(w / scale[:, None], m, mean)


def objective(h, h_prime, proj, pairing):
    """``tr(W.T H P H'.T W')`` over the matched pairs."""
    h = matcore.as_feature_matrix(h, "h")
    h_prime = matcore.as_feature_matrix(h_prime, "h_prime")
    _check_pairing(h, h_prime, pairing)
    if len(pairing) == 0:
        return 0.0
    a = project_modality(proj, h[:, pairing.pairs[:, 0]], "vision")
    b = project_modality(proj, h_prime[:, pairing.pairs[:, 1]], "tactile")
    return float(np.sum(a * b))


def _group_index(groups, groups_prime, h, h_prime):
    g = np.asarray(groups)
    gp = np.asarray(groups_prime)
    if g.shape != (h.shape[1],) or gp.shape != (h_prime.shape[1],):
        raise ShapeError("group labels must cover every sample of both modalities")
    out = []
    for label in sorted(set(g.tolist()) | set(gp.tolist())):
        iv = np.flatnonzero(g == label)
        it = np.flatnonzero(gp == label)
        out.append((label, iv, it))
    return out


def _assign(pv, pt, index, n, n_prime, allow_unmatched):
    pairs = []
    for label, iv, it in index:
        if len(iv) == 0 or len(it) == 0:
            warnings.warn(f"group {label!r} is present in only one modality; left unpaired", stacklevel=3)
            continue
        score = pv[:, iv].T @ pt[:, it]
        match = solve_max_assignment(score, allow_unmatched=allow_unmatched)
        pairs.extend((iv[i], it[j]) for i, j in match.pairs)
    return PairingMatrix(np.array(pairs, dtype=np.int64).reshape(-1, 2), n, n_prime)


def assignment_step(h, h_prime, proj, groups, groups_prime, allow_unmatched=False):
    """Best within-group pairing for fixed projections.

    For every group the score of pairing vision sample ``i`` with tactile
    sample ``j`` is the inner product of their shared-space coordinates;
    each group is solved as an independent assignment problem.
    """
    h = matcore.as_feature_matrix(h, "h")
    h_prime = matcore.as_feature_matrix(h_prime, "h_prime")
    index = _group_index(groups, groups_prime, h, h_prime)
    pv = project_modality(proj, h, "vision")
    pt = project_modality(proj, h_prime, "tactile")
    return _assign(pv, pt, index, h.shape[1], h_prime.shape[1], allow_unmatched)


def initial_pairing(index, n, n_prime, init="random", seed=0):
    rng = np.random.default_rng(seed)
    pairs = []
    for _, iv, it in index:
        if init == "random":
            iv = rng.permutation(iv)
            it = rng.permutation(it)
        elif init != "identity":
            raise ValueError(f"unknown init {init!r}")
        pairs.extend(zip(iv, it))
    return PairingMatrix(np.array(pairs, dtype=np.int64).reshape(-1, 2), n, n_prime)


def _alternate(hn, hpn, index, q, pairing, config):
    n, n_prime = hn.shape[1], hpn.shape[1]
    svd = _svd_step(hn, hpn, pairing, q)
    trace = DmcaTrace(objectives=[float(svd.sigma.sum())])
    for _ in range(config.max_iters):
        new = _assign(
            svd.left.T @ hn, svd.right.T @ hpn, index, n, n_prime, config.allow_unmatched
        )
        trace.iterations += 1
        changed = new.changed_from(pairing)
        trace.pairings_changed.append(changed)
        if changed == 0:
            trace.converged = True
            break
        pairing = new
        svd = _svd_step(hn, hpn, pairing, q)
        prev = trace.objectives[-1]
        trace.objectives.append(float(svd.sigma.sum()))
        if trace.objectives[-1] - prev < config.tol * max(1.0, abs(prev)):
            trace.converged = True
            break
    return svd, pairing, trace


def dmca_fit(h, h_prime, groups, groups_prime, q, config=None):
    """Weakly-paired MCA by alternating SVD and assignment steps.

    Returns ``(projection, pairing, trace)``. The normalisation statistics
    are computed once and frozen, so every step maximises the same
    objective and ``trace.objectives`` is nondecreasing.
    """
    config = config or DmcaConfig()
    if config.max_iters < 1 or config.n_init < 1:
        raise ValueError("max_iters and n_init must be >= 1")
    h = matcore.as_feature_matrix(h, "h")
    h_prime = matcore.as_feature_matrix(h_prime, "h_prime")
    index = _group_index(groups, groups_prime, h, h_prime)
    overlap = sum(min(len(iv), len(it)) for _, iv, it in index)
    if overlap == 0:
        raise EmptyPairing("no group has samples in both modalities")
    bound = min(h.shape[0], h_prime.shape[0], overlap)
    if not isinstance(q, (int, np.integer)) or q < 1 or q > bound:
        raise DimensionError(f"q={q} outside [1, {bound}]")

    mean, scale = _stats(h, config.standardize)
    mean_p, scale_p = _stats(h_prime, config.standardize)
    hn = _normalise(h, mean, scale)
    hpn = _normalise(h_prime, mean_p, scale_p)
    n, n_prime = h.shape[1], h_prime.shape[1]

    best = None
    for restart in range(config.n_init):
        seed = config.seed if restart == 0 else [config.seed, restart]
        start = initial_pairing(index, n, n_prime, config.init, seed)
        run = _alternate(hn, hpn, index, q, start, config)
        if best is None or run[2].objectives[-1] > best[2].objectives[-1]:
            best = run
    svd, pairing, trace = best

    meta = {
        "seed": int(config.seed),
        "iterations": trace.iterations,
        "objective": trace.objectives[-1],
        "converged": trace.converged,
        "max_iters": int(config.max_iters),
        "tol": float(config.tol),
        "init": config.init,
        "allow_unmatched": bool(config.allow_unmatched),
        "standardize": bool(config.standardize),
        "pairs": len(pairing),
        "n_init": int(config.n_init),
    }
    proj = ProjectionPair(svd.left, svd.right, svd.sigma, mean, mean_p, scale, scale_p, meta)
    return proj, pairing, trace


# -- persistence ---------------------------------------------------------------

_MODEL_BLOCKS = ("w", "w_prime", "sigma", "mean", "mean_prime", "scale", "scale_prime")


def dump_model(proj):
    """Serialise to bytes: one JSON header line, then one DMAT block per array.

    Vectors are stored as single-column matrices, in the order listed under
    ``"blocks"`` in the header.
    """
    header = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "q": proj.q,
        "dim": int(proj.w.shape[0]),
        "dim_prime": int(proj.w_prime.shape[0]),
        "blocks": list(_MODEL_BLOCKS),
        "meta": proj.meta,
    }
    blob = json.dumps(header, sort_keys=True).encode() + b"\n"
    for name in _MODEL_BLOCKS:
        a = getattr(proj, name)
        blob += dump_dmat(a if a.ndim == 2 else a.reshape(-1, 1))
    return blob


def parse_model(data):
    data = bytes(data)
    nl = data.find(b"\n")
    if nl < 0:
        raise FormatError("model file has no header line")
    try:
        header = json.loads(data[:nl])
    except ValueError as exc:
        raise FormatError(f"bad model header: {exc}") from None
    if not isinstance(header, dict) or header.get("format") != MODEL_FORMAT:
        raise FormatError("not a dmca model file")
    if header.get("version") != MODEL_VERSION:
        raise FormatError(f"unsupported model version {header.get('version')}")
    if header.get("blocks") != list(_MODEL_BLOCKS):
        raise FormatError("unexpected model block list")
    arrays = {}
    offset = nl + 1
    for name in _MODEL_BLOCKS:
        m, offset = parse_dmat(data, offset)
        arrays[name] = m if name in ("w", "w_prime") else m.ravel()
    if offset != len(data):
        raise FormatError("trailing bytes after model blocks")
    q = header.get("q")
    if arrays["w"].shape != (header.get("dim"), q) or arrays["w_prime"].shape != (header.get("dim_prime"), q):
        raise FormatError("model header disagrees with stored matrices")
    try:
        return ProjectionPair(meta=header.get("meta", {}), **arrays)
    except ShapeError as exc:
        raise FormatError(str(exc)) from None


def save_model(proj, path):
    with open(path, "wb") as fh:
        fh.write(dump_model(proj))


def load_model(path):
    if not isinstance(path, (str, os.PathLike)):
        return parse_model(path)
    with open(path, "rb") as fh:
        return parse_model(fh.read())

