"""
Dense matrix primitives: centering, cross-covariance, truncated SVD and PCA.

Feature matrices are stored one sample per *column*: a ``(dim, count)``
float64 array.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InvalidData, NumericalError, ShapeError


def as_feature_matrix(data, name="matrix"):
    """Validate and return ``data`` as a finite 2-D float64 array."""
    m = np.asarray(data, dtype=np.float64)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {m.shape}")
    if m.shape[0] < 1 or m.shape[1] < 1:
        raise ShapeError(f"{name} must have dim >= 1 and count >= 1, got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidData(f"{name} contains NaN or Inf")
    return m


def center_columns(m):
    """Subtract the per-row mean.

    Returns ``(centered, mean)`` where ``mean`` has length ``m.shape[0]``.
    """
    m = as_feature_matrix(m)
    mean = m.mean(axis=1)
    centered = m - mean[:, None]
    # second pass removes the rounding residue of the first
    centered -= centered.mean(axis=1)[:, None]
    return centered, mean


def row_scales(m):
    """Per-row standard deviation, with zero-variance rows mapped to 1."""
    m = as_feature_matrix(m)
    s = m.std(axis=1)
    s[s == 0] = 1.0
    return s


def cross_covariance(a, b, pairing):
    """Unscaled cross-product ``a @ P @ b.T`` over the matched pairs.

    ``pairing`` is anything exposing ``pairs`` (k x 2 int array), ``n`` and
    ``n_prime``; a dense 0/1 array is accepted too.
    """
    a = as_feature_matrix(a, "a")
    b = as_feature_matrix(b, "b")
    if isinstance(pairing, np.ndarray):
        p = np.asarray(pairing, dtype=np.float64)
        if p.shape != (a.shape[1], b.shape[1]):
            raise ShapeError(f"pairing shape {p.shape} does not match ({a.shape[1]}, {b.shape[1]})")
        return a @ p @ b.T
    if (pairing.n, pairing.n_prime) != (a.shape[1], b.shape[1]):
        raise ShapeError(
            f"pairing is {pairing.n} x {pairing.n_prime}, matrices have "
            f"{a.shape[1]} and {b.shape[1]} samples"
        )
    pairs = pairing.pairs
    if len(pairs) == 0:
        return np.zeros((a.shape[0], b.shape[0]))
    return a[:, pairs[:, 0]] @ b[:, pairs[:, 1]].T


def _fix_signs(left, right):
    # largest-magnitude entry of each left column made nonnegative
    idx = np.argmax(np.abs(left), axis=0)
    signs = np.sign(left[idx, np.arange(left.shape[1])])
    signs[signs == 0] = 1.0
    return left * signs, right * signs


@dataclass(frozen=True)
class SvdResult:
    left: np.ndarray
    right: np.ndarray
    sigma: np.ndarray

    @property
    def q(self):
        return len(self.sigma)


def truncated_svd(c, q):
    """Top-``q`` singular triplets of ``c`` with a deterministic sign convention.

    ``sigma.sum()`` is the maximum of ``tr(W.T @ c @ W')`` over
    column-orthonormal ``W``, ``W'`` of width ``q``.
    """
    c = np.asarray(c, dtype=np.float64)
    if c.ndim != 2:
        raise ShapeError(f"expected a 2-D matrix, got shape {c.shape}")
    if not np.all(np.isfinite(c)):
        raise InvalidData("matrix contains NaN or Inf")
    if not isinstance(q, (int, np.integer)) or q < 1 or q > min(c.shape):
        raise DimensionError(f"q={q} outside [1, {min(c.shape)}]")
    try:
        u, s, vt = np.linalg.svd(c, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD did not converge: {exc}") from exc
    left, right = _fix_signs(u[:, :q], vt[:q].T)
    sigma = np.clip(s[:q], 0.0, None)
    return SvdResult(np.ascontiguousarray(left), np.ascontiguousarray(right), sigma)


def pca_fit(m, q):
    """Top-``q`` eigenvectors of the centered sample covariance (dim x q)."""
    m = as_feature_matrix(m)
    dim, count = m.shape
    if not isinstance(q, (int, np.integer)) or q < 1 or q > min(dim, count - 1):
        raise DimensionError(f"q={q} outside [1, {min(dim, count - 1)}]")
    centered, _ = center_columns(m)
    cov = centered @ centered.T / (count - 1)
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals, kind="stable")[::-1][:q]
    basis, _ = _fix_signs(evecs[:, order], evecs[:, order])
    return np.ascontiguousarray(basis)


def project(basis, m, mean):
    """Map each column ``x`` of ``m`` to ``basis.T @ (x - mean)``."""
    basis = np.asarray(basis, dtype=np.float64)
    m = as_feature_matrix(m)
    mean = np.asarray(mean, dtype=np.float64).ravel()
    if basis.ndim != 2 or basis.shape[0] != m.shape[0] or mean.shape[0] != m.shape[0]:
        raise ShapeError(
            f"basis {basis.shape}, matrix {m.shape} and mean {mean.shape} are inconsistent"
        )
    return basis.T @ (m - mean[:, None])
