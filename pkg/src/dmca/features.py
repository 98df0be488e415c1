"""
Image ingestion, resize/crop preprocessing, lightweight feature extractors
and feature-matrix file I/O.

Binary feature-matrix layout (``.dmat``)::

    b"DMAT"            4 bytes magic
    version            u32 little-endian, = 1
    rows, cols         u64 little-endian each
    values             rows*cols f64 little-endian, row-major

The CSV variant has a first line ``rows,cols`` followed by one matrix row
per line.
"""

import io
import math
import os
import struct
from dataclasses import dataclass

import numpy as np

from .errors import FormatError, ShapeError
from .matcore import as_feature_matrix

DMAT_MAGIC = b"DMAT"
DMAT_VERSION = 1
_DMAT_HEADER = struct.Struct("<4sIQQ")


@dataclass(frozen=True, eq=False)
class GrayImage:
    """8-bit grayscale image; ``pixels`` has shape ``(height, width)``."""

    pixels: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.pixels)
        if p.ndim != 2 or p.shape[0] < 1 or p.shape[1] < 1:
            raise ShapeError(f"image must be a non-empty 2-D array, got {p.shape}")
        p = p.astype(np.uint8, copy=True)
        p.setflags(write=False)
        object.__setattr__(self, "pixels", p)

    @property
    def width(self):
        return self.pixels.shape[1]

    @property
    def height(self):
        return self.pixels.shape[0]

    def __eq__(self, other):
        return isinstance(other, GrayImage) and np.array_equal(self.pixels, other.pixels)


# -- PGM ---------------------------------------------------------------------


def _pgm_tokens(data, count):
    """Read ``count`` whitespace-separated header tokens, skipping comments."""
    tokens = []
    pos = 0
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos : pos + 1].isspace():
            pos += 1
        if pos < n and data[pos : pos + 1] == b"#":
            while pos < n and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise FormatError("truncated PGM header")
        tokens.append(data[start:pos])
    if pos >= n or not data[pos : pos + 1].isspace():
        raise FormatError("truncated PGM header")
    return tokens, pos + 1


def load_pgm(data):
    """Decode a binary (P5) PGM with maxval 255."""
    if isinstance(data, (str, os.PathLike)):
        with open(data, "rb") as fh:
            data = fh.read()
    data = bytes(data)
    if data[:2] != b"P5":
        raise FormatError("not a binary PGM (magic P5 expected)")
    tokens, offset = _pgm_tokens(data[2:], 3)
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError:
        raise FormatError("non-integer PGM header field") from None
    if width < 1 or height < 1:
        raise FormatError(f"invalid PGM size {width}x{height}")
    if maxval != 255:
        raise FormatError(f"unsupported maxval {maxval}; only 255 is accepted")
    body = data[2 + offset :]
    if len(body) < width * height:
        raise FormatError(f"PGM body truncated: {len(body)} of {width * height} bytes")
    pixels = np.frombuffer(body, dtype=np.uint8, count=width * height)
    return GrayImage(pixels.reshape(height, width))


def save_pgm(img, path=None):
    blob = b"P5\n%d %d\n255\n" % (img.width, img.height) + img.pixels.tobytes()
    if path is not None:
        with open(path, "wb") as fh:
            fh.write(blob)
    return blob


# -- preprocessing -----------------------------------------------------------


def _axis_weights(src, dst):
    scale = src / dst
    x = (np.arange(dst) + 0.5) * scale - 0.5
    x = np.clip(x, 0.0, src - 1)
    lo = np.floor(x).astype(np.int64)
    hi = np.minimum(lo + 1, src - 1)
    return lo, hi, x - lo


def resize_bilinear(img, w, h):
    """Bilinear resize with pixel-center alignment, rounding half up."""
    if w < 1 or h < 1:
        raise ShapeError(f"target size must be positive, got {w}x{h}")
    if (w, h) == (img.width, img.height):
        return img
    src = img.pixels.astype(np.float64)
    y0, y1, fy = _axis_weights(img.height, h)
    x0, x1, fx = _axis_weights(img.width, w)
    top = src[y0][:, x0] * (1 - fx) + src[y0][:, x1] * fx
    bottom = src[y1][:, x0] * (1 - fx) + src[y1][:, x1] * fx
    out = top * (1 - fy)[:, None] + bottom * fy[:, None]
    return GrayImage(np.clip(np.floor(out + 0.5), 0, 255))


def center_crop(img, w, h):
    if w < 1 or h < 1 or w > img.width or h > img.height:
        raise ShapeError(f"cannot crop {w}x{h} from a {img.width}x{img.height} image")
    x = (img.width - w) // 2
    y = (img.height - h) // 2
    return GrayImage(img.pixels[y : y + h, x : x + w])


def preprocess(img, resize=(256, 256), crop=(227, 227)):
    """Resize then center-crop; either step is skipped when ``None``."""
    if resize is not None:
        img = resize_bilinear(img, *resize)
    if crop is not None:
        img = center_crop(img, *crop)
    return img


# -- extractors --------------------------------------------------------------


def extract_flatten(img):
    return img.pixels.reshape(-1).astype(np.float64) / 255.0


# clockwise from top-left; neighbour k sets bit k
LBP_OFFSETS = ((-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1))


def lbp_codes(pixels):
    """8-neighbour LBP code of every interior pixel (bit set when neighbour >= center)."""
    p = np.asarray(pixels)
    h, w = p.shape
    if h < 3 or w < 3:
        raise ShapeError(f"LBP needs at least a 3x3 image, got {w}x{h}")
    center = p[1:-1, 1:-1]
    codes = np.zeros(center.shape, dtype=np.int64)
    for bit, (dy, dx) in enumerate(LBP_OFFSETS):
        neighbour = p[1 + dy : h - 1 + dy, 1 + dx : w - 1 + dx]
        codes |= (neighbour >= center).astype(np.int64) << bit
    return codes


def extract_lbp(img):
    """L1-normalised 256-bin histogram of LBP codes."""
    codes = lbp_codes(img.pixels)
    hist = np.bincount(codes.ravel(), minlength=256).astype(np.float64)
    return hist / hist.sum()


def randproj_matrix(seed, input_dim, output_dim):
    rng = np.random.default_rng([int(seed), int(input_dim), int(output_dim)])
    return rng.normal(0.0, 1.0 / math.sqrt(output_dim), size=(output_dim, input_dim))


def extract_randproj(img, seed, output_dim):
    """Flatten then multiply by a seeded Gaussian matrix with N(0, 1/output_dim) entries."""
    if output_dim < 1:
        raise ShapeError(f"output_dim must be >= 1, got {output_dim}")
    x = extract_flatten(img) if isinstance(img, GrayImage) else np.asarray(img, dtype=np.float64).ravel()
    return randproj_matrix(seed, x.size, output_dim) @ x


EXTRACTOR_KINDS = ("flatten", "lbp", "randproj")


@dataclass(frozen=True)
class FeatureExtractor:
    """A declared feature pipeline.

    Works on :class:`GrayImage` inputs (optionally resized and cropped
    first) and on precomputed feature vectors. For vectors ``flatten`` is
    the identity and ``randproj`` multiplies by the same seeded matrix;
    ``lbp`` needs an image.
    """

    kind: str = "flatten"
    seed: int = 0
    output_dim: int = 64
    resize: tuple = None
    crop: tuple = None

    def __post_init__(self):
        if self.kind not in EXTRACTOR_KINDS:
            raise ValueError(f"unknown extractor kind {self.kind!r}")
        if self.kind == "randproj" and self.output_dim < 1:
            raise ShapeError("randproj output_dim must be >= 1")

    def __call__(self, item):
        if isinstance(item, GrayImage):
            img = preprocess(item, self.resize, self.crop)
            if self.kind == "flatten":
                return extract_flatten(img)
            if self.kind == "lbp":
                return extract_lbp(img)
            return extract_randproj(img, self.seed, self.output_dim)
        vec = np.asarray(item, dtype=np.float64).ravel()
        if self.kind == "flatten":
            return vec.copy()
        if self.kind == "randproj":
            return extract_randproj(vec, self.seed, self.output_dim)
        raise ShapeError("the lbp extractor needs an image, not a feature vector")

    def output_dim_for(self, input_dim):
        if self.kind == "lbp":
            return 256
        if self.kind == "randproj":
            return self.output_dim
        return input_dim

    def describe(self):
        d = {"kind": self.kind}
        if self.kind == "randproj":
            d.update(seed=self.seed, output_dim=self.output_dim)
        if self.resize is not None:
            d["resize"] = list(self.resize)
        if self.crop is not None:
            d["crop"] = list(self.crop)
        return d

    def batch(self, items):
        """Extract every item into a ``(dim, count)`` feature matrix."""
        cols = [self(it) for it in items]
        dims = {c.size for c in cols}
        if len(dims) != 1:
            raise ShapeError(f"extracted features have inconsistent sizes {sorted(dims)}")
        return np.stack(cols, axis=1)


# -- feature-matrix files ----------------------------------------------------


def dump_dmat(m):
    m = as_feature_matrix(m)
    rows, cols = m.shape
    return _DMAT_HEADER.pack(DMAT_MAGIC, DMAT_VERSION, rows, cols) + m.astype("<f8").tobytes(order="C")


def parse_dmat(data, offset=0):
    """Decode one DMAT block at ``offset``; returns ``(matrix, next_offset)``."""
    if len(data) - offset < _DMAT_HEADER.size:
        raise FormatError("truncated DMAT header")
    magic, version, rows, cols = _DMAT_HEADER.unpack_from(data, offset)
    if magic != DMAT_MAGIC:
        raise FormatError(f"bad DMAT magic {magic!r}")
    if version != DMAT_VERSION:
        raise FormatError(f"unsupported DMAT version {version}")
    if rows < 1 or cols < 1:
        raise FormatError(f"invalid DMAT shape {rows}x{cols}")
    start = offset + _DMAT_HEADER.size
    end = start + 8 * rows * cols
    if end > len(data):
        raise FormatError(f"DMAT body truncated or shape {rows}x{cols} overflows the file")
    m = np.frombuffer(data, dtype="<f8", count=rows * cols, offset=start).reshape(rows, cols)
    if not np.all(np.isfinite(m)):
        raise FormatError("DMAT contains NaN or Inf")
    return m.astype(np.float64), end


def dump_csv(m):
    m = as_feature_matrix(m)
    lines = [f"{m.shape[0]},{m.shape[1]}"]
    lines += [",".join(repr(float(x)) for x in row) for row in m]
    return "\n".join(lines) + "\n"


def parse_csv(text):
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise FormatError("empty CSV matrix")
    try:
        rows, cols = (int(x) for x in lines[0].split(","))
    except ValueError:
        raise FormatError(f"bad CSV shape line {lines[0]!r}") from None
    if rows < 1 or cols < 1:
        raise FormatError(f"invalid CSV shape {rows}x{cols}")
    if len(lines) - 1 != rows:
        raise FormatError(f"expected {rows} data rows, found {len(lines) - 1}")
    try:
        m = np.array([[float(x) for x in ln.split(",")] for ln in lines[1:]])
    except ValueError as exc:
        raise FormatError(f"bad CSV value: {exc}") from None
    if m.shape != (rows, cols):
        raise FormatError(f"CSV rows do not all have {cols} values")
    if not np.all(np.isfinite(m)):
        raise FormatError("CSV contains NaN or Inf")
    return m


def _is_csv(path, fmt):
    if fmt is not None:
        if fmt not in ("dmat", "csv"):
            raise ValueError(f"unknown matrix format {fmt!r}")
        return fmt == "csv"
    return str(path).lower().endswith(".csv")


def save_feature_matrix(m, sink, fmt=None):
    """Write ``m`` to a path or binary file object (DMAT unless ``.csv``/``fmt='csv'``)."""
    if isinstance(sink, (str, os.PathLike)):
        csv = _is_csv(sink, fmt)
        blob = dump_csv(m).encode() if csv else dump_dmat(m)
        with open(sink, "wb") as fh:
            fh.write(blob)
        return
    blob = dump_csv(m).encode() if fmt == "csv" else dump_dmat(m)
    sink.write(blob)


def load_feature_matrix(source, fmt=None):
    """Read a matrix from a path, bytes, or binary file object."""
    if isinstance(source, (str, os.PathLike)):
        csv = _is_csv(source, fmt)
        with open(source, "rb") as fh:
            data = fh.read()
    else:
        data = source if isinstance(source, (bytes, bytearray)) else source.read()
        csv = fmt == "csv"
    if csv:
        return parse_csv(bytes(data).decode())
    m, end = parse_dmat(bytes(data))
    if end != len(data):
        raise FormatError(f"{len(data) - end} trailing bytes after DMAT body")
    return m


def feature_matrix_bytes(m, fmt="dmat"):
    buf = io.BytesIO()
    save_feature_matrix(m, buf, fmt)
    return buf.getvalue()
