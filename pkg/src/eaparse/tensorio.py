"""On-disk formats and raster/tensor validation.

Three byte-deterministic formats make up the toolkit's wire protocol:

* label maps   -- binary PGM, ``P5\\n{W} {H}\\n255\\n`` + H*W raw bytes
* RGB images   -- binary PPM, ``P6\\n{W} {H}\\n255\\n`` + H*W*3 raw bytes
* logit stacks -- ``FPLT`` container: 4 magic bytes, then version=1, C, H, W
  as little-endian uint32, then C*H*W little-endian float32 values in
  channel-major order

Headers are ASCII, payloads little-endian; ``#`` comments in PGM/PPM headers
are rejected so the grammar stays single-pass. Readers never hand back a
value that violates the target type's invariants.

In memory the domain types are plain numpy arrays:

* LabelMap    -- (H, W) uint8, one class id per pixel, 0 = background
* RgbImage    -- (H, W, 3) uint8 interleaved R,G,B
* BinaryMask  -- (H, W) uint8 with values in {0, 1}
* LogitsTensor - (C, H, W) float32, all finite
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import (
    BadMagic,
    BadVersion,
    InvalidRaster,
    IoFailure,
    MalformedHeader,
    NonFiniteValue,
    TrailingData,
    TruncatedData,
    UnsupportedMaxval,
)

FPLT_MAGIC = b"FPLT"
FPLT_VERSION = 1


# --- in-memory validators ---


def ensure_label_map(arr) -> np.ndarray:
    """Return ``arr`` as a valid (H, W) uint8 label map or raise InvalidRaster."""
    a = np.asarray(arr)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise InvalidRaster(f"label map must be 2-D with H,W >= 1, got shape {a.shape}")
    if a.dtype != np.uint8:
        if not np.issubdtype(a.dtype, np.integer):
            raise InvalidRaster(f"label map must hold integers, got dtype {a.dtype}")
        if a.min() < 0 or a.max() > 255:
            raise InvalidRaster("label ids must fit in one unsigned byte")
        a = a.astype(np.uint8)
    return a


def ensure_rgb_image(arr) -> np.ndarray:
    """Return ``arr`` as a valid (H, W, 3) uint8 image or raise InvalidRaster."""
    a = np.asarray(arr)
    if a.ndim != 3 or a.shape[2] != 3 or a.shape[0] < 1 or a.shape[1] < 1:
        raise InvalidRaster(f"rgb image must be (H, W, 3) with H,W >= 1, got shape {a.shape}")
    if a.dtype != np.uint8:
        if not np.issubdtype(a.dtype, np.integer):
            raise InvalidRaster(f"rgb image must hold integers, got dtype {a.dtype}")
        if a.min() < 0 or a.max() > 255:
            raise InvalidRaster("channel values must fit in one unsigned byte")
        a = a.astype(np.uint8)
    return a


def ensure_binary_mask(arr) -> np.ndarray:
    """Return ``arr`` as a valid (H, W) uint8 mask over {0, 1} or raise InvalidRaster."""
    a = np.asarray(arr)
    if a.dtype == np.bool_:
        a = a.astype(np.uint8)
    a = ensure_label_map(a)
    if a.max(initial=0) > 1:
        raise InvalidRaster("binary mask may only contain 0 and 1")
    return a


def ensure_logits(arr) -> np.ndarray:
    """Return ``arr`` as a valid (C, H, W) float32 logits tensor or raise InvalidRaster."""
    a = np.asarray(arr)
    if a.ndim != 3 or min(a.shape) < 1:
        raise InvalidRaster(f"logits must be (C, H, W) with all dims >= 1, got shape {a.shape}")
    if not np.issubdtype(a.dtype, np.floating):
        raise InvalidRaster(f"logits must be floating point, got dtype {a.dtype}")
    if not np.all(np.isfinite(a)):
        raise InvalidRaster("logits must be finite (no NaN/Inf)")
    return a.astype(np.float32, copy=False)


# --- netpbm (PGM / PPM) ---


def _parse_pnm_header(data: bytes, magic: bytes, path) -> tuple[int, int, int]:
    """Parse ``magic w h maxval`` and return (width, height, payload offset)."""
    if data[:2] != magic:
        raise MalformedHeader(
            f"{path}: expected magic {magic.decode()}, found {data[:2]!r}"
        )
    pos = 2
    fields = []
    for _ in range(3):
        start = pos
        while pos < len(data) and data[pos : pos + 1] in b" \t\r\n\x0b\x0c":
            pos += 1
        if pos == start:
            raise MalformedHeader(f"{path}: missing whitespace between header fields")
        if data[pos : pos + 1] == b"#":
            raise MalformedHeader(f"{path}: comments are not allowed in headers")
        digits_start = pos
        while pos < len(data) and data[pos : pos + 1].isdigit():
            pos += 1
        if pos == digits_start:
            raise MalformedHeader(f"{path}: expected an unsigned integer in header")
        fields.append(int(data[digits_start:pos]))
    if pos >= len(data) or data[pos : pos + 1] not in b" \t\r\n\x0b\x0c":
        raise MalformedHeader(f"{path}: header must end with a single whitespace byte")
    pos += 1
    width, height, maxval = fields
    if maxval != 255:
        raise UnsupportedMaxval(f"{path}: maxval must be 255, found {maxval}")
    if width < 1 or height < 1:
        raise MalformedHeader(f"{path}: width and height must be >= 1")
    return width, height, pos


def _read_file(path) -> bytes:
    try:
        with open(path, "rb") as f:
            return f.read()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc


def _write_file(path, payload: bytes) -> None:
    try:
        with open(path, "wb") as f:
            f.write(payload)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def _check_payload(data: bytes, offset: int, expected: int, path) -> bytes:
    got = len(data) - offset
    if got < expected:
        raise TruncatedData(f"{path}: expected {expected} payload bytes, found {got}")
    if got > expected:
        raise TrailingData(f"{path}: {got - expected} unexpected bytes after payload")
    return data[offset:]


def read_label_map(path) -> np.ndarray:
    """Read a binary PGM file into a (H, W) uint8 label map."""
    data = _read_file(path)
    w, h, off = _parse_pnm_header(data, b"P5", path)
    payload = _check_payload(data, off, h * w, path)
    return np.frombuffer(payload, dtype=np.uint8).reshape(h, w).copy()


def write_label_map(label_map, path) -> None:
    """Write a label map as binary PGM, byte-deterministically."""
    a = ensure_label_map(label_map)
    h, w = a.shape
    _write_file(path, b"P5\n%d %d\n255\n" % (w, h) + a.tobytes())


def read_rgb_image(path) -> np.ndarray:
    """Read a binary PPM file into a (H, W, 3) uint8 image."""
    data = _read_file(path)
    w, h, off = _parse_pnm_header(data, b"P6", path)
    payload = _check_payload(data, off, h * w * 3, path)
    return np.frombuffer(payload, dtype=np.uint8).reshape(h, w, 3).copy()


def write_rgb_image(image, path) -> None:
    """Write an RGB image as binary PPM, byte-deterministically."""
    a = ensure_rgb_image(image)
    h, w, _ = a.shape
    _write_file(path, b"P6\n%d %d\n255\n" % (w, h) + a.tobytes())


# --- FPLT logits container ---


def read_logits(path) -> np.ndarray:
    """Read an FPLT file into a (C, H, W) float32 tensor.

    Rejects wrong magic/version, short or long payloads and any NaN/Inf value.
    """
    data = _read_file(path)
    if len(data) < 4 or data[:4] != FPLT_MAGIC:
        raise BadMagic(f"{path}: expected magic {FPLT_MAGIC.decode()}, found {data[:4]!r}")
    if len(data) < 20:
        raise TruncatedData(f"{path}: header needs 20 bytes, file has {len(data)}")
    version, c, h, w = struct.unpack("<IIII", data[4:20])
    if version != FPLT_VERSION:
        raise BadVersion(f"{path}: unsupported version {version}")
    if min(c, h, w) < 1:
        raise MalformedHeader(f"{path}: C, H, W must all be >= 1, found {(c, h, w)}")
    payload = _check_payload(data, 20, 4 * c * h * w, path)
    values = np.frombuffer(payload, dtype="<f4").reshape(c, h, w)
    if not np.all(np.isfinite(values)):
        raise NonFiniteValue(f"{path}: payload contains NaN or Inf")
    return values.astype(np.float32).copy()


def write_logits(logits, path) -> None:
    """Write a logits tensor as FPLT (values stored as little-endian float32)."""
    a = ensure_logits(logits)
    c, h, w = a.shape
    header = FPLT_MAGIC + struct.pack("<IIII", FPLT_VERSION, c, h, w)
    _write_file(path, header + a.astype("<f4", copy=False).tobytes())
