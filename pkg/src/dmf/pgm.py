"""Binary 8-bit PGM (P5) reading and writing.

Intensities are floats in [0, 1]; label masks are stored as evenly spaced
gray levels (0 and 255 for two classes).
"""

from __future__ import annotations

import os

import numpy as np


class PGMError(ValueError):
    pass


def _tokens(data: bytes):
    """Yield header tokens and the offset just past each one."""
    i, n = 0, len(data)
    while i < n:
        c = data[i:i + 1]
        if c == b"#":
            while i < n and data[i:i + 1] not in (b"\n", b"\r"):
                i += 1
        elif c.isspace():
            i += 1
        else:
            j = i
            while j < n and not data[j:j + 1].isspace():
                j += 1
            yield data[i:j], j
            i = j


def read_pgm_bytes(path) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    toks = _tokens(data)
    try:
        magic, _ = next(toks)
        width, _ = next(toks)
        height, _ = next(toks)
        maxval, end = next(toks)
    except StopIteration:
        raise PGMError(f"{path}: truncated PGM header") from None
    if magic != b"P5":
        raise PGMError(f"{path}: not a binary PGM (magic {magic!r})")
    w, h, m = int(width), int(height), int(maxval)
    if m != 255:
        raise PGMError(f"{path}: only 8-bit PGM supported (maxval {m})")
    pixels = data[end + 1:end + 1 + w * h]
    if len(pixels) != w * h:
        raise PGMError(f"{path}: expected {w * h} pixel bytes, found {len(pixels)}")
    return np.frombuffer(pixels, dtype=np.uint8).reshape(h, w).copy()


def write_pgm_bytes(path, pixels) -> None:
    pixels = np.asarray(pixels)
    if pixels.ndim != 2 or pixels.dtype != np.uint8:
        raise PGMError("PGM payload must be a 2-D uint8 array")
    h, w = pixels.shape
    with open(os.fspath(path), "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (w, h))
        fh.write(pixels.tobytes())


def read_pgm(path) -> np.ndarray:
    return read_pgm_bytes(path).astype(float) / 255.0


def write_pgm(path, img) -> None:
    img = np.asarray(img, dtype=float)
    write_pgm_bytes(path, np.clip(np.round(img * 255.0), 0, 255).astype(np.uint8))


def write_mask(path, labels, n_classes: int = 2) -> None:
    labels = np.asarray(labels)
    step = 255 // max(n_classes - 1, 1)
    write_pgm_bytes(path, (labels * step).astype(np.uint8))


def read_mask(path, n_classes: int = 2) -> np.ndarray:
    raw = read_pgm_bytes(path).astype(float)
    step = 255 // max(n_classes - 1, 1)
    return np.clip(np.round(raw / step), 0, n_classes - 1).astype(np.int64)
