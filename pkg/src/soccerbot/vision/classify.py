"""Pixel classification: packed YUYV frames through the color LUT into
per-class downscaled count grids (4x4 pixel blocks, values 0..16)."""

from __future__ import annotations

import numpy as np

from ..errors import DomainError
from .lut import ColorLut, N_CLASSES

BLOCK = 4
ON_THRESHOLD = 8  # cells with >= this many class pixels count as "on"

_block_id_cache: dict[tuple[int, int], np.ndarray] = {}


def _block_ids(height: int, width: int) -> np.ndarray:
    key = (height, width)
    cached = _block_id_cache.get(key)
    if cached is None:
        cols = width // BLOCK
        rows_idx = np.arange(height) // BLOCK
        cols_idx = np.arange(width) // BLOCK
        cached = (rows_idx[:, None] * cols + cols_idx[None, :]).astype(np.int32)
        _block_id_cache[key] = cached
    return cached


def unpack_yuyv(data: bytes, width: int, height: int):
    """Packed YUYV -> full-resolution Y, U, V uint8 planes."""
    if width % 2:
        raise DomainError("YUYV width must be even")
    if len(data) != width * height * 2:
        raise DomainError(f"expected {width * height * 2} bytes, got {len(data)}")
    arr = np.frombuffer(data, dtype=np.uint8).reshape(height, width * 2)
    y = arr[:, 0::2]
    u = arr[:, 1::4].repeat(2, axis=1)
    v = arr[:, 3::4].repeat(2, axis=1)
    return y, u, v


def pack_yuyv(y: np.ndarray, u: np.ndarray, v: np.ndarray) -> bytes:
    """Full-resolution planes -> packed YUYV; pixel pairs average chroma."""
    height, width = y.shape
    out = np.empty((height, width * 2), dtype=np.uint8)
    out[:, 0::2] = y
    u16 = u.astype(np.uint16)
    v16 = v.astype(np.uint16)
    out[:, 1::4] = ((u16[:, 0::2] + u16[:, 1::2]) // 2).astype(np.uint8)
    out[:, 3::4] = ((v16[:, 0::2] + v16[:, 1::2]) // 2).astype(np.uint8)
    return out.tobytes()


def classify(yuyv: bytes, lut: ColorLut, width: int = 800, height: int = 600) -> np.ndarray:
    """Classify every pixel and count classes per 4x4 block.

    Returns a (6, height/4, width/4) uint8 array; per block the counts over
    all classes (unknown included) sum to 16.
    """
    if width % BLOCK or height % BLOCK:
        raise DomainError("image dimensions must be multiples of 4")
    y, u, v = unpack_yuyv(yuyv, width, height)
    idx = ((y.astype(np.int32) >> 2) << 12) | ((u.astype(np.int32) >> 2) << 6) \
        | (v.astype(np.int32) >> 2)
    classes = lut.flat[idx]
    rows, cols = height // BLOCK, width // BLOCK
    combined = _block_ids(height, width) * N_CLASSES + classes
    counts = np.bincount(combined.ravel(), minlength=rows * cols * N_CLASSES)
    return counts.reshape(rows, cols, N_CLASSES).transpose(2, 0, 1).astype(np.uint8)


# Full-range BT.601 conversions (shared by the renderer and file tooling).

def rgb_to_yuv(rgb: np.ndarray) -> np.ndarray:
    rgb = np.asarray(rgb, dtype=float)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    y = 0.299 * r + 0.587 * g + 0.114 * b
    u = 128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b
    v = 128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b
    return np.clip(np.rint(np.stack([y, u, v], axis=-1)), 0, 255).astype(np.uint8)


def yuv_to_rgb(yuv: np.ndarray) -> np.ndarray:
    yuv = np.asarray(yuv, dtype=float)
    y, u, v = yuv[..., 0], yuv[..., 1] - 128.0, yuv[..., 2] - 128.0
    r = y + 1.402 * v
    g = y - 0.344136 * u - 0.714136 * v
    b = y + 1.772 * u
    return np.clip(np.rint(np.stack([r, g, b], axis=-1)), 0, 255).astype(np.uint8)
