"""Exchange formats the engine consumes, written independently here.

Map container: 8-byte magic ``RTWMAP1\\0``, then width, height, channels
as little-endian u32 (20-byte header total), then width*height*channels
float32 samples, row-major, channels interleaved. Box lists are JSON:
``[{"kind": "existing-text"|"face", "quad": [[x, y] x4]}, ...]``.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"RTWMAP1\x00"
HEADER = struct.Struct("<8sIII")
ALLOWED_CHANNELS = (1, 3, 4)

DEPTH_SUFFIX = ".depth.rtwmap"
BOUNDARY_SUFFIX = ".boundary.rtwmap"
BOXES_SUFFIX = ".boxes.json"


def write_map(path, samples: np.ndarray) -> None:
    """Serialize a (h, w) or (h, w, c) float array; c must be 1, 3, or 4."""
    a = np.asarray(samples, dtype=np.float32)
    if a.ndim == 2:
        a = a[:, :, None]
    if a.ndim != 3:
        raise ValueError(f"expected 2- or 3-d samples, got shape {a.shape}")
    h, w, c = a.shape
    if c not in ALLOWED_CHANNELS:
        raise ValueError(f"channels must be one of {ALLOWED_CHANNELS}, got {c}")
    if h < 1 or w < 1:
        raise ValueError("empty raster")
    blob = HEADER.pack(MAGIC, w, h, c) + np.ascontiguousarray(a).astype(
        "<f4"
    ).tobytes()
    Path(path).write_bytes(blob)


def read_map(path) -> np.ndarray:
    """Inverse of write_map; returns (h, w, c) float32."""
    blob = Path(path).read_bytes()
    if len(blob) < HEADER.size:
        raise ValueError(f"{path}: truncated header")
    magic, w, h, c = HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    if c not in ALLOWED_CHANNELS:
        raise ValueError(f"{path}: bad channel count {c}")
    expect = HEADER.size + 4 * w * h * c
    if len(blob) != expect:
        raise ValueError(f"{path}: expected {expect} bytes, got {len(blob)}")
    flat = np.frombuffer(blob, dtype="<f4", offset=HEADER.size)
    return flat.reshape(h, w, c).astype(np.float32)


def normalize_unit(depth: np.ndarray) -> np.ndarray:
    """Affine rescale to [0, 1]; a constant map becomes all 0.5.

    Matches the engine's treatment of relative depth, so files written
    here need no further conditioning on the consumer side.
    """
    d = np.asarray(depth, dtype=np.float64)
    lo, hi = float(d.min()), float(d.max())
    if hi - lo <= 0.0:
        return np.full(d.shape, 0.5, dtype=np.float32)
    return ((d - lo) / (hi - lo)).astype(np.float32)


def write_boxes(path, boxes: list[dict]) -> None:
    """Serialize quads in the engine's BoxList schema.

    Each entry: kind tag plus a (4, 2) vertex array or nested list.
    """
    items = []
    for b in boxes:
        kind = b["kind"]
        if kind not in ("existing-text", "face"):
            raise ValueError(f"unknown box kind {kind!r}")
        quad = np.asarray(b["quad"], dtype=np.float64).reshape(4, 2)
        items.append(
            {"kind": kind, "quad": [[float(x), float(y)] for x, y in quad]}
        )
    Path(path).write_text(json.dumps(items, ensure_ascii=False), encoding="utf-8")


def rect_quad(x0: float, y0: float, x1: float, y1: float) -> list[list[float]]:
    """Axis-aligned rectangle as a counter-clockwise 4-point quad."""
    return [[x0, y0], [x1, y0], [x1, y1], [x0, y1]]
