"""Core raster type and the bit-exact RTWMAP1 exchange format.

All scene maps (depth, boundary strength) cross process boundaries as
RTWMAP1 files; photographs and masks travel as PNG.  Internally everything
is float32 in [0, 1] for color/alpha, unbounded positive for depth.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np
from PIL import Image

from .errors import (
    BadChannelCount,
    BadMagic,
    DimensionOverflow,
    IoFailure,
    NonFiniteSample,
    TruncatedFile,
    WrongChannelCount,
)

MAGIC = b"RTWMAP1\x00"
HEADER_SIZE = 8 + 4 + 4 + 4  # magic + width + height + channels
MAX_SIDE = 65535
VALID_CHANNELS = (1, 3, 4)


class Raster:
    """Immutable float32 image grid, shape (height, width, channels)."""

    __slots__ = ("pixels",)

    def __init__(self, pixels: np.ndarray):
        a = np.asarray(pixels, dtype=np.float32)
        if a.ndim == 2:
            a = a[:, :, None]
        if a.ndim != 3:
            raise ValueError(f"raster must be 2-D or 3-D, got ndim={a.ndim}")
        h, w, c = a.shape
        if h < 1 or w < 1:
            raise ValueError("raster sides must be >= 1")
        if c not in VALID_CHANNELS:
            raise WrongChannelCount(f"channels must be one of {VALID_CHANNELS}, got {c}")
        a = np.ascontiguousarray(a)
        a.flags.writeable = False
        self.pixels = a

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def channels(self) -> int:
        return self.pixels.shape[2]

    def plane(self, i: int = 0) -> np.ndarray:
        """Single channel as a read-only (h, w) view."""
        return self.pixels[:, :, i]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Raster)
            and self.pixels.shape == other.pixels.shape
            and np.array_equal(
                self.pixels.view(np.uint32), other.pixels.view(np.uint32)
            )
        )

    def __repr__(self) -> str:
        return f"Raster({self.width}x{self.height}x{self.channels})"


def load_map(path) -> Raster:
    """Read an RTWMAP1 file, rejecting malformed headers and non-finite samples."""
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as e:
        raise IoFailure(str(e)) from e
    if len(blob) < HEADER_SIZE:
        raise TruncatedFile("file shorter than header", len(blob))
    if blob[:8] != MAGIC:
        raise BadMagic(f"expected {MAGIC!r}, got {blob[:8]!r}", 0)
    w, h, c = struct.unpack_from("<III", blob, 8)
    if w < 1 or w > MAX_SIDE:
        raise DimensionOverflow(f"width {w} outside [1, {MAX_SIDE}]", 8)
    if h < 1 or h > MAX_SIDE:
        raise DimensionOverflow(f"height {h} outside [1, {MAX_SIDE}]", 12)
    if c not in VALID_CHANNELS:
        raise BadChannelCount(f"channels {c} not in {VALID_CHANNELS}", 16)
    n = w * h * c
    expected = HEADER_SIZE + 4 * n
    if len(blob) != expected:
        raise TruncatedFile(f"expected {expected} bytes, got {len(blob)}", len(blob))
    data = np.frombuffer(blob, dtype="<f4", offset=HEADER_SIZE, count=n)
    bad = np.flatnonzero(~np.isfinite(data))
    if bad.size:
        i = int(bad[0])
        raise NonFiniteSample(f"sample {i} is not finite", HEADER_SIZE + 4 * i)
    return Raster(data.reshape(h, w, c).astype(np.float32))


def save_map(r: Raster, path) -> None:
    """Write ``r`` in the byte-exact RTWMAP1 layout (little-endian float32)."""
    header = MAGIC + struct.pack("<III", r.width, r.height, r.channels)
    body = np.ascontiguousarray(r.pixels, dtype="<f4").tobytes()
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(body)
    except OSError as e:
        raise IoFailure(str(e)) from e


def normalize_depth(d: Raster) -> Raster:
    """Affine rescale of a 1-channel depth map to [0, 1]; constant maps to 0.5."""
    if d.channels != 1:
        raise WrongChannelCount(f"depth must be 1-channel, got {d.channels}")
    a = d.plane()
    lo = float(a.min())
    hi = float(a.max())
    if hi - lo <= 0.0:
        return Raster(np.full_like(a, 0.5))
    return Raster((a - lo) / np.float32(hi - lo))


def load_png(path) -> Raster:
    """Load an 8-bit PNG photograph as a 3-channel float raster (v/255)."""
    try:
        img = Image.open(path).convert("RGB")
    except OSError as e:
        raise IoFailure(str(e)) from e
    return Raster(np.asarray(img, dtype=np.float32) / np.float32(255.0))

def save_png(r: Raster, path) -> None:
    a = np.clip(r.pixels, 0.0, 1.0)
    out = np.round(a * 255.0).astype(np.uint8)
    if r.channels == 1:
        out = out[:, :, 0]
    Image.fromarray(out).save(path, format="PNG")


def save_mask_png(mask: np.ndarray, path) -> None:
    """Write an instance-id mask as 16-bit grayscale PNG (0 = background)."""
    m = np.asarray(mask)
    if m.dtype != np.uint16:
        if m.min() < 0 or m.max() > 65535:
            raise ValueError("mask ids must fit in uint16")
        m = m.astype(np.uint16)
    Image.fromarray(m).save(path, format="PNG")


def load_mask_png(path) -> np.ndarray:
    try:
        img = Image.open(path)
    except OSError as e:
        raise IoFailure(str(e)) from e
    return np.asarray(img).astype(np.uint16)


# ---------------------------------------------------------------------------
# BoxList: detector output (existing text / faces) as JSON quads

BOX_KINDS = ("existing-text", "face")


@dataclass(frozen=True)
class Box:
    kind: str
    quad: np.ndarray = field(repr=False)  # (4, 2) float32, CCW

    def __post_init__(self):
        if self.kind not in BOX_KINDS:
            raise ValueError(f"unknown box kind {self.kind!r}")
        q = np.asarray(self.quad, dtype=np.float32).reshape(4, 2)
        # normalize vertex order: positive shoelace sum (consistent CCW rule)
        area2 = float(
            np.sum(q[:, 0] * np.roll(q[:, 1], -1) - np.roll(q[:, 0], -1) * q[:, 1])
        )
        if area2 < 0:
            q = q[::-1].copy()
        q.flags.writeable = False
        object.__setattr__(self, "quad", q)


def clamp_box(b: Box, width: int, height: int) -> Box:
    q = np.clip(b.quad, [0.0, 0.0], [float(width), float(height)])
    return Box(b.kind, q)


def boxes_to_json(boxes: list[Box]) -> str:
    items = [
        {"kind": b.kind, "quad": [[float(x), float(y)] for x, y in b.quad]}
        for b in boxes
    ]
    return json.dumps(items, ensure_ascii=False)


def boxes_from_json(text: str) -> list[Box]:
    raw = json.loads(text)
    if not isinstance(raw, list):
        raise ValueError("BoxList JSON must be a list")
    return [Box(item["kind"], np.asarray(item["quad"], dtype=np.float32)) for item in raw]


def load_boxes(path) -> list[Box]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return boxes_from_json(fh.read())
    except OSError as e:
        raise IoFailure(str(e)) from e
