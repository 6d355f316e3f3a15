"""Background screening: discard text-heavy images, blur the rest.

Existing-text boxes can trigger a discard when their union covers too much
of the frame; face boxes are only ever blurred, never a reason to drop an
image.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .polygons import polygon_mask
from .raster import Box, Raster


class Decision(enum.Enum):
    KEEP = "keep"
    DISCARD = "discard"
    BLUR_THEN_KEEP = "blur-then-keep"


@dataclass(frozen=True)
class PrefilterPolicy:
    discard_coverage_threshold: float = 0.25
    blur_sigma: float | None = None  # None -> max(3, 0.04 * box diagonal)
    face_blur: bool = True

    def __post_init__(self):
        if not (0.0 < self.discard_coverage_threshold <= 1.0):
            raise ValueError("discard_coverage_threshold must be in (0, 1]")
        if self.blur_sigma is not None and self.blur_sigma <= 0:
            raise ValueError("blur_sigma must be positive")

    def sigma_for(self, box: Box) -> float:
        if self.blur_sigma is not None:
            return self.blur_sigma
        q = box.quad
        diag = math.hypot(
            float(q[:, 0].max() - q[:, 0].min()),
            float(q[:, 1].max() - q[:, 1].min()),
        )
        return max(3.0, 0.04 * diag)


def _union_area(boxes: list[Box]) -> float:
    """True union area of the quads, by rasterization over their joint bbox."""
    if not boxes:
        return 0.0
    quads = [b.quad for b in boxes]
    allv = np.vstack(quads)
    x0 = math.floor(allv[:, 0].min())
    y0 = math.floor(allv[:, 1].min())
    w = max(int(math.ceil(allv[:, 0].max())) - x0, 1)
    h = max(int(math.ceil(allv[:, 1].max())) - y0, 1)
    acc = np.zeros((h, w), dtype=bool)
    for q in quads:
        acc |= polygon_mask(q - [x0, y0], w, h)
    return float(acc.sum())


def decide_image(boxes: list[Box], policy: PrefilterPolicy, image_area: float) -> Decision:
    """Keep / discard / blur decision from detected existing-text coverage."""
    if image_area <= 0:
        raise ValueError("image_area must be positive")
    text_boxes = [b for b in boxes if b.kind == "existing-text"]
    if not boxes:
        return Decision.KEEP
    if text_boxes and _union_area(text_boxes) / image_area > policy.discard_coverage_threshold:
        return Decision.DISCARD
    return Decision.BLUR_THEN_KEEP


def _gaussian_kernel(sigma: float) -> np.ndarray:
    radius = max(1, int(math.ceil(3.0 * sigma)))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def gaussian_blur(img: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian, truncated at 3 sigma, weights renormalized at the
    image border (normalized convolution against a ones mask)."""
    k = _gaussian_kernel(sigma)
    a = img.astype(np.float64)
    ones = np.ones(a.shape[:2], dtype=np.float64)
    for axis in (0, 1):
        a = ndimage.convolve1d(a, k, axis=axis, mode="constant", cval=0.0)
        ones = ndimage.convolve1d(ones, k, axis=axis, mode="constant", cval=0.0)
    if a.ndim == 3:
        ones = ones[:, :, None]
    return a / ones


FEATHER_PX = 2.0


def blur_regions(img: Raster, boxes: list[Box], policy: PrefilterPolicy) -> Raster:
    """Blur inside each box quad, feathered 2 px outward; everything outside
    the feathered union is returned bit-identical."""
    if img.channels != 3:
        raise ValueError("blur_regions expects a 3-channel color raster")
    active = [
        b
        for b in boxes
        if b.kind == "existing-text" or (b.kind == "face" and policy.face_blur)
    ]
    if not active:
        return img
    out = np.array(img.pixels, dtype=np.float32)
    h, w = out.shape[:2]
    for box in active:
        mask = polygon_mask(box.quad, w, h)
        if not mask.any():
            continue
        sigma = policy.sigma_for(box)
        blurred = gaussian_blur(out, sigma)
        # linear feather: weight 1 inside the quad, 0 beyond FEATHER_PX outside
        dist = ndimage.distance_transform_edt(~mask)
        weight = np.clip(1.0 - dist / FEATHER_PX, 0.0, 1.0)
        touched = weight > 0.0
        wgt = weight[touched][:, None]
        out[touched] = (
            wgt * blurred[touched] + (1.0 - wgt) * out[touched].astype(np.float64)
        ).astype(np.float32)
    return Raster(np.clip(out, 0.0, 1.0))
