"""Placement-candidate regions from a hierarchical boundary-strength map.

Thresholding the strength map at one global level picks the partition
scale; 4-connected components of the sub-threshold set become candidate
regions, ranked deterministically.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import ThresholdOutOfRange, WrongChannelCount
from .raster import Raster

FOUR_CONN = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


@dataclass(frozen=True)
class Region:
    pixel_mask: np.ndarray = field(repr=False)  # bool (h, w)
    bbox: tuple[int, int, int, int]  # x0, y0, x1, y1 (exclusive)
    area: int
    centroid: tuple[float, float]  # (x, y), pixel centers

    @classmethod
    def from_mask(cls, mask: np.ndarray) -> "Region":
        mask = np.asarray(mask, dtype=bool)
        ys, xs = np.nonzero(mask)
        if ys.size == 0:
            raise ValueError("empty region mask")
        m = mask.copy()
        m.flags.writeable = False
        return cls(
            pixel_mask=m,
            bbox=(int(xs.min()), int(ys.min()), int(xs.max()) + 1, int(ys.max()) + 1),
            area=int(ys.size),
            centroid=(float(xs.mean() + 0.5), float(ys.mean() + 0.5)),
        )


@dataclass(frozen=True)
class RegionParams:
    boundary_threshold: float = 0.35
    min_area_frac: float = 0.005  # of image area
    max_aspect: float = 12.0
    max_text_occupancy: float = 0.05

    def __post_init__(self):
        if not (0.0 <= self.boundary_threshold <= 1.0):
            raise ThresholdOutOfRange(
                f"boundary_threshold {self.boundary_threshold} outside [0, 1]"
            )
        if self.min_area_frac <= 0 or self.max_aspect <= 0 or self.max_text_occupancy <= 0:
            raise ValueError("RegionParams fields must be positive")

    def min_area(self, image_area: int) -> int:
        return max(1, int(round(self.min_area_frac * image_area)))


def regions_from_boundaries(b: Raster, p: RegionParams) -> list[Region]:
    """4-connected components of {strength < threshold}, ordered by
    (area desc, centroid y, centroid x)."""
    if b.channels != 1:
        raise WrongChannelCount(f"boundary map must be 1-channel, got {b.channels}")
    strength = b.plane()
    if strength.min() < 0.0 or strength.max() > 1.0:
        raise ThresholdOutOfRange("boundary strengths must lie in [0, 1]")
    below = strength < np.float32(p.boundary_threshold)
    labels, n = ndimage.label(below, structure=FOUR_CONN)
    regions = []
    for idx in range(1, n + 1):
        regions.append(Region.from_mask(labels == idx))
    regions.sort(key=lambda r: (-r.area, r.centroid[1], r.centroid[0]))
    return regions


def filter_regions(
    regions: list[Region], p: RegionParams, occupancy: Raster | np.ndarray | None = None
) -> list[Region]:
    """Drop regions that are too small, too elongated, or already texted."""
    occ = None
    if occupancy is not None:
        occ = occupancy.plane() if isinstance(occupancy, Raster) else np.asarray(occupancy)
        occ = occ > 0.5
    if not regions:
        return []
    image_area = regions[0].pixel_mask.size
    min_area = p.min_area(image_area)
    kept = []
    for r in regions:
        if r.area < min_area:
            continue
        x0, y0, x1, y1 = r.bbox
        w, h = x1 - x0, y1 - y0
        if max(w, h) / min(w, h) > p.max_aspect:
            continue
        if occ is not None:
            overlap = int(np.count_nonzero(occ & r.pixel_mask))
            if overlap / r.area > p.max_text_occupancy:
                continue
        kept.append(r)
    return kept


def pick_region(regions: list[Region], rng: np.random.Generator) -> Region | None:
    """Area-proportional draw; identical rng state gives an identical pick."""
    if not regions:
        return None
    if len(regions) == 1:
        return regions[0]
    areas = np.array([r.area for r in regions], dtype=np.float64)
    cum = np.cumsum(areas)
    u = rng.random() * cum[-1]
    return regions[int(np.searchsorted(cum, u, side="right"))]
