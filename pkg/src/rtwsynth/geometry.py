"""Scene geometry: plane fits from relative depth, reverse homographies,
fit tests, and the perspective warp of a text patch into the image.

Camera model is an assumed pinhole: focal = focal_scale * max(w, h),
principal point at the image center.  Depth is relative, so only the
homography's shape matters, never metric scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace as dc_replace

import numpy as np

from .errors import DegenerateRegion, NumericallySingular
from .polygons import is_convex, polygon_mask, transform_points
from .raster import Raster
from .regions import Region
from .textrender import CharBox, TextPatch

MIN_NORMAL_Z = 0.15


@dataclass(frozen=True)
class Plane:
    normal: np.ndarray  # unit 3-vector, z > 0
    offset: float  # n . X = offset
    inlier_fraction: float

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=np.float64)
        if abs(np.linalg.norm(n) - 1.0) > 1e-9:
            raise ValueError("plane normal must be unit length")
        if n[2] <= 0:
            raise ValueError("plane normal must face the camera (z > 0)")


@dataclass(frozen=True)
class Homography:
    H: np.ndarray  # 3x3, H[2,2] == 1

    def __post_init__(self):
        H = np.asarray(self.H, dtype=np.float64)
        if H.shape != (3, 3):
            raise ValueError("homography must be 3x3")
        if abs(H[2, 2]) < 1e-12:
            raise NumericallySingular("cannot normalize H[2,2] = 0")
        H = H / H[2, 2]
        if abs(np.linalg.det(H)) <= 1e-9:
            raise NumericallySingular("homography is singular")
        H.flags.writeable = False
        object.__setattr__(self, "H", H)

    def inverse(self) -> "Homography":
        return Homography(np.linalg.inv(self.H))

    def apply(self, points) -> np.ndarray:
        return transform_points(self.H, points)


@dataclass(frozen=True)
class GeometryConfig:
    focal_scale: float = 1.2  # focal = focal_scale * max(w, h) pixels
    ransac_iters: int = 200
    inlier_tol: float = 0.02  # fraction of the region's depth range
    min_normal_z: float = MIN_NORMAL_Z
    min_coverage: float = 0.98


def _intrinsics(width: int, height: int, cfg: GeometryConfig):
    f = cfg.focal_scale * max(width, height)
    return f, width / 2.0, height / 2.0


def back_project(depth: Raster, region: Region, cfg: GeometryConfig) -> np.ndarray:
    """Pinhole back-projection X = z * K^-1 (x, y, 1) of region pixel centers."""
    ys, xs = np.nonzero(region.pixel_mask)
    z = depth.plane()[ys, xs].astype(np.float64)
    f, cx, cy = _intrinsics(depth.width, depth.height, cfg)
    px = xs + 0.5
    py = ys + 0.5
    return np.stack([z * (px - cx) / f, z * (py - cy) / f, z], axis=1)


def _tls_plane(points: np.ndarray) -> tuple[np.ndarray, float]:
    """Total least squares plane through a point set (SVD of the centered cloud)."""
    centroid = points.mean(axis=0)
    centered = points - centroid
    _, s, vt = np.linalg.svd(centered, full_matrices=False)
    if s.size < 3 or s[1] < 1e-12 * max(s[0], 1e-300):
        raise DegenerateRegion("points are collinear")
    n = vt[2]
    if n[2] < 0:
        n = -n
    if n[2] == 0.0:
        raise DegenerateRegion("plane is edge-on to the camera")
    n = n / np.linalg.norm(n)
    return n, float(n @ centroid)


def fit_plane(depth: Raster, region: Region, cfg: GeometryConfig, rng=None) -> Plane:
    """RANSAC then total least squares over the region's back-projected pixels.

    Inlier tolerance is ``inlier_tol`` of the region's depth range (relative
    depth has no metric unit).  ``rng`` drives the RANSAC draws; omitted, a
    fixed-seed generator keeps the fit deterministic.
    """
    if region.area < 3:
        raise DegenerateRegion(f"region has {region.area} pixels, need >= 3")
    pts = back_project(depth, region, cfg)
    zr = float(pts[:, 2].max() - pts[:, 2].min())
    tol = max(cfg.inlier_tol * zr, 1e-9)
    rng = rng if rng is not None else np.random.default_rng(0)

    best_inliers: np.ndarray | None = None
    best_count = -1
    n_pts = pts.shape[0]
    for _ in range(cfg.ransac_iters):
        idx = rng.choice(n_pts, size=3, replace=False)
        p0, p1, p2 = pts[idx]
        n = np.cross(p1 - p0, p2 - p0)
        norm = np.linalg.norm(n)
        if norm < 1e-15:
            continue
        n = n / norm
        d = np.abs((pts - p0) @ n)
        inliers = d <= tol
        count = int(inliers.sum())
        if count > best_count:
            best_count = count
            best_inliers = inliers
    if best_inliers is None or best_count < 3:
        raise DegenerateRegion("RANSAC found no 3-point support")

    normal, offset = _tls_plane(pts[best_inliers])
    # refine the inlier set once against the TLS plane
    d = np.abs(pts @ normal - offset)
    final = d <= tol
    if int(final.sum()) >= 3:
        try:
            normal, offset = _tls_plane(pts[final])
            best_inliers = final
        except DegenerateRegion:
            pass
    return Plane(
        normal=normal,
        offset=offset,
        inlier_fraction=float(best_inliers.sum()) / n_pts,
    )


def dlt_homography(src, dst) -> Homography:
    """Direct linear transform from 4+ point correspondences."""
    s = np.asarray(src, dtype=np.float64)
    d = np.asarray(dst, dtype=np.float64)
    if s.shape[0] < 4 or s.shape != d.shape:
        raise ValueError("need matching sets of >= 4 points")
    rows = []
    for (x, y), (u, v) in zip(s, d):
        rows.append([-x, -y, -1, 0, 0, 0, u * x, u * y, u])
        rows.append([0, 0, 0, -x, -y, -1, v * x, v * y, v])
    A = np.asarray(rows)
    _, _, vt = np.linalg.svd(A)
    H = vt[-1].reshape(3, 3)
    return Homography(H)


def region_homography(
    plane: Plane,
    region: Region,
    patch_size: tuple[float, float],
    depth: Raster,
    cfg: GeometryConfig,
    area_fraction: float = 0.4,
) -> Homography:
    """Reverse homography from the flat patch rectangle onto the fitted plane.

    The patch rectangle is laid into an in-plane frame (u = image x-axis
    projected onto the plane, v = n x u), centered at the back-projection of
    the region centroid, scaled so the projected quad covers roughly
    ``area_fraction`` of the region's area, then projected through the
    pinhole and fitted with a 4-point DLT.
    """
    n = np.asarray(plane.normal, dtype=np.float64)
    if abs(n[2]) < cfg.min_normal_z:
        raise NumericallySingular(
            f"plane is nearly edge-on (|n_z| = {abs(n[2]):.3f} < {cfg.min_normal_z})"
        )
    f, cx, cy = _intrinsics(depth.width, depth.height, cfg)

    ex = np.array([1.0, 0.0, 0.0])
    u = ex - (ex @ n) * n
    un = np.linalg.norm(u)
    if un < 1e-9:  # plane normal parallel to the x-axis: use y instead
        ey = np.array([0.0, 1.0, 0.0])
        u = ey - (ey @ n) * n
        un = np.linalg.norm(u)
    u = u / un
    v = np.cross(n, u)

    # anchor: region centroid ray intersected with the plane
    cx_px, cy_px = region.centroid
    ray = np.array([(cx_px - cx) / f, (cy_px - cy) / f, 1.0])
    denom = ray @ n
    if abs(denom) < 1e-12:
        raise NumericallySingular("centroid ray is parallel to the plane")
    center = ray * (plane.offset / denom)
    if center[2] <= 1e-9:
        raise NumericallySingular("plane anchor is behind the camera")

    pw, ph = patch_size

    def project(corners3d: np.ndarray) -> np.ndarray:
        z = corners3d[:, 2]
        if np.any(z <= 1e-9):
            raise NumericallySingular("patch corner projects behind the camera")
        return np.stack(
            [f * corners3d[:, 0] / z + cx, f * corners3d[:, 1] / z + cy], axis=1
        )

    def corners_at(scale: float) -> np.ndarray:
        hw = 0.5 * scale * pw
        hh = 0.5 * scale * ph
        offsets = [(-hw, -hh), (hw, -hh), (hw, hh), (-hw, hh)]
        return np.array([center + du * u + dv * v for du, dv in offsets])

    # normalize an initial guess so the projected quad area hits the target
    probe = 1e-3 * center[2]  # tiny in-plane probe, safely in front of the camera
    quad = project(corners_at(probe))
    a0 = _shoelace(quad)
    if a0 <= 0:
        raise NumericallySingular("degenerate probe projection")
    target = area_fraction * region.area
    scale = probe * math.sqrt(target / a0)
    for _ in range(3):  # perspective makes area slightly nonlinear in scale
        quad = project(corners_at(scale))
        a = _shoelace(quad)
        if a <= 0:
            raise NumericallySingular("patch quad degenerated during scaling")
        adj = math.sqrt(target / a)
        scale *= adj
        if abs(adj - 1.0) < 1e-6:
            break
    quad = project(corners_at(scale))

    src = np.array([[0.0, 0.0], [pw, 0.0], [pw, ph], [0.0, ph]])
    return dlt_homography(src, quad)


def _shoelace(q: np.ndarray) -> float:
    x, y = q[:, 0], q[:, 1]
    return 0.5 * abs(float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)))


def fits(
    patch_size: tuple[float, float],
    region: Region,
    H: Homography,
    min_coverage: float = 0.98,
) -> bool:
    """True iff the warped patch quad is convex, inside the image, and at
    least ``min_coverage`` of its area lands on the region mask."""
    pw, ph = patch_size
    corners = np.array([[0.0, 0.0], [pw, 0.0], [pw, ph], [0.0, ph]])
    quad = H.apply(corners)
    height, width = region.pixel_mask.shape
    if not is_convex(quad):
        return False
    if quad[:, 0].min() < 0 or quad[:, 1].min() < 0:
        return False
    if quad[:, 0].max() > width or quad[:, 1].max() > height:
        return False
    inside = polygon_mask(quad, width, height)
    total = int(inside.sum())
    if total == 0:
        return False
    covered = int((inside & region.pixel_mask).sum())
    return covered / total >= min_coverage


def transform_layout(layout, H: Homography):
    """Apply H to every polygon vertex of a glyph layout."""
    new_chars = tuple(
        CharBox(c.char, H.apply(c.quad), c.pen, c.line_index) for c in layout.chars
    )
    return dc_replace(layout, chars=new_chars)


def warp_patch(patch: TextPatch, H: Homography, target_dims: tuple[int, int]) -> TextPatch:
    """Inverse-mapped bilinear warp of color+alpha into image space; layout
    polygons ride the same homography."""
    width, height = target_dims
    src_alpha = patch.alpha.plane()
    src_color = patch.color.pixels
    sh, sw = src_alpha.shape

    corners = H.apply(
        np.array(
            [[0.0, 0.0], [sw, 0.0], [sw, sh], [0.0, sh]], dtype=np.float64
        )
    )
    x0 = max(int(math.floor(corners[:, 0].min())), 0)
    x1 = min(int(math.ceil(corners[:, 0].max())), width)
    y0 = max(int(math.floor(corners[:, 1].min())), 0)
    y1 = min(int(math.ceil(corners[:, 1].max())), height)

    alpha = np.zeros((height, width), dtype=np.float32)
    color = np.zeros((height, width, 3), dtype=np.float32)
    if x1 > x0 and y1 > y0:
        Hinv = np.linalg.inv(H.H)
        xs = np.arange(x0, x1, dtype=np.float64) + 0.5
        ys = np.arange(y0, y1, dtype=np.float64) + 0.5
        gx, gy = np.meshgrid(xs, ys)
        pts = np.stack([gx.ravel(), gy.ravel(), np.ones(gx.size)], axis=0)
        q = Hinv @ pts
        sx = (q[0] / q[2]).reshape(gy.shape) - 0.5
        sy = (q[1] / q[2]).reshape(gy.shape) - 0.5
        a = _bilinear(src_alpha, sx, sy)
        alpha[y0:y1, x0:x1] = a
        for ch in range(3):
            color[y0:y1, x0:x1, ch] = _bilinear(src_color[:, :, ch], sx, sy)
    return TextPatch(
        color=Raster(np.clip(color, 0.0, 1.0)),
        alpha=Raster(np.clip(alpha, 0.0, 1.0)),
        layout=transform_layout(patch.layout, H),
    )


def _bilinear(img: np.ndarray, sx: np.ndarray, sy: np.ndarray) -> np.ndarray:
    """Sample ``img`` at float pixel-index coordinates; outside reads as 0."""
    h, w = img.shape
    x0 = np.floor(sx).astype(np.int64)
    y0 = np.floor(sy).astype(np.int64)
    fx = (sx - x0).astype(np.float32)
    fy = (sy - y0).astype(np.float32)

    def at(yi, xi):
        valid = (yi >= 0) & (yi < h) & (xi >= 0) & (xi < w)
        out = np.zeros(yi.shape, dtype=np.float32)
        out[valid] = img[yi[valid], xi[valid]]
        return out

    v00 = at(y0, x0)
    v01 = at(y0, x0 + 1)
    v10 = at(y0 + 1, x0)
    v11 = at(y0 + 1, x0 + 1)
    return (
        (1 - fy) * ((1 - fx) * v00 + fx * v01) + fy * ((1 - fx) * v10 + fx * v11)
    )
