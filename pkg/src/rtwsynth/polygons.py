"""Polygon helpers shared by placement, blending and annotation code.

Pixel (row r, col c) is treated as the point (c + 0.5, r + 0.5); a pixel
belongs to a polygon iff its center does (crossing-number rule with the
half-open edge convention, so shared edges never double-count).
"""

from __future__ import annotations

import numpy as np


def polygon_mask(vertices, width: int, height: int) -> np.ndarray:
    """Boolean (height, width) mask of pixel centers inside the polygon."""
    v = np.asarray(vertices, dtype=np.float64)
    if v.ndim != 2 or v.shape[0] < 3:
        return np.zeros((height, width), dtype=bool)
    x0 = max(int(np.floor(v[:, 0].min() - 0.5)), 0)
    x1 = min(int(np.ceil(v[:, 0].max() + 0.5)), width)
    y0 = max(int(np.floor(v[:, 1].min() - 0.5)), 0)
    y1 = min(int(np.ceil(v[:, 1].max() + 0.5)), height)
    mask = np.zeros((height, width), dtype=bool)
    if x1 <= x0 or y1 <= y0:
        return mask
    xs = np.arange(x0, x1, dtype=np.float64) + 0.5
    ys = np.arange(y0, y1, dtype=np.float64) + 0.5
    px, py = np.meshgrid(xs, ys)
    inside = np.zeros(px.shape, dtype=bool)
    n = v.shape[0]
    for i in range(n):
        ax, ay = v[i]
        bx, by = v[(i + 1) % n]
        crosses = (ay <= py) != (by <= py)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = ax + (py - ay) * (bx - ax) / (by - ay)
        inside ^= crosses & (px < xint)
    mask[y0:y1, x0:x1] = inside
    return mask


def polygon_area(vertices) -> float:
    """Absolute shoelace area."""
    v = np.asarray(vertices, dtype=np.float64)
    x, y = v[:, 0], v[:, 1]
    return 0.5 * abs(float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)))


def is_convex(vertices, tol: float = 1e-9) -> bool:
    """True iff the polygon is convex (no sign change in edge cross products)."""
    v = np.asarray(vertices, dtype=np.float64)
    n = v.shape[0]
    if n < 3:
        return False
    e = np.roll(v, -1, axis=0) - v
    cross = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
    return bool(np.all(cross >= -tol) or np.all(cross <= tol))


def points_in_polygon(points, vertices) -> np.ndarray:
    """Vectorized crossing-number test for arbitrary query points."""
    p = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    v = np.asarray(vertices, dtype=np.float64)
    inside = np.zeros(p.shape[0], dtype=bool)
    n = v.shape[0]
    px, py = p[:, 0], p[:, 1]
    for i in range(n):
        ax, ay = v[i]
        bx, by = v[(i + 1) % n]
        crosses = (ay <= py) != (by <= py)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = ax + (py - ay) * (bx - ax) / (by - ay)
        inside ^= crosses & (px < xint)
    return inside


def point_to_polygon_distance(points, vertices) -> np.ndarray:
    """Distance from each point to the polygon boundary (0 if on it);
    points inside get distance 0 is NOT implied -- this is boundary distance."""
    p = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    v = np.asarray(vertices, dtype=np.float64)
    n = v.shape[0]
    best = np.full(p.shape[0], np.inf)
    for i in range(n):
        a = v[i]
        b = v[(i + 1) % n]
        ab = b - a
        denom = float(ab @ ab)
        if denom == 0.0:
            d = np.hypot(p[:, 0] - a[0], p[:, 1] - a[1])
        else:
            t = np.clip(((p - a) @ ab) / denom, 0.0, 1.0)
            proj = a + t[:, None] * ab
            d = np.hypot(p[:, 0] - proj[:, 0], p[:, 1] - proj[:, 1])
        best = np.minimum(best, d)
    return best


def contains_polygon(outer, inner, tol: float = 0.5) -> bool:
    """True iff every vertex of ``inner`` lies in ``outer`` or within ``tol`` of
    its boundary."""
    pts = np.asarray(inner, dtype=np.float64).reshape(-1, 2)
    inside = points_in_polygon(pts, outer)
    if inside.all():
        return True
    d = point_to_polygon_distance(pts[~inside], outer)
    return bool(np.all(d <= tol))


def convex_hull(points) -> np.ndarray:
    """Andrew's monotone chain; returns hull vertices counter-clockwise
    (in the y-down image frame this is the positive-shoelace order)."""
    pts = np.unique(np.asarray(points, dtype=np.float64).reshape(-1, 2), axis=0)
    if pts.shape[0] <= 2:
        return pts
    pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))]

    def half(seq):
        out: list[np.ndarray] = []
        for q in seq:
            while len(out) >= 2:
                o, a = out[-2], out[-1]
                if (a[0] - o[0]) * (q[1] - o[1]) - (a[1] - o[1]) * (q[0] - o[0]) <= 0:
                    out.pop()
                else:
                    break
            out.append(q)
        return out

    lower = half(pts)
    upper = half(pts[::-1])
    return np.array(lower[:-1] + upper[:-1])


def offset_convex(vertices, pad: float) -> np.ndarray:
    """Outward offset of a convex polygon by ``pad`` (edge shift + re-intersect)."""
    v = np.asarray(vertices, dtype=np.float64)
    n = v.shape[0]
    if n < 3 or pad <= 0:
        return v.copy()
    # orientation sign decides which normal points outward
    sign = np.sign(
        np.sum(v[:, 0] * np.roll(v[:, 1], -1) - np.roll(v[:, 0], -1) * v[:, 1])
    ) or 1.0
    lines = []  # (point-on-line, direction)
    for i in range(n):
        a, b = v[i], v[(i + 1) % n]
        d = b - a
        norm = np.hypot(*d)
        if norm < 1e-12:
            continue
        d = d / norm
        outward = np.array([d[1], -d[0]]) * sign
        lines.append((a + outward * pad, d))
    m = len(lines)
    out = []
    for i in range(m):
        p1, d1 = lines[i]
        p2, d2 = lines[(i + 1) % m]
        denom = d1[0] * d2[1] - d1[1] * d2[0]
        if abs(denom) < 1e-12:
            out.append(p2)
            continue
        t = ((p2[0] - p1[0]) * d2[1] - (p2[1] - p1[1]) * d2[0]) / denom
        out.append(p1 + t * d1)
    return np.array(out)


def transform_points(H: np.ndarray, points) -> np.ndarray:
    """Apply a 3x3 projective map to (N, 2) points with perspective division."""
    p = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    ones = np.ones((p.shape[0], 1))
    q = (np.asarray(H, dtype=np.float64) @ np.hstack([p, ones]).T).T
    return q[:, :2] / q[:, 2:3]


def clip_to_rect(vertices, width: float, height: float) -> np.ndarray:
    """Sutherland-Hodgman clip of a polygon to [0,width] x [0,height].

    Convex input stays convex; the result contains anything that lies in
    both the polygon and the rectangle.  Empty intersection -> (0, 2).
    """
    poly = [np.asarray(p, dtype=np.float64) for p in np.asarray(vertices).reshape(-1, 2)]
    # (inside predicate, intersection solver) per rectangle edge
    edges = (
        (lambda p: p[0] >= 0.0, 0, 0.0),
        (lambda p: p[0] <= width, 0, width),
        (lambda p: p[1] >= 0.0, 1, 0.0),
        (lambda p: p[1] <= height, 1, height),
    )
    for inside, axis, level in edges:
        if not poly:
            break
        out: list[np.ndarray] = []
        for i, cur in enumerate(poly):
            prev = poly[i - 1]
            cur_in, prev_in = inside(cur), inside(prev)
            if cur_in != prev_in:
                t = (level - prev[axis]) / (cur[axis] - prev[axis])
                out.append(prev + t * (cur - prev))
            if cur_in:
                out.append(cur)
        poly = out
    return np.array(poly, dtype=np.float64).reshape(-1, 2)
