"""Independent oracle implementations used to cross-check the package.

Everything here deliberately avoids the package's own algorithms: dense
linear algebra instead of CG, scalar flood fill instead of scipy labeling,
per-pixel crossing tests instead of vectorized rasterization.
"""

from __future__ import annotations

from collections import deque
from pathlib import Path

import numpy as np

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"


# ---------------------------------------------------------------------------
# Dense Poisson oracle: assemble the Dirichlet Laplacian row by row and
# solve directly.


def dense_poisson_solve(
    omega: np.ndarray, base: np.ndarray, vx: np.ndarray, vy: np.ndarray
) -> np.ndarray:
    """Direct solve of (4f_p - sum f_q) = -div v + boundary terms.

    ``base`` supplies Dirichlet values outside omega.  Single channel.
    Conventions match the engine's: forward-difference guidance field,
    backward-difference divergence.
    """
    h, w = omega.shape
    ids = -np.ones((h, w), dtype=int)
    ys, xs = np.nonzero(omega)
    for k, (y, x) in enumerate(zip(ys, xs)):
        ids[y, x] = k
    n = len(ys)
    A = np.zeros((n, n))
    b = np.zeros(n)

    # divergence of the guidance field at p: vx[p]-vx[p-ex] + vy[p]-vy[p-ey]
    for k, (y, x) in enumerate(zip(ys, xs)):
        div = vx[y, x] + vy[y, x]
        if x > 0:
            div -= vx[y, x - 1]
        if y > 0:
            div -= vy[y - 1, x]
        b[k] = -div
        A[k, k] = 4.0
        for dy, dx in ((0, 1), (0, -1), (1, 0), (-1, 0)):
            qy, qx = y + dy, x + dx
            if not (0 <= qy < h and 0 <= qx < w):
                continue  # engine never builds domains touching the frame
            if ids[qy, qx] >= 0:
                A[k, ids[qy, qx]] -= 1.0
            else:
                b[k] += base[qy, qx]
    return np.linalg.solve(A, b), ids


def random_poisson_problem(rng: np.random.Generator, max_cells: int = 64):
    """A small random domain with random base and guidance fields."""
    h, w = int(rng.integers(6, 14)), int(rng.integers(6, 14))
    omega = np.zeros((h, w), dtype=bool)
    n_seed = int(rng.integers(1, 4))
    for _ in range(n_seed):
        cy, cx = int(rng.integers(2, h - 2)), int(rng.integers(2, w - 2))
        ry, rx = int(rng.integers(1, 3)), int(rng.integers(1, 3))
        omega[max(1, cy - ry) : min(h - 1, cy + ry + 1),
              max(1, cx - rx) : min(w - 1, cx + rx + 1)] = True
    # keep it off the frame and below the size cap
    omega[0, :] = omega[-1, :] = False
    omega[:, 0] = omega[:, -1] = False
    ys, xs = np.nonzero(omega)
    if len(ys) > max_cells:
        keep = rng.choice(len(ys), size=max_cells, replace=False)
        mask = np.zeros_like(omega)
        mask[ys[keep], xs[keep]] = True
        omega = mask
    base = rng.random((h, w))
    vx = rng.normal(0.0, 0.3, (h, w))
    vy = rng.normal(0.0, 0.3, (h, w))
    return omega, base, vx, vy


# ---------------------------------------------------------------------------
# Flood-fill connected components (4-connectivity), scalar BFS.


def flood_fill_label(mask: np.ndarray) -> list[np.ndarray]:
    """Connected components of True cells as a list of boolean masks."""
    h, w = mask.shape
    seen = np.zeros_like(mask, dtype=bool)
    comps = []
    for sy in range(h):
        for sx in range(w):
            if not mask[sy, sx] or seen[sy, sx]:
                continue
            comp = np.zeros_like(mask, dtype=bool)
            q = deque([(sy, sx)])
            seen[sy, sx] = True
            while q:
                y, x = q.popleft()
                comp[y, x] = True
                for dy, dx in ((0, 1), (0, -1), (1, 0), (-1, 0)):
                    ny, nx = y + dy, x + dx
                    if 0 <= ny < h and 0 <= nx < w and mask[ny, nx] and not seen[ny, nx]:
                        seen[ny, nx] = True
                        q.append((ny, nx))
            comps.append(comp)
    return comps


# ---------------------------------------------------------------------------
# Scalar point-in-polygon (crossing number, half-open edges), one point at
# a time; the reference for the vectorized rasterizer.


def point_in_polygon_scalar(px: float, py: float, vertices) -> bool:
    v = np.asarray(vertices, dtype=np.float64)
    n = len(v)
    inside = False
    for i in range(n):
        x1, y1 = v[i]
        x2, y2 = v[(i + 1) % n]
        if (y1 <= py) != (y2 <= py):
            t = (py - y1) / (y2 - y1)
            if px < x1 + t * (x2 - x1):
                inside = not inside
    return inside


def rasterize_polygon_scalar(vertices, width: int, height: int) -> np.ndarray:
    out = np.zeros((height, width), dtype=bool)
    for r in range(height):
        for c in range(width):
            out[r, c] = point_in_polygon_scalar(c + 0.5, r + 0.5, vertices)
    return out


# ---------------------------------------------------------------------------
# Direct (quadratic-cost) Gaussian blur with renormalized edges.


def direct_gaussian_blur(img: np.ndarray, sigma: float) -> np.ndarray:
    radius = int(np.ceil(3.0 * sigma))
    xs = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (xs / sigma) ** 2)
    k /= k.sum()
    kernel = np.outer(k, k)
    h, w = img.shape[:2]
    channels = img.shape[2] if img.ndim == 3 else 1
    src = img.reshape(h, w, channels).astype(np.float64)
    out = np.zeros_like(src)
    for y in range(h):
        for x in range(w):
            y0, y1 = max(0, y - radius), min(h, y + radius + 1)
            x0, x1 = max(0, x - radius), min(w, x + radius + 1)
            sub = kernel[y0 - y + radius : y1 - y + radius,
                         x0 - x + radius : x1 - x + radius]
            weight = sub.sum()
            for ch in range(channels):
                out[y, x, ch] = (src[y0:y1, x0:x1, ch] * sub).sum() / weight
    return out.reshape(img.shape)


# ---------------------------------------------------------------------------
# Homography helpers


def random_homography(rng: np.random.Generator) -> np.ndarray:
    """A well-conditioned random projective map, H[2,2] = 1."""
    while True:
        H = np.eye(3)
        H[:2, :2] += rng.normal(0.0, 0.25, (2, 2))
        H[:2, 2] = rng.normal(0.0, 20.0, 2)
        H[2, :2] = rng.normal(0.0, 1e-3, 2)
        if abs(np.linalg.det(H)) > 1e-3:
            return H


def apply_h(H: np.ndarray, pts: np.ndarray) -> np.ndarray:
    p = np.hstack([pts, np.ones((len(pts), 1))])
    q = (H @ p.T).T
    return q[:, :2] / q[:, 2:3]


# ---------------------------------------------------------------------------
# Independent plane fit: direct least squares z = ax + by + c re-expressed
# as a unit normal (valid for near-fronto-parallel synthetic cases), and an
# exact normal for analytically planar point sets via SVD of a different
# formulation (eigenvector of the covariance, computed with eigh).


def plane_normal_eigh(points: np.ndarray) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64)
    centered = pts - pts.mean(axis=0)
    cov = centered.T @ centered
    w, v = np.linalg.eigh(cov)
    n = v[:, 0]
    if n[2] < 0:
        n = -n
    return n / np.linalg.norm(n)


def angle_deg(a: np.ndarray, b: np.ndarray) -> float:
    c = abs(float(np.dot(a, b)) / (np.linalg.norm(a) * np.linalg.norm(b)))
    return float(np.degrees(np.arccos(min(1.0, c))))
