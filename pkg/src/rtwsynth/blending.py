"""Gradient-domain compositing of a warped text patch into the photograph.

The discrete Poisson equation Delta f = div v is solved per channel on the
paste domain (5-point Laplacian, Dirichlet boundary from the base image)
with plain conjugate gradients; the guidance field either replaces base
gradients with composite gradients or mixes them per edge by magnitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import EmptyDomain
from .raster import Raster
from .textrender import TextPatch

ALPHA_SUPPORT = 0.05


@dataclass(frozen=True)
class SolverConfig:
    tolerance: float = 1e-6
    max_iters: int | None = None  # None -> max(500, 10 * sqrt(|Omega|))


@dataclass(frozen=True)
class PoissonProblem:
    omega: np.ndarray  # bool (h, w) paste domain
    base: np.ndarray  # float64 (h, w, ch) Dirichlet source
    vx: np.ndarray  # float64 (h, w, ch) guidance, forward x-differences
    vy: np.ndarray  # float64 (h, w, ch) guidance, forward y-differences
    cfg: SolverConfig


def _forward_gradients(img: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    vx = np.zeros_like(img)
    vy = np.zeros_like(img)
    vx[:, :-1] = img[:, 1:] - img[:, :-1]
    vy[:-1, :] = img[1:, :] - img[:-1, :]
    return vx, vy


def build_problem(
    base: Raster,
    patch: TextPatch,
    mode: str = "mix",
    cfg: SolverConfig = SolverConfig(),
) -> PoissonProblem:
    """Assemble domain, guidance and boundary for one placement.

    ``replace``: guidance is the gradient of the naive alpha composite.
    ``mix``: per edge, the larger-magnitude gradient of base vs composite.
    """
    if mode not in ("mix", "replace"):
        raise ValueError(f"unknown blend mode {mode!r}")
    alpha = patch.alpha.plane()[:, :, None].astype(np.float64)
    base_px = base.pixels.astype(np.float64)
    if alpha.shape[:2] != base_px.shape[:2]:
        raise ValueError("patch must be in image space (same dims as base)")
    comp = alpha * patch.color.pixels.astype(np.float64) + (1.0 - alpha) * base_px

    omega = alpha[:, :, 0] > ALPHA_SUPPORT
    if not omega.any():
        raise EmptyDomain("patch alpha has no support")
    omega = ndimage.binary_dilation(
        omega, structure=np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], bool)
    )
    # keep off the image frame so every omega pixel has 4 in-image neighbors
    omega[0, :] = omega[-1, :] = False
    omega[:, 0] = omega[:, -1] = False
    # drop isolated pixels (no 4-neighbor inside omega)
    neigh = (
        np.pad(omega[1:, :], ((0, 1), (0, 0))).astype(np.uint8)
        + np.pad(omega[:-1, :], ((1, 0), (0, 0)))
        + np.pad(omega[:, 1:], ((0, 0), (0, 1)))
        + np.pad(omega[:, :-1], ((0, 0), (1, 0)))
    )
    omega &= neigh > 0
    if not omega.any():
        raise EmptyDomain("domain vanished after cleanup")

    gx, gy = _forward_gradients(comp)
    if mode == "mix":
        bx, by = _forward_gradients(base_px)
        gx = np.where(np.abs(bx) > np.abs(gx), bx, gx)
        gy = np.where(np.abs(by) > np.abs(gy), by, gy)
    return PoissonProblem(omega=omega, base=base_px, vx=gx, vy=gy, cfg=cfg)


def _divergence(vx: np.ndarray, vy: np.ndarray) -> np.ndarray:
    div = vx.copy()
    div[:, 1:] -= vx[:, :-1]
    dy = vy.copy()
    dy[1:, :] -= vy[:-1, :]
    return div + dy


def _laplacian_apply(x: np.ndarray, idx: np.ndarray, nmaps) -> np.ndarray:
    """y = A x for the Dirichlet-restricted 5-point Laplacian.

    ``idx``: (h, w) int map, -1 outside omega, unknown index inside.
    ``nmaps``: per direction, (unknown index of neighbor or -1).
    """
    y = 4.0 * x
    for nb in nmaps:
        has = nb >= 0
        y[has] -= x[nb[has]]
    return y


@dataclass
class SolveResult:
    values: np.ndarray  # (h, w, ch), valid inside omega
    converged: bool
    iterations: int
    residual: float


def solve(p: PoissonProblem) -> SolveResult:
    """Conjugate gradients on the SPD Dirichlet Laplacian, per channel."""
    h, w = p.omega.shape
    ys, xs = np.nonzero(p.omega)
    n = ys.size
    idx = np.full((h, w), -1, dtype=np.int64)
    idx[ys, xs] = np.arange(n)

    # neighbor unknown-indices (or -1) per direction, aligned with unknown order
    def nmap(dy, dx):
        yy = ys + dy
        xx = xs + dx
        inside = (yy >= 0) & (yy < h) & (xx >= 0) & (xx < w)
        out = np.full(n, -1, dtype=np.int64)
        out[inside] = idx[yy[inside], xx[inside]]
        return out, yy, xx, inside

    dirs = [(-1, 0), (1, 0), (0, -1), (0, 1)]
    nmaps = []
    boundary_terms = []  # (unknown positions, base pixel coords) per direction
    for dy, dx in dirs:
        nb, yy, xx, inside = nmap(dy, dx)
        nmaps.append(nb)
        on_boundary = inside & (nb < 0)
        boundary_terms.append((np.nonzero(on_boundary)[0], yy[on_boundary], xx[on_boundary]))

    div = _divergence(p.vx, p.vy)
    channels = p.base.shape[2]
    out = np.array(p.base, dtype=np.float64)
    tol = p.cfg.tolerance
    max_iters = p.cfg.max_iters or max(500, int(math.ceil(10.0 * math.sqrt(n))))

    converged = True
    total_iters = 0
    worst_res = 0.0
    for ch in range(channels):
        b = -div[ys, xs, ch]
        for (where, by, bx) in boundary_terms:
            b[where] += p.base[by, bx, ch]

        x = p.base[ys, xs, ch].copy()  # warm start from the base image
        bnorm = math.sqrt(float(b @ b)) or 1.0
        it = 0
        res = math.inf
        while it < max_iters:
            # (re)start from the true residual; the recurrence then runs until
            # it believes it converged, and the outer loop re-verifies
            r = b - _laplacian_apply(x, idx, nmaps)
            res = math.sqrt(float(r @ r)) / bnorm
            if res <= tol:
                break
            d = r.copy()
            rs = float(r @ r)
            while math.sqrt(rs) / bnorm > tol and it < max_iters:
                Ad = _laplacian_apply(d, idx, nmaps)
                dAd = float(d @ Ad)
                if dAd <= 0.0:
                    break
                step = rs / dAd
                x += step * d
                r -= step * Ad
                rs_new = float(r @ r)
                d = r + (rs_new / rs) * d
                rs = rs_new
                it += 1
        r = b - _laplacian_apply(x, idx, nmaps)
        res = math.sqrt(float(r @ r)) / bnorm
        total_iters += it
        worst_res = max(worst_res, res)
        if res > tol:
            converged = False
        out[ys, xs, ch] = x

    return SolveResult(
        values=np.clip(out, 0.0, 1.0),
        converged=converged,
        iterations=total_iters,
        residual=worst_res,
    )


def compose(base: Raster, solved: SolveResult, p: PoissonProblem) -> Raster:
    """Paste solved values inside omega; everything else stays bit-identical."""
    out = np.array(base.pixels, dtype=np.float32)
    out[p.omega] = np.clip(solved.values[p.omega], 0.0, 1.0).astype(np.float32)
    return Raster(out)


def alpha_blend(base: Raster, patch: TextPatch) -> Raster:
    """Plain compositing fallback: out = alpha * patch + (1 - alpha) * base."""
    a = patch.alpha.plane()[:, :, None]
    out = a * patch.color.pixels + (1.0 - a) * base.pixels
    return Raster(np.clip(out, 0.0, 1.0))
