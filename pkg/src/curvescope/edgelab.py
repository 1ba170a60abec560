"""Canny edges and curvelet-domain edge improvement.

The improvement pipeline runs Canny on the image, transforms both the image
and the {0, 1} edge map, overwrites the edge map's finest scales with the
image's coefficients, inverts, keeps pixels above twice the mean absolute
value and thins the result.  Scales beyond what the image supports are
reached by bilinear upsampling first; the result is brought back to the
input resolution by block maximum.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from . import _kernels
from .fdct import CurveletSystem, forward, inverse, max_scales, plan
from .grid import as_real_grid, downsample, upsample

__all__ = [
    "ImproveConfig",
    "ImproveResult",
    "otsu_threshold",
    "canny",
    "threshold_two_mean",
    "thin",
    "upsample_factor",
    "run_improve",
    "improve_edges",
]


def otsu_threshold(values: np.ndarray, bins: int = 256) -> float:
    """Otsu threshold of values in [0, 1] (between-class variance maximiser)."""
    hist, edges = np.histogram(np.asarray(values).ravel(), bins=bins, range=(0.0, 1.0))
    centres = 0.5 * (edges[:-1] + edges[1:])
    w0 = np.cumsum(hist).astype(np.float64)
    w1 = w0[-1] - w0
    s0 = np.cumsum(hist * centres)
    mu0 = np.divide(s0, w0, out=np.zeros_like(s0), where=w0 > 0)
    mu1 = np.divide(s0[-1] - s0, w1, out=np.zeros_like(s0), where=w1 > 0)
    between = w0 * w1 * (mu0 - mu1) ** 2
    return float(edges[int(np.argmax(between)) + 1])


def canny(image: np.ndarray, sigma: float = 1.0, low: float | None = None, high: float | str = "auto") -> np.ndarray:
    """Canny edge map.

    Thresholds apply to the gradient magnitude normalised by its maximum.
    With ``high="auto"`` the high threshold is Otsu's threshold of that
    magnitude. A missing ``low`` defaults to ``0.4 * high`` in both modes.
    """
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    auto = isinstance(high, str)
    if auto and high != "auto":
        raise ValueError(f"high must be a number or 'auto', got {high!r}")
    if not auto:
        high = float(high)
        low = 0.4 * high if low is None else float(low)
        if not 0.0 < low < high <= 1.0:
            raise ValueError(f"invalid thresholds: need 0 < low < high <= 1, got low={low}, high={high}")

    image = as_real_grid(image)
    smoothed = ndimage.gaussian_filter(image, sigma, mode="nearest")
    gy = ndimage.sobel(smoothed, axis=0, mode="nearest")
    gx = ndimage.sobel(smoothed, axis=1, mode="nearest")
    mag = np.hypot(gx, gy)
    peak = mag.max()
    if peak <= 1e-12:
        return np.zeros(image.shape, dtype=bool)
    mag /= peak
    if auto:
        high = otsu_threshold(mag)
        low = 0.4 * high if low is None else float(low)
        if not 0.0 < low < high:
            raise ValueError(f"invalid low threshold {low} for automatic high {high:.4g}")
    nms = _kernels.nonmax_suppress(mag, gx, gy)
    return _kernels.hysteresis(nms >= high, nms >= low)


def threshold_two_mean(grid: np.ndarray) -> np.ndarray:
    values = np.abs(np.asarray(grid, dtype=np.float64))
    return values > 2.0 * values.mean()


# neighbour offsets in cyclic order starting east, counter-clockwise
_RING = ((0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1))


def _yokoi8(img: np.ndarray, r: int, c: int) -> int:
    rows, cols = img.shape
    x = [
        0 if (0 <= r + dr < rows and 0 <= c + dc < cols and img[r + dr, c + dc]) else 1
        for dr, dc in _RING
    ]
    x += x[:2]
    return sum(x[k] - x[k] * x[k + 1] * x[k + 2] for k in (0, 2, 4, 6))


def _square_blocks(img: np.ndarray) -> np.ndarray:
    return np.argwhere(img[:-1, :-1] & img[1:, :-1] & img[:-1, 1:] & img[1:, 1:])


def _local_pieces(img: np.ndarray, r: int, c: int) -> int:
    """8-components of on-neighbours of (r, c) within its 3x3 window."""
    win = np.zeros((3, 3), dtype=bool)
    r0, c0 = max(r - 1, 0), max(c - 1, 0)
    patch = img[r0 : r + 2, c0 : c + 2]
    win[r0 - r + 1 : r0 - r + 1 + patch.shape[0], c0 - c + 1 : c0 - c + 1 + patch.shape[1]] = patch
    win[1, 1] = False
    return ndimage.label(win, structure=np.ones((3, 3)))[1]


def _pick_in_square(img: np.ndarray, r: int, c: int):
    cells = ((r, c), (r, c + 1), (r + 1, c), (r + 1, c + 1))
    for p in cells:
        if _yokoi8(img, *p) == 1:
            return p
    # no simple pixel: merge background holes rather than split the curve
    for p in cells:
        if _local_pieces(img, *p) == 1:
            return p
    return cells[0]


def _restore_vanished(src: np.ndarray, out: np.ndarray) -> np.ndarray:
    # Zhang-Suen erases 2x2 squares outright; keep one pixel per lost component
    labels, count = ndimage.label(src, structure=np.ones((3, 3)))
    if count == 0:
        return out
    alive = np.zeros(count + 1, dtype=bool)
    alive[labels[out]] = True
    for k in np.flatnonzero(~alive[1:]) + 1:
        pts = np.argwhere(labels == k)
        d = ((pts - pts.mean(axis=0)) ** 2).sum(axis=1)
        out[tuple(pts[int(np.argmin(d))])] = True
    return out


def thin(edges: np.ndarray) -> np.ndarray:
    """Zhang-Suen thinning to convergence, with two repairs.

    Zhang-Suen can stall on 2x2 squares next to small holes. Inside each such
    square a topologically simple pixel is deleted when one exists, otherwise
    one whose removal keeps the foreground locally connected, and thinning
    resumes until nothing changes. Components that thinning erased entirely
    keep the pixel nearest their centroid.
    """
    src = np.asarray(edges, dtype=bool)
    out = _kernels.zhang_suen(src)
    while True:
        removed = False
        for r, c in _square_blocks(out):
            if out[r : r + 2, c : c + 2].all():
                out[_pick_in_square(out, r, c)] = False
                removed = True
        if not removed:
            return _restore_vanished(src, out)
        out = _kernels.zhang_suen(out)


@dataclass(frozen=True)
class ImproveConfig:
    scale: int = 5
    replace_depth: int = 1
    n_theta: int = 16
    finest: str = "curvelets"
    canny_sigma: float = 1.0
    canny_low: float | None = None
    canny_high: float | str = "auto"
    # reconstructions whose peak is below this are round-off and yield no edges
    noise_floor: float = 1e-9

    def validate(self) -> None:
        if self.scale < 2:
            raise ValueError(f"scale must be >= 2, got {self.scale}")
        if not 1 <= self.replace_depth < self.scale:
            raise ValueError(f"replace depth must satisfy 1 <= depth < J, got {self.replace_depth} for J={self.scale}")


@dataclass
class ImproveResult:
    canny: np.ndarray
    edges: np.ndarray
    reconstruction: np.ndarray  # at working (possibly upsampled) resolution
    factor: int
    config: ImproveConfig


def upsample_factor(rows: int, cols: int, J: int) -> int:
    """Smallest factor in (1, 2, 4) for which a ``J``-scale plan fits."""
    for factor in (1, 2, 4):
        if min(rows, cols) * factor >= 16 and max_scales(rows * factor, cols * factor) >= J:
            return factor
    raise ValueError(f"scale J={J} infeasible for a {rows}x{cols} image even with 4x upsampling")


def run_improve(image: np.ndarray, config: ImproveConfig | None = None, system: CurveletSystem | None = None) -> ImproveResult:
    config = config or ImproveConfig()
    config.validate()
    image = as_real_grid(image)
    rows, cols = image.shape
    factor = upsample_factor(rows, cols, config.scale)

    edges0 = canny(image, config.canny_sigma, config.canny_low, config.canny_high)
    work_img = image
    work_edges = edges0.astype(np.float64)
    if factor > 1:
        work_img = upsample(image, factor)
        work_edges = upsample(work_edges, factor)

    if system is None:
        system = plan(work_img.shape[0], work_img.shape[1], config.scale, config.n_theta, config.finest)
    elif (system.m, system.n, system.J) != (work_img.shape[0], work_img.shape[1], config.scale):
        raise ValueError("supplied system does not match the working image and scale")

    c_img = forward(system, work_img)
    c_edges = forward(system, work_edges)
    for j in range(config.scale - config.replace_depth + 1, config.scale + 1):
        c_edges.data[j - 1] = [c.copy() for c in c_img.data[j - 1]]
    recon = inverse(system, c_edges)

    if np.abs(recon).max() <= config.noise_floor:
        binary = np.zeros(recon.shape, dtype=bool)
    else:
        binary = threshold_two_mean(recon)
    out = thin(binary)
    if factor > 1:
        out = downsample(out, factor, reduce="max").astype(bool)
    return ImproveResult(edges0, out, recon, factor, config)


def improve_edges(image: np.ndarray, config: ImproveConfig | None = None, system: CurveletSystem | None = None) -> np.ndarray:
    return run_improve(image, config, system).edges
