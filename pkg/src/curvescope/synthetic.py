"""Deterministic synthetic test images.

Every generator is a pure function of its arguments; the random ones take an
explicit seed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

__all__ = [
    "Cell",
    "disk",
    "disk_boundary_band",
    "step_edge",
    "gaussian_blob",
    "texture",
    "lowlight_cells",
    "cell_boundary_band",
]


def _coords(shape):
    return np.mgrid[0 : shape[0], 0 : shape[1]].astype(np.float64)


def disk(shape=(128, 128), radius=30.0, center=None, inside=1.0, outside=0.0) -> np.ndarray:
    """Rasterized filled disk (pixel centres within ``radius``)."""
    cy, cx = center if center is not None else ((shape[0] - 1) / 2, (shape[1] - 1) / 2)
    y, x = _coords(shape)
    return np.where((y - cy) ** 2 + (x - cx) ** 2 <= radius**2, inside, outside)


def disk_boundary_band(shape=(128, 128), radius=30.0, center=None, width=2.0) -> np.ndarray:
    cy, cx = center if center is not None else ((shape[0] - 1) / 2, (shape[1] - 1) / 2)
    y, x = _coords(shape)
    return np.abs(np.hypot(y - cy, x - cx) - radius) <= width


def step_edge(shape=(64, 64), column=32, low=0.2, high=0.8) -> np.ndarray:
    """Vertical step: columns ``< column`` at ``low``, the rest at ``high``."""
    img = np.full(shape, float(low))
    img[:, column:] = high
    return img


def gaussian_blob(shape=(64, 64), sigma=4.0, center=None, amplitude=1.0, background=0.0) -> np.ndarray:
    cy, cx = center if center is not None else ((shape[0] - 1) / 2, (shape[1] - 1) / 2)
    y, x = _coords(shape)
    return background + amplitude * np.exp(-((y - cy) ** 2 + (x - cx) ** 2) / (2.0 * sigma**2))


def texture(shape=(256, 256), seed=0, noise=0.004, blur=1.5) -> np.ndarray:
    """Cell-field texture: overlapping elliptical cells, some with nuclei, optically blurred.

    Flat interiors with blurred edges, on a dark background, plus mild Gaussian noise.
    """
    rng = np.random.default_rng(seed)
    y, x = _coords(shape)
    img = np.full(shape, 0.15)
    for _ in range(18):
        cy, cx = rng.uniform(0, shape[0]), rng.uniform(0, shape[1])
        rx = rng.uniform(8.0, 30.0)
        ry = rx * rng.uniform(0.7, 1.0)
        theta = rng.uniform(0, np.pi)
        u = (x - cx) * np.cos(theta) + (y - cy) * np.sin(theta)
        v = -(x - cx) * np.sin(theta) + (y - cy) * np.cos(theta)
        img[(u / rx) ** 2 + (v / ry) ** 2 <= 1] += rng.uniform(0.15, 0.35)
        if rng.random() < 0.6:
            img[(u / (0.35 * rx)) ** 2 + (v / (0.35 * ry)) ** 2 <= 1] += rng.uniform(0.1, 0.25)
    img = ndimage.gaussian_filter(img, blur) + rng.normal(0.0, noise, shape)
    return np.clip(img, 0.0, 1.0)


@dataclass(frozen=True)
class Cell:
    cy: float
    cx: float
    ry: float
    rx: float
    angle: float
    level: float

    def signed_distance(self, y: np.ndarray, x: np.ndarray) -> np.ndarray:
        """Approximate distance to the ellipse boundary in pixels (negative inside)."""
        c, s = np.cos(self.angle), np.sin(self.angle)
        u = (x - self.cx) * c + (y - self.cy) * s
        v = -(x - self.cx) * s + (y - self.cy) * c
        rho = np.hypot(u / self.rx, v / self.ry)
        return (rho - 1.0) * min(self.rx, self.ry)


def lowlight_cells(
    shape=(275, 283), seed=3, background=0.04, noise=0.004, blur=0.5, n_bright=4, faint=(0.10, 0.20)
):
    """A dark field of elliptical cells, a few well lit and the rest faint.

    Returns ``(image, cells)``.  Cell interiors sit ``level`` above the
    background, bright cells at 0.6-0.85 and faint ones within ``faint``.
    """
    rng = np.random.default_rng(seed)
    y, x = _coords(shape)
    cells: list[Cell] = []
    attempts = 0
    while len(cells) < 14 and attempts < 5000:
        attempts += 1
        ry, rx = rng.uniform(10.0, 22.0), rng.uniform(10.0, 22.0)
        cy = rng.uniform(ry + 6, shape[0] - ry - 6)
        cx = rng.uniform(rx + 6, shape[1] - rx - 6)
        if any(np.hypot(cy - o.cy, cx - o.cx) < max(ry, rx) + max(o.ry, o.rx) + 6 for o in cells):
            continue
        level = rng.uniform(0.6, 0.85) if len(cells) < n_bright else rng.uniform(*faint)
        cells.append(Cell(cy, cx, ry, rx, rng.uniform(0, np.pi), level))
    img = np.full(shape, float(background))
    for cell in cells:
        img[cell.signed_distance(y, x) <= 0] += cell.level
    img = ndimage.gaussian_filter(img, blur)
    img += rng.normal(0.0, noise, shape)
    return np.clip(img, 0.0, 1.0), cells


def cell_boundary_band(shape, cell: Cell, width=2.0) -> np.ndarray:
    y, x = _coords(shape)
    return np.abs(cell.signed_distance(y, x)) <= width
