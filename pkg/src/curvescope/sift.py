"""SIFT keypoints, ratio-test matching and the cross-scale stability report.

Follows Lowe's detector: a Gaussian scale space over octaves (input first
upsampled 2x), extrema of the difference-of-Gaussians, quadratic sub-pixel
refinement, contrast and principal-curvature rejection, orientation
histograms and 4x4x8 gradient descriptors.  Positions are reported in input
pixels with ``x`` along columns and ``y`` along rows.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from . import _kernels
from .contributions import enhance as enhance_grid
from .contributions import scale_contribution
from .fdct import CurveletSystem, forward
from .grid import as_real_grid, upsample

__all__ = [
    "SiftParams",
    "Keypoint",
    "SourceRow",
    "StabilityReport",
    "detect_keypoints",
    "match_keypoints",
    "stability_report",
    "keypoints_to_json",
    "keypoints_from_json",
]


@dataclass(frozen=True)
class SiftParams:
    sigma: float = 1.6
    intervals: int = 3
    upsample: bool = True
    assumed_blur: float = 0.5
    contrast_threshold: float = 0.03
    edge_ratio: float = 10.0
    border: int = 5
    max_refine_steps: int = 5
    ori_bins: int = 36
    ori_peak_ratio: float = 0.8
    ori_sigma_factor: float = 1.5
    descr_width: int = 4
    descr_bins: int = 8
    descr_scale_factor: float = 3.0
    descr_clamp: float = 0.2
    min_octave_size: int = 16


@dataclass(frozen=True, eq=False)
class Keypoint:
    x: float
    y: float
    sigma: float
    orientation: float
    descriptor: np.ndarray = field(repr=False)
    octave: int = 0
    interval: int = 0
    response: float = 0.0

    def to_dict(self) -> dict:
        return {
            "x": self.x,
            "y": self.y,
            "sigma": self.sigma,
            "orientation": self.orientation,
            "descriptor": [float(v) for v in self.descriptor],
        }


def keypoints_to_json(keypoints) -> str:
    return json.dumps([k.to_dict() for k in keypoints])


def keypoints_from_json(text: str) -> list[Keypoint]:
    return [
        Keypoint(d["x"], d["y"], d["sigma"], d["orientation"], np.asarray(d["descriptor"], dtype=np.float64))
        for d in json.loads(text)
    ]


# -- scale space -----------------------------------------------------------------


def _scale_space(image: np.ndarray, p: SiftParams):
    if p.upsample:
        base = upsample(image, 2)
        prior = 2.0 * p.assumed_blur
    else:
        base = image
        prior = p.assumed_blur
    base = ndimage.gaussian_filter(base, math.sqrt(max(p.sigma**2 - prior**2, 0.01)), mode="nearest")

    n_levels = p.intervals + 3
    k = 2.0 ** (1.0 / p.intervals)
    totals = [p.sigma * k**i for i in range(n_levels)]
    increments = [0.0] + [math.sqrt(totals[i] ** 2 - totals[i - 1] ** 2) for i in range(1, n_levels)]

    gaussians, dogs = [], []
    octave_base = base
    while min(octave_base.shape) >= p.min_octave_size:
        levels = [octave_base]
        for inc in increments[1:]:
            levels.append(ndimage.gaussian_filter(levels[-1], inc, mode="nearest"))
        stack = np.stack(levels)
        gaussians.append(stack)
        dogs.append(stack[1:] - stack[:-1])
        octave_base = stack[p.intervals][::2, ::2]
    return gaussians, dogs


def _derivatives(D: np.ndarray, s: int, r: int, c: int):
    v = D[s, r, c]
    g = 0.5 * np.array([D[s, r, c + 1] - D[s, r, c - 1], D[s, r + 1, c] - D[s, r - 1, c], D[s + 1, r, c] - D[s - 1, r, c]])
    dxx = D[s, r, c + 1] + D[s, r, c - 1] - 2 * v
    dyy = D[s, r + 1, c] + D[s, r - 1, c] - 2 * v
    dss = D[s + 1, r, c] + D[s - 1, r, c] - 2 * v
    dxy = 0.25 * (D[s, r + 1, c + 1] - D[s, r + 1, c - 1] - D[s, r - 1, c + 1] + D[s, r - 1, c - 1])
    dxs = 0.25 * (D[s + 1, r, c + 1] - D[s + 1, r, c - 1] - D[s - 1, r, c + 1] + D[s - 1, r, c - 1])
    dys = 0.25 * (D[s + 1, r + 1, c] - D[s + 1, r - 1, c] - D[s - 1, r + 1, c] + D[s - 1, r - 1, c])
    H = np.array([[dxx, dxy, dxs], [dxy, dyy, dys], [dxs, dys, dss]])
    return v, g, H


def _refine(D: np.ndarray, s: int, r: int, c: int, p: SiftParams):
    S, R, C = D.shape
    for _ in range(p.max_refine_steps):
        v, g, H = _derivatives(D, s, r, c)
        try:
            offset = -np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            return None
        if np.all(np.abs(offset) < 0.5):
            break
        c += int(round(offset[0]))
        r += int(round(offset[1]))
        s += int(round(offset[2]))
        if s < 1 or s > S - 2 or r < p.border or r >= R - p.border or c < p.border or c >= C - p.border:
            return None
    else:
        return None
    contrast = v + 0.5 * float(g @ offset)
    if abs(contrast) < p.contrast_threshold:
        return None
    tr = H[0, 0] + H[1, 1]
    det = H[0, 0] * H[1, 1] - H[0, 1] ** 2
    if det <= 0 or tr * tr * p.edge_ratio >= (p.edge_ratio + 1) ** 2 * det:
        return None
    return s, r, c, offset, contrast


def _orientations(G: np.ndarray, r: int, c: int, sigma_oct: float, p: SiftParams) -> list[float]:
    R, C = G.shape
    sw = p.ori_sigma_factor * sigma_oct
    radius = int(round(3.0 * sw))
    r0, r1 = max(r - radius, 1), min(r + radius, R - 2)
    c0, c1 = max(c - radius, 1), min(c + radius, C - 2)
    if r0 > r1 or c0 > c1:
        return []
    rr, cc = np.mgrid[r0 : r1 + 1, c0 : c1 + 1]
    dx = G[rr, cc + 1] - G[rr, cc - 1]
    dy = G[rr + 1, cc] - G[rr - 1, cc]
    weight = np.exp(-((rr - r) ** 2 + (cc - c) ** 2) / (2.0 * sw * sw))
    n = p.ori_bins
    ang = np.mod(np.arctan2(dy, dx), 2 * np.pi)
    bins = np.mod(np.round(ang * n / (2 * np.pi)).astype(np.intp), n)
    hist = np.bincount(bins.ravel(), weights=(weight * np.hypot(dx, dy)).ravel(), minlength=n)
    smooth = (
        np.roll(hist, 2) + np.roll(hist, -2) + 4.0 * (np.roll(hist, 1) + np.roll(hist, -1)) + 6.0 * hist
    ) / 16.0
    peak = smooth.max()
    if peak <= 0:
        return []
    left, right = np.roll(smooth, 1), np.roll(smooth, -1)
    out = []
    for b in np.flatnonzero((smooth > left) & (smooth > right) & (smooth >= p.ori_peak_ratio * peak)):
        denom = left[b] - 2.0 * smooth[b] + right[b]
        shift = 0.5 * (left[b] - right[b]) / denom if denom != 0 else 0.0
        out.append(float(np.mod((b + shift) * 2 * np.pi / n, 2 * np.pi)))
    return out


def _descriptor(G: np.ndarray, r: int, c: int, angle: float, sigma_oct: float, p: SiftParams):
    d = p.descr_width
    hist_width = p.descr_scale_factor * sigma_oct
    radius = int(round(hist_width * math.sqrt(2.0) * (d + 1) * 0.5))
    radius = min(radius, int(math.hypot(*G.shape)))
    raw = _kernels.sift_descriptor(G, r, c, angle, hist_width, radius, d, p.descr_bins)
    norm = np.linalg.norm(raw)
    if norm == 0:
        return None
    vec = np.minimum(raw / norm, p.descr_clamp)
    return vec / np.linalg.norm(vec)


def detect_keypoints(image: np.ndarray, params: SiftParams | None = None) -> list[Keypoint]:
    """Detect SIFT keypoints in a [0, 1] intensity grid."""
    p = params or SiftParams()
    image = as_real_grid(image)
    if min(image.shape) < 16:
        raise ValueError(f"image too small: {image.shape}, need min dim >= 16")
    rows, cols = image.shape
    gaussians, dogs = _scale_space(image, p)
    to_input = 0.5 if p.upsample else 1.0
    prefilter = 0.5 * p.contrast_threshold

    keypoints: list[Keypoint] = []
    for o, (G, D) in enumerate(zip(gaussians, dogs)):
        seen = set()
        for s, r, c in _kernels.dog_extrema(D, prefilter, p.border):
            res = _refine(D, int(s), int(r), int(c), p)
            if res is None:
                continue
            s2, r2, c2, off, contrast = res
            if (s2, r2, c2) in seen:
                continue
            seen.add((s2, r2, c2))
            sigma_oct = p.sigma * 2.0 ** ((s2 + off[2]) / p.intervals)
            unit = (2.0**o) * to_input
            y = (r2 + off[1]) * unit
            x = (c2 + off[0]) * unit
            if not (0 <= x < cols and 0 <= y < rows):
                continue
            layer = G[min(max(int(round(s2 + off[2])), 0), G.shape[0] - 1)]
            for angle in _orientations(layer, r2, c2, sigma_oct, p):
                desc = _descriptor(layer, r2, c2, angle, sigma_oct, p)
                if desc is None:
                    continue
                keypoints.append(Keypoint(x, y, sigma_oct * unit, angle, desc, o, s2, float(contrast)))
    return keypoints


def _descriptor_matrix(kps) -> np.ndarray:
    if not kps:
        return np.zeros((0, 128))
    return np.stack([np.asarray(k.descriptor, dtype=np.float64) for k in kps])


def match_keypoints(a, b, ratio: float = 0.8) -> list[tuple[int, int]]:
    """Ratio-test matches from ``a`` into ``b``: pair ``(i, j)`` iff ``d1 < ratio * d2``.

    ``j`` is the nearest descriptor in ``b``.  The test is directional, so
    ``match_keypoints(b, a)`` need not mirror the result.
    """
    if len(a) == 0 or len(b) < 2:
        return []
    A = _descriptor_matrix(a)
    B = _descriptor_matrix(b)
    sq = (A * A).sum(1)[:, None] + (B * B).sum(1)[None, :] - 2.0 * A @ B.T
    dist = np.sqrt(np.maximum(sq, 0.0))
    order = np.argsort(dist, axis=1, kind="stable")[:, :2]
    d1 = dist[np.arange(len(a)), order[:, 0]]
    d2 = dist[np.arange(len(a)), order[:, 1]]
    return [(int(i), int(order[i, 0])) for i in np.flatnonzero(d1 < ratio * d2)]


# -- stability report --------------------------------------------------------------


@dataclass(frozen=True)
class SourceRow:
    source: str
    keypoints: int
    matches: int


@dataclass
class StabilityReport:
    rows: list[SourceRow]
    stable: list[Keypoint] = field(default_factory=list, repr=False)
    keypoints: dict[str, list[Keypoint]] = field(default_factory=dict, repr=False)

    def to_dict(self) -> dict:
        return {
            "rows": [{"source": r.source, "keypoints": r.keypoints, "matches_to_original": r.matches} for r in self.rows],
            "stable": [k.to_dict() for k in self.stable],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["source", "keypoints", "matches_to_original"])
        for r in self.rows:
            writer.writerow([r.source, r.keypoints, r.matches])
        return buf.getvalue()


def stability_report(
    image: np.ndarray,
    system: CurveletSystem,
    params: SiftParams | None = None,
    ratio: float = 0.8,
    enhance: bool = True,
    max_offset: float | None = 10.0,
) -> StabilityReport:
    """Keypoint counts on the image and on each scale contribution, with matches to the image.

    A descriptor match only counts when the two keypoints lie within
    ``max_offset`` pixels of each other (``None`` disables the check).  The
    original row's match count is the keypoint count by definition.  The
    stable subset is the original keypoints matched from the scale-1 contribution.
    """
    image = as_real_grid(image)
    original = detect_keypoints(image, params)
    rows = [SourceRow("original", len(original), len(original))]
    found = {"original": original}
    coeffs = forward(system, image)
    stable: list[Keypoint] = []
    for j in range(1, system.J + 1):
        contrib = scale_contribution(system, coeffs, j)
        if enhance:
            contrib = enhance_grid(contrib)
        kps = detect_keypoints(contrib, params)
        pairs = match_keypoints(kps, original, ratio)
        if max_offset is not None:
            pairs = [
                (i, t) for i, t in pairs if math.hypot(kps[i].x - original[t].x, kps[i].y - original[t].y) <= max_offset
            ]
        label = f"scale{j}"
        rows.append(SourceRow(label, len(kps), len(pairs)))
        found[label] = kps
        if j == 1:
            stable = [original[t] for t in sorted({t for _, t in pairs})]
    return StabilityReport(rows, stable, found)
