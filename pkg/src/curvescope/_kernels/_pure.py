"""Vectorized numpy implementations of the inner loops.

Semantics match ``_ckernels.pyx`` exactly for the integer/boolean kernels;
float kernels agree to round-off.
"""
from __future__ import annotations

import numpy as np
from scipy import ndimage

_EIGHT = np.ones((3, 3), dtype=bool)


def nonmax_suppress(mag: np.ndarray, gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    """Non-maximum suppression with neighbours interpolated along the gradient.

    A pixel survives when it is strictly above the backward neighbour and at
    least the forward one; border pixels are always suppressed.
    """
    mag = np.asarray(mag, dtype=np.float64)
    rows, cols = mag.shape
    out = np.zeros_like(mag)
    if rows < 3 or cols < 3:
        return out
    m = mag[1:-1, 1:-1]
    gx = np.asarray(gx, dtype=np.float64)[1:-1, 1:-1]
    gy = np.asarray(gy, dtype=np.float64)[1:-1, 1:-1]
    ax, ay = np.abs(gx), np.abs(gy)
    sr = np.where(gy < 0, -1, 1)
    sc = np.where(gx < 0, -1, 1)
    r, c = np.mgrid[1 : rows - 1, 1 : cols - 1]
    major_c = ax >= ay
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.where(major_c, ay / np.where(ax > 0, ax, 1.0), ax / np.where(ay > 0, ay, 1.0))
    # first neighbour steps along the major axis only, second along both
    r1 = np.where(major_c, r, r + sr)
    c1 = np.where(major_c, c + sc, c)
    r1b = np.where(major_c, r, r - sr)
    c1b = np.where(major_c, c - sc, c)
    fwd = (1.0 - w) * mag[r1, c1] + w * mag[r + sr, c + sc]
    bwd = (1.0 - w) * mag[r1b, c1b] + w * mag[r - sr, c - sc]
    keep = (m > 0.0) & (m > bwd) & (m >= fwd)
    out[1:-1, 1:-1] = np.where(keep, m, 0.0)
    return out


def hysteresis(strong: np.ndarray, weak: np.ndarray) -> np.ndarray:
    """8-connected components of ``weak | strong`` that contain a strong pixel."""
    strong = np.asarray(strong, dtype=bool)
    candidates = np.asarray(weak, dtype=bool) | strong
    labels, count = ndimage.label(candidates, structure=_EIGHT)
    if count == 0:
        return np.zeros(strong.shape, dtype=bool)
    seeded = np.zeros(count + 1, dtype=bool)
    seeded[labels[strong]] = True
    seeded[0] = False
    return seeded[labels]


def _neighbours(img: np.ndarray):
    p = np.pad(img, 1)
    r, c = img.shape
    return (
        p[0:r, 1 : c + 1],  # P2 north
        p[0:r, 2 : c + 2],  # P3
        p[1 : r + 1, 2 : c + 2],  # P4 east
        p[2 : r + 2, 2 : c + 2],  # P5
        p[2 : r + 2, 1 : c + 1],  # P6 south
        p[2 : r + 2, 0:c],  # P7
        p[1 : r + 1, 0:c],  # P8 west
        p[0:r, 0:c],  # P9
    )


def zhang_suen(img: np.ndarray) -> np.ndarray:
    """Zhang-Suen thinning to convergence; pixels outside the grid count as off."""
    img = np.asarray(img, dtype=bool).copy()
    while True:
        changed = False
        for step in (0, 1):
            nb = [x.astype(np.int8) for x in _neighbours(img)]
            p2, p3, p4, p5, p6, p7, p8, p9 = nb
            count = sum(nb)
            seq = nb + [p2]
            trans = sum(((seq[i] == 0) & (seq[i + 1] == 1)).astype(np.int8) for i in range(8))
            if step == 0:
                c3 = (p2 * p4 * p6) == 0
                c4 = (p4 * p6 * p8) == 0
            else:
                c3 = (p2 * p4 * p8) == 0
                c4 = (p2 * p6 * p8) == 0
            delete = img & (count >= 2) & (count <= 6) & (trans == 1) & c3 & c4
            if delete.any():
                img[delete] = False
                changed = True
        if not changed:
            return img


def dog_extrema(dog: np.ndarray, threshold: float, border: int) -> np.ndarray:
    """Indices ``(s, r, c)`` of 3x3x3 extrema with ``|value| > threshold``, in lexicographic order."""
    dog = np.asarray(dog, dtype=np.float64)
    S, R, C = dog.shape
    hi = ndimage.maximum_filter(dog, size=3, mode="nearest")
    lo = ndimage.minimum_filter(dog, size=3, mode="nearest")
    mask = ((dog >= hi) & (dog > threshold)) | ((dog <= lo) & (dog < -threshold))
    valid = np.zeros_like(mask)
    b = max(int(border), 1)
    valid[1 : S - 1, b : R - b, b : C - b] = True
    return np.argwhere(mask & valid).astype(np.intp)


def sift_descriptor(
    img: np.ndarray, row: int, col: int, angle: float, hist_width: float, radius: int, d: int = 4, n: int = 8
) -> np.ndarray:
    """Raw ``d*d*n`` gradient histogram around ``(row, col)`` in the keypoint frame."""
    img = np.asarray(img, dtype=np.float64)
    R, C = img.shape
    cos_t = np.cos(angle) / hist_width
    sin_t = np.sin(angle) / hist_width
    off = np.arange(-radius, radius + 1)
    ii, jj = np.meshgrid(off, off, indexing="ij")
    ii = ii.ravel()
    jj = jj.ravel()
    c_rot = jj * cos_t + ii * sin_t
    r_rot = ii * cos_t - jj * sin_t
    rbin = r_rot + 0.5 * d - 0.5
    cbin = c_rot + 0.5 * d - 0.5
    rr = row + ii
    cc = col + jj
    ok = (rbin > -1) & (rbin < d) & (cbin > -1) & (cbin < d) & (rr > 0) & (rr < R - 1) & (cc > 0) & (cc < C - 1)
    rr, cc, rbin, cbin, r_rot, c_rot = rr[ok], cc[ok], rbin[ok], cbin[ok], r_rot[ok], c_rot[ok]
    dx = img[rr, cc + 1] - img[rr, cc - 1]
    dy = img[rr + 1, cc] - img[rr - 1, cc]
    mag = np.sqrt(dx * dx + dy * dy) * np.exp(-(r_rot * r_rot + c_rot * c_rot) / (0.5 * d * d))
    ori = np.mod(np.arctan2(dy, dx) - angle, 2.0 * np.pi)
    obin = ori * (n / (2.0 * np.pi))

    r0 = np.floor(rbin).astype(np.intp)
    c0 = np.floor(cbin).astype(np.intp)
    o0 = np.floor(obin).astype(np.intp)
    fr = rbin - r0
    fc = cbin - c0
    fo = obin - o0
    o0 = np.mod(o0, n)
    hist = np.zeros((d + 2, d + 2, n + 2))
    for dr, wr in ((0, 1.0 - fr), (1, fr)):
        for dc, wc in ((0, 1.0 - fc), (1, fc)):
            for do, wo in ((0, 1.0 - fo), (1, fo)):
                np.add.at(hist, (r0 + 1 + dr, c0 + 1 + dc, o0 + do), mag * wr * wc * wo)
    # orientation bin n wraps onto bin 0
    hist[:, :, 0] += hist[:, :, n]
    return hist[1 : d + 1, 1 : d + 1, :n].ravel()
