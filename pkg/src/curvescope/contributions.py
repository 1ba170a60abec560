"""Per-scale coefficient contributions (single-scale partial reconstructions)."""
from __future__ import annotations

import numpy as np

from .fdct import CurveletCoeffs, CurveletSystem, inverse

__all__ = ["scale_contribution", "contributions", "enhance"]


def scale_contribution(system: CurveletSystem, coeffs: CurveletCoeffs, j: int) -> np.ndarray:
    """Reconstruct the image from scale ``j`` alone (1 is the lowpass block)."""
    if not 1 <= j <= coeffs.J:
        raise ValueError(f"scale {j} outside 1..{coeffs.J}")
    only = coeffs.zeros_like()
    only.data[j - 1] = [c.copy() for c in coeffs.data[j - 1]]
    return inverse(system, only)


def contributions(system: CurveletSystem, coeffs: CurveletCoeffs) -> list[np.ndarray]:
    return [scale_contribution(system, coeffs, j) for j in range(1, coeffs.J + 1)]


def enhance(grid: np.ndarray, atol: float = 1e-12) -> np.ndarray:
    """Affine stretch of ``[min, max]`` onto ``[0, 1]``.

    A grid whose range is at most ``atol`` (round-off residue, e.g. the fine
    scales of a constant image) is treated as constant and maps to 0.5.
    """
    grid = np.asarray(grid, dtype=np.float64)
    lo, hi = grid.min(), grid.max()
    if hi - lo <= atol:
        return np.full(grid.shape, 0.5)
    return (grid - lo) / (hi - lo)
