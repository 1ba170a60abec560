"""Fast discrete curvelet transform via wrapping.

The centered ``m x n`` frequency grid is split into concentric Cartesian
coronae by a ladder of separable Meyer lowpass windows, and each corona is
split into angular wedges whose count follows the parabolic doubling rule.
Every wedge window is stored only on its support.  Analysis multiplies the
image spectrum by a wedge window, wraps the product modulo a small rectangle
at the origin and takes an inverse FFT of that rectangle; synthesis is the
exact adjoint.  The squared windows sum to one at every frequency bin, so the
pair is a tight frame with perfect reconstruction.

Frequencies are addressed by signed integer indices ``(a, b)``: ``a`` along
rows, ``b`` along columns, with ``-(m//2) <= a < m - m//2``.

Angles are numbered with a pseudo-polar coordinate ``sigma`` in ``[0, 4)``
that runs once around the square; quadrant ``q = floor(sigma)``.  Quadrant 0
is ``b > 0, |b| >= |a|`` and the wedges are ordered by increasing ``sigma``.
Scale and angle numbers are 1-based: ``(1, 1)`` is the coarse lowpass block.
"""
from __future__ import annotations

import copy
from dataclasses import dataclass, field

import numpy as np

from .grid import dft2, idft2

__all__ = [
    "FINEST_MODES",
    "WrapGeometry",
    "Wedge",
    "CurveletSystem",
    "CurveletCoeffs",
    "meyer_step",
    "lowpass_profile",
    "radial_window",
    "angular_window",
    "wedge_window",
    "num_orientations",
    "max_scales",
    "angle_counts",
    "plan",
    "wrap_wedge",
    "unwrap_wedge",
    "forward",
    "synthesize",
    "inverse",
    "window_energy",
]

FINEST_MODES = ("curvelets", "wavelets")


def meyer_step(t):
    """Meyer smooth step: 0 for t <= 0, 1 for t >= 1, and nu(t) + nu(1 - t) = 1."""
    t = np.clip(np.asarray(t, dtype=np.float64), 0.0, 1.0)
    out = t**4 * (35.0 - 84.0 * t + 70.0 * t**2 - 20.0 * t**3)
    return out if out.ndim else float(out)


def _lowpass_1d(t: np.ndarray) -> np.ndarray:
    # flat on |t| <= 1, smooth cosine roll-off to zero at |t| = 2
    t = np.abs(t)
    return np.where(t >= 2.0, 0.0, np.cos(0.5 * np.pi * meyer_step(t - 1.0)))


def num_orientations(j: int, n_theta: int) -> int:
    """Number of wedges at scale ``j >= 2``: ``n_theta * 2**ceil((j - 2) / 2)``."""
    _check_n_theta(n_theta)
    if j < 2:
        raise ValueError(f"orientation count defined for scales j >= 2, got {j}")
    return n_theta << ((j - 1) // 2)


def _check_n_theta(n_theta: int) -> None:
    if n_theta < 8 or n_theta & (n_theta - 1):
        raise ValueError(f"invalid N_theta {n_theta}: must be 2**P with P >= 3")


def max_scales(m: int, n: int) -> int:
    """Largest usable scale count, ``floor(log2(min(m, n))) - 3``."""
    k = min(int(m), int(n))
    if k < 16:
        raise ValueError(f"image too small: min dimension {k} < 16")
    return (k.bit_length() - 1) - 3


def angle_counts(J: int, n_theta: int, finest: str = "curvelets") -> list[int]:
    """Angles per scale, coarse block first."""
    counts = [1] + [num_orientations(j, n_theta) for j in range(2, J + 1)]
    if finest == "wavelets":
        counts[-1] = 1
    return counts


@dataclass(frozen=True)
class WrapGeometry:
    """Support of a windowed spectrum and the rectangle it wraps into.

    ``rows``/``cols`` are signed frequency indices of the support bins;
    ``shape`` is the wrapping rectangle.  Bin ``(a, b)`` lands at
    ``(a mod shape[0], b mod shape[1])``.
    """

    rows: np.ndarray
    cols: np.ndarray
    shape: tuple[int, int]

    @property
    def wrap_index(self) -> np.ndarray:
        return np.mod(self.rows, self.shape[0]) * self.shape[1] + np.mod(self.cols, self.shape[1])


@dataclass(frozen=True, eq=False)
class Wedge:
    scale: int
    angle: int
    quadrant: int | None  # None for the isotropic blocks
    geometry: WrapGeometry
    window: np.ndarray  # window values on the support
    grid_index: np.ndarray  # flat index of each support bin in the FFT-ordered grid
    wrap_index: np.ndarray
    length: int  # support extent along the radial axis
    width: int  # largest support extent across the radial axis

    @property
    def shape(self) -> tuple[int, int]:
        return self.geometry.shape


@dataclass(frozen=True, eq=False)
class CurveletSystem:
    """Tiling geometry and window bank for fixed ``(m, n, J, n_theta, finest)``."""

    m: int
    n: int
    J: int
    n_theta: int
    finest: str
    wedges: tuple[tuple[Wedge, ...], ...]

    def scale(self, j: int) -> tuple[Wedge, ...]:
        return self.wedges[j - 1]

    def wedge(self, j: int, l: int) -> Wedge:
        return self.wedges[j - 1][l - 1]

    @property
    def angle_counts(self) -> list[int]:
        return [len(s) for s in self.wedges]

    def lowpass_widths(self, s: int) -> tuple[float, float]:
        """Half-widths of the flat top of the lowpass window at level ``s``."""
        scale = 2.0 ** (self.J - s)
        return self.m / 3.0 / scale, self.n / 3.0 / scale


@dataclass(eq=False)
class CurveletCoeffs:
    """Ragged coefficient container; ``coeffs[j, l]`` is 1-based."""

    m: int
    n: int
    J: int
    n_theta: int
    finest: str
    data: list[list[np.ndarray]] = field(repr=False)

    def __getitem__(self, key: tuple[int, int]) -> np.ndarray:
        j, l = key
        return self.data[j - 1][l - 1]

    def __setitem__(self, key: tuple[int, int], value: np.ndarray) -> None:
        j, l = key
        cur = self.data[j - 1][l - 1]
        value = np.asarray(value, dtype=np.complex128)
        if value.shape != cur.shape:
            raise ValueError(f"shape mismatch at {key}: {value.shape} != {cur.shape}")
        self.data[j - 1][l - 1] = value

    def scale(self, j: int) -> list[np.ndarray]:
        return self.data[j - 1]

    def copy(self) -> "CurveletCoeffs":
        return copy.deepcopy(self)

    def zeros_like(self) -> "CurveletCoeffs":
        data = [[np.zeros_like(c) for c in s] for s in self.data]
        return CurveletCoeffs(self.m, self.n, self.J, self.n_theta, self.finest, data)

    def scale_energy(self, j: int) -> float:
        return float(sum(np.vdot(c, c).real for c in self.data[j - 1]))

    def energy(self) -> float:
        return float(sum(self.scale_energy(j) for j in range(1, self.J + 1)))

    def __iter__(self):
        for j, s in enumerate(self.data, start=1):
            for l, c in enumerate(s, start=1):
                yield j, l, c


# -- pointwise window evaluation --------------------------------------------


def _pseudo_angle(system: CurveletSystem, a, b) -> np.ndarray:
    u = np.asarray(a, dtype=np.float64) / system.m
    v = np.asarray(b, dtype=np.float64) / system.n
    u, v = np.broadcast_arrays(u, v)
    au, av = np.abs(u), np.abs(v)
    vert = av >= au
    with np.errstate(divide="ignore", invalid="ignore"):
        s_v = np.where(v != 0, u / np.where(v != 0, v, 1.0), 0.0)
        s_h = np.where(u != 0, -v / np.where(u != 0, u, 1.0), 0.0)
    sigma = np.where(
        vert,
        np.where(v > 0, 0.0, 2.0) + 0.5 * (s_v + 1.0),
        np.where(u > 0, 1.0, 3.0) + 0.5 * (s_h + 1.0),
    )
    return np.mod(sigma, 4.0)


def lowpass_profile(system: CurveletSystem, s: int, a, b) -> np.ndarray:
    """Separable lowpass ``Phi_s`` at level ``s`` in ``1..J``; ``Phi_J`` is identically 1."""
    if not 1 <= s <= system.J:
        raise ValueError(f"lowpass level {s} outside 1..{system.J}")
    a, b = np.broadcast_arrays(np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64))
    if s == system.J:
        return np.ones(a.shape)
    m1, m2 = system.lowpass_widths(s)
    return _lowpass_1d(a / m1) * _lowpass_1d(b / m2)


def radial_window(system: CurveletSystem, j: int, a, b) -> np.ndarray:
    """Corona window of scale ``j``: ``Phi_1`` for ``j = 1``, else ``sqrt(Phi_j^2 - Phi_{j-1}^2)``."""
    if not 1 <= j <= system.J:
        raise ValueError(f"scale {j} outside 1..{system.J}")
    if j == 1:
        return lowpass_profile(system, 1, a, b)
    outer = lowpass_profile(system, j, a, b)
    inner = lowpass_profile(system, j - 1, a, b)
    return np.sqrt(np.maximum(outer**2 - inner**2, 0.0))


def _is_directional(system: CurveletSystem, j: int) -> bool:
    return j >= 2 and not (j == system.J and system.finest == "wavelets")


def _angular_from_sigma(sigma: np.ndarray, l: int, count: int) -> np.ndarray:
    h = 4.0 / count
    half = 0.5 * h  # transition half-width; neighbouring transitions just touch
    centre = (l - 0.5) * h
    d = np.abs(np.mod(sigma - centre + 2.0, 4.0) - 2.0)
    x = (d - (0.5 * h - half)) / (2.0 * half)
    return np.where(x >= 1.0, 0.0, np.cos(0.5 * np.pi * meyer_step(x)))


def angular_window(system: CurveletSystem, j: int, l: int, a, b) -> np.ndarray:
    """Angular window of wedge ``(j, l)``; ones for the isotropic blocks."""
    count = len(system.scale(j))
    if not 1 <= l <= count:
        raise ValueError(f"angle {l} outside 1..{count} at scale {j}")
    if not _is_directional(system, j):
        return np.ones(np.broadcast(np.asarray(a), np.asarray(b)).shape)
    return _angular_from_sigma(_pseudo_angle(system, a, b), l, count)


def wedge_window(system: CurveletSystem, j: int, l: int, a, b) -> np.ndarray:
    return radial_window(system, j, a, b) * angular_window(system, j, l, a, b)


# -- planning ----------------------------------------------------------------


def _even_ceil(k: int) -> int:
    return max(2, k + (k & 1))


def _line_span(key: np.ndarray, pos: np.ndarray) -> int:
    """Largest ``max - min + 1`` of ``pos`` over groups sharing ``key``."""
    keys, inv = np.unique(key, return_inverse=True)
    lo = np.full(keys.size, np.iinfo(np.int64).max)
    hi = np.full(keys.size, np.iinfo(np.int64).min)
    np.minimum.at(lo, inv, pos)
    np.maximum.at(hi, inv, pos)
    return int((hi - lo).max()) + 1


def _make_wedge(system_dims, j, l, quadrant, rows, cols, window) -> Wedge:
    m, n = system_dims
    if rows.size == 0:
        shape, length, width = (2, 2), 0, 0
    elif quadrant is None:
        ext_r = int(rows.max() - rows.min()) + 1
        ext_c = int(cols.max() - cols.min()) + 1
        shape = (_even_ceil(ext_r), _even_ceil(ext_c))
        length, width = max(ext_r, ext_c), min(ext_r, ext_c)
    elif quadrant % 2 == 0:
        # radial axis along columns; wrap each column modulo the width
        length = int(cols.max() - cols.min()) + 1
        width = _line_span(cols, rows)
        shape = (_even_ceil(width), _even_ceil(length))
    else:
        length = int(rows.max() - rows.min()) + 1
        width = _line_span(rows, cols)
        shape = (_even_ceil(length), _even_ceil(width))
    geom = WrapGeometry(rows=rows, cols=cols, shape=shape)
    wrap_index = geom.wrap_index
    if np.unique(wrap_index).size != wrap_index.size:
        raise AssertionError(f"wrapping of wedge ({j}, {l}) is not injective")
    grid_index = np.mod(rows, m) * n + np.mod(cols, n)
    return Wedge(j, l, quadrant, geom, window, grid_index, wrap_index, length, width)


def plan(m: int, n: int, J: int | None = None, n_theta: int = 16, finest: str = "curvelets") -> CurveletSystem:
    """Precompute the wedge tiling for an ``m x n`` image."""
    _check_n_theta(n_theta)
    if finest not in FINEST_MODES:
        raise ValueError(f"finest must be one of {FINEST_MODES}, got {finest!r}")
    jmax = max_scales(m, n)
    if J is None:
        J = jmax
    if not 2 <= J <= jmax:
        raise ValueError(f"invalid J={J} for a {m}x{n} grid (allowed 2..{jmax})")

    shell = CurveletSystem(m, n, J, n_theta, finest, ())
    a = np.arange(m) - m // 2
    b = np.arange(n) - n // 2
    A, B = np.meshgrid(a, b, indexing="ij")
    A = A.ravel()
    B = B.ravel()
    sigma_all = _pseudo_angle(shell, A, B)

    scales = []
    for j in range(1, J + 1):
        radial = radial_window(shell, j, A, B)
        on = radial > 0.0
        rows, cols, rad, sig = A[on], B[on], radial[on], sigma_all[on]
        if not _is_directional(shell, j):
            scales.append((_make_wedge((m, n), j, 1, None, rows, cols, rad),))
            continue
        count = num_orientations(j, n_theta)
        per_quad = count // 4
        wedges = []
        for l in range(1, count + 1):
            ang = _angular_from_sigma(sig, l, count)
            sel = ang > 0.0
            wedges.append(
                _make_wedge((m, n), j, l, (l - 1) // per_quad, rows[sel], cols[sel], rad[sel] * ang[sel])
            )
        scales.append(tuple(wedges))
    return CurveletSystem(m, n, J, n_theta, finest, tuple(scales))


# -- wrapping ----------------------------------------------------------------


def wrap_wedge(product: np.ndarray, geometry: WrapGeometry) -> np.ndarray:
    """Re-index the support of ``product`` into the rectangle at the origin.

    ``product`` is indexed by signed frequency taken modulo its own shape, so a
    grid in FFT order (or any array addressed by plain indices) works.
    """
    product = np.asarray(product)
    rows = np.mod(geometry.rows, product.shape[0])
    cols = np.mod(geometry.cols, product.shape[1])
    out = np.zeros(geometry.shape, dtype=np.result_type(product.dtype, np.complex128))
    out.ravel()[geometry.wrap_index] = product[rows, cols]
    return out


def unwrap_wedge(rect: np.ndarray, geometry: WrapGeometry, grid_shape: tuple[int, int]) -> np.ndarray:
    """Adjoint of :func:`wrap_wedge`: scatter rectangle samples back onto the support."""
    out = np.zeros(grid_shape, dtype=np.complex128)
    rows = np.mod(geometry.rows, grid_shape[0])
    cols = np.mod(geometry.cols, grid_shape[1])
    out[rows, cols] = np.asarray(rect).ravel()[geometry.wrap_index]
    return out


# -- transform pair ------------------------------------------------------------


def _check_dims(system: CurveletSystem, shape) -> None:
    if tuple(shape) != (system.m, system.n):
        raise ValueError(f"dim mismatch: image {tuple(shape)} vs system {(system.m, system.n)}")


def forward(system: CurveletSystem, image: np.ndarray) -> CurveletCoeffs:
    image = np.asarray(image)
    if image.ndim != 2:
        raise ValueError("image must be 2D")
    _check_dims(system, image.shape)
    spectrum = dft2(image).ravel()
    data = []
    for wedges in system.wedges:
        row = []
        for w in wedges:
            rect = np.zeros(w.shape, dtype=np.complex128)
            rect.ravel()[w.wrap_index] = spectrum[w.grid_index] * w.window
            row.append(idft2(rect))
        data.append(row)
    return CurveletCoeffs(system.m, system.n, system.J, system.n_theta, system.finest, data)


def _check_coeffs(system: CurveletSystem, coeffs: CurveletCoeffs) -> None:
    _check_dims(system, (coeffs.m, coeffs.n))
    if len(coeffs.data) != system.J:
        raise ValueError(f"shape mismatch: {len(coeffs.data)} scales vs {system.J}")
    for wedges, grids in zip(system.wedges, coeffs.data):
        if len(wedges) != len(grids):
            raise ValueError(f"shape mismatch: scale {wedges[0].scale} has {len(grids)} angles, expected {len(wedges)}")
        for w, c in zip(wedges, grids):
            if c.shape != w.shape:
                raise ValueError(f"shape mismatch at ({w.scale}, {w.angle}): {c.shape} != {w.shape}")


def synthesize(system: CurveletSystem, coeffs: CurveletCoeffs) -> np.ndarray:
    """Adjoint of :func:`forward`, returning the complex-valued image."""
    _check_coeffs(system, coeffs)
    acc = np.zeros(system.m * system.n, dtype=np.complex128)
    for wedges, grids in zip(system.wedges, coeffs.data):
        for w, c in zip(wedges, grids):
            if not c.any():
                continue
            acc[w.grid_index] += dft2(c).ravel()[w.wrap_index] * w.window
    return idft2(acc.reshape(system.m, system.n))


def inverse(system: CurveletSystem, coeffs: CurveletCoeffs) -> np.ndarray:
    """Real part of :func:`synthesize`; for real images the discarded part is round-off."""
    return synthesize(system, coeffs).real


def window_energy(system: CurveletSystem) -> np.ndarray:
    """Sum of squared windows per frequency bin, in centered layout."""
    acc = np.zeros(system.m * system.n)
    for wedges in system.wedges:
        for w in wedges:
            acc[w.grid_index] += w.window**2
    return np.fft.fftshift(acc.reshape(system.m, system.n))
