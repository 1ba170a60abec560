"""Image and spectrum grids, unitary 2D DFT, resampling and image I/O.

Grids are plain 2D numpy arrays (``float64`` for images, ``complex128`` for
spectra); rows index image height and cols index image width.
"""
from __future__ import annotations

import os
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

__all__ = [
    "ImageReadError",
    "UnsupportedFormatError",
    "as_real_grid",
    "load_image",
    "save_image",
    "to_uint8",
    "dft2",
    "idft2",
    "centered_frequencies",
    "upsample",
    "downsample",
]

_LUMA = (0.299, 0.587, 0.114)


class ImageReadError(OSError):
    """The file could not be read as an image."""


class UnsupportedFormatError(ValueError):
    """The file is an image, but not 8-bit P5 PGM or 8-bit PNG."""


def as_real_grid(data) -> np.ndarray:
    grid = np.asarray(data, dtype=np.float64)
    if grid.ndim != 2 or grid.shape[0] < 1 or grid.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2D grid, got shape {grid.shape}")
    return grid


def _pgm_magic(path: Path) -> bytes:
    with open(path, "rb") as fh:
        return fh.read(2)


def load_image(path: str | os.PathLike) -> np.ndarray:
    """Read a P5 PGM or 8-bit PNG into a float grid scaled to [0, 1].

    Colour images are converted to luminance with Rec. 601 weights.
    """
    path = Path(path)
    try:
        img = Image.open(path)
    except FileNotFoundError as exc:
        raise ImageReadError(f"unreadable file: {path}") from exc
    except UnidentifiedImageError as exc:
        raise UnsupportedFormatError(f"unsupported format: {path}") from exc
    except OSError as exc:
        raise ImageReadError(f"unreadable file: {path}: {exc}") from exc

    with img:
        if img.format == "PPM":
            if _pgm_magic(path) != b"P5":
                raise UnsupportedFormatError(f"unsupported format: only P5 PGM accepted ({path})")
        elif img.format != "PNG":
            raise UnsupportedFormatError(f"unsupported format: {img.format} ({path})")
        if img.width == 0 or img.height == 0:
            raise ImageReadError(f"zero-dimension image: {path}")
        try:
            img.load()
        except (OSError, SyntaxError, ValueError) as exc:
            raise ImageReadError(f"unreadable file: {path}: {exc}") from exc

        mode = img.mode
        if mode in ("L", "P", "LA", "PA"):
            arr = np.asarray(img.convert("L") if mode in ("P", "PA", "LA") else img, dtype=np.float64)
        elif mode in ("RGB", "RGBA"):
            rgb = np.asarray(img.convert("RGB"), dtype=np.float64)
            arr = rgb @ np.asarray(_LUMA)
        elif mode == "1":
            arr = np.asarray(img.convert("L"), dtype=np.float64)
        else:
            raise UnsupportedFormatError(f"unsupported format: mode {mode} is not 8-bit ({path})")
    return arr / 255.0


def to_uint8(grid: np.ndarray) -> np.ndarray:
    """Clamp to [0, 1] and quantize to 8 bits, rounding half to even."""
    grid = np.clip(np.asarray(grid, dtype=np.float64), 0.0, 1.0)
    return np.rint(grid * 255.0).astype(np.uint8)


def save_image(grid: np.ndarray, path: str | os.PathLike) -> None:
    """Write a grid as 8-bit grayscale; format chosen from the suffix (.png or .pgm)."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix not in (".png", ".pgm"):
        raise UnsupportedFormatError(f"unsupported output format: {suffix or '(none)'}")
    img = Image.fromarray(to_uint8(as_real_grid(grid)), mode="L")
    try:
        img.save(path, format="PNG" if suffix == ".png" else "PPM")
    except OSError as exc:
        raise ImageReadError(f"unwritable path: {path}: {exc}") from exc


def dft2(grid: np.ndarray) -> np.ndarray:
    """Unitary 2D DFT with the frequency origin at index (0, 0)."""
    return np.fft.fft2(np.asarray(grid), norm="ortho")


def idft2(spectrum: np.ndarray) -> np.ndarray:
    """Inverse of :func:`dft2`."""
    return np.fft.ifft2(np.asarray(spectrum), norm="ortho")


def centered_frequencies(size: int) -> np.ndarray:
    """Signed integer frequencies ``-(size//2) .. ceil(size/2)-1`` in centered order."""
    return np.arange(size) - size // 2


def _upsample_axis(arr: np.ndarray, factor: int, axis: int) -> np.ndarray:
    size = arr.shape[axis]
    if size == 1:
        return np.repeat(arr, factor, axis=axis)
    pos = np.arange(size * factor) / factor
    # The trailing samples past the last source point are extrapolated
    # linearly from the last interval so affine data stays affine.
    lo = np.minimum(np.floor(pos).astype(np.intp), size - 2)
    frac = pos - lo
    a = np.take(arr, lo, axis=axis)
    b = np.take(arr, lo + 1, axis=axis)
    shape = [1] * arr.ndim
    shape[axis] = -1
    frac = frac.reshape(shape)
    return a + frac * (b - a)


def upsample(grid: np.ndarray, factor: int) -> np.ndarray:
    """Bilinear upsampling by 2 or 4; source samples land on the stride-``factor`` lattice."""
    if factor not in (2, 4):
        raise ValueError(f"factor out of range: {factor} (expected 2 or 4)")
    grid = as_real_grid(grid)
    return _upsample_axis(_upsample_axis(grid, factor, 0), factor, 1)


def downsample(grid: np.ndarray, factor: int, reduce: str = "mean") -> np.ndarray:
    """Block reduction by ``factor``; ``reduce`` is ``"mean"`` or ``"max"``."""
    grid = np.asarray(grid)
    if factor < 2:
        raise ValueError(f"factor out of range: {factor}")
    rows, cols = grid.shape
    if rows % factor or cols % factor:
        raise ValueError(f"indivisible dims {grid.shape} for factor {factor}")
    blocks = grid.reshape(rows // factor, factor, cols // factor, factor)
    if reduce == "mean":
        return blocks.mean(axis=(1, 3))
    if reduce == "max":
        return blocks.max(axis=(1, 3))
    raise ValueError(f"unknown reduction: {reduce!r}")
